# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"


pkg_info = {
    "name": "shrinkmeta",
    "version": (1, 0, 0),
    "description": "Full-Bayes random-effects meta-analysis under the "
                   "normal-normal hierarchical model: overall-effect and "
                   "shrinkage posteriors, MAP predictive distributions and "
                   "forest-plot reports",
}


from . import common
from . import utils
from . import properties
from . import ui
from . import op
from . import cli


def main(argv=None):
    return cli.main(argv)
