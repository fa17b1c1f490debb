# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from . import effect_ingest
from . import nnhm_core
from . import tau_marginal
from . import mixture_posteriors
from . import mc_validate
from . import report
from . import published
