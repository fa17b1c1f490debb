# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

import sys

from shrinkmeta import cli


if __name__ == "__main__":
    sys.exit(cli.main())
