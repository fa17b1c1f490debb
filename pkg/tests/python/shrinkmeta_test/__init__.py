import os
import sys

# tests run against the source tree
_SRC = os.path.normpath(os.path.join(os.path.dirname(__file__), "..", "..",
                                     "..", "src"))
if _SRC not in sys.path:
    sys.path.insert(0, _SRC)

from . import effect_ingest_test
from . import nnhm_core_test
from . import tau_marginal_test
from . import mixture_posteriors_test
from . import mc_validate_test
from . import report_test
from . import forest_test
from . import published_test
from . import cli_test
