# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from dataclasses import dataclass
import json
import sys

from .. import common
from ..ui import formatting as fm
from ..utils.command_registry import Command, CommandRegistry
from ..utils.props import StringProperty
from .effect_ingest import sigma_from_ci
from .nnhm_core import shrinkage_weight_from_aggregates


MODULE = "report-cli"

# which part of the plug-in weight is held against the published weight;
# BELOW rows publish a posterior-averaged weight, which must lie between
# the plug-in direct weight and the bound kept in weight_tol
WEIGHT_TOTAL = 'TOTAL'
WEIGHT_DIRECT = 'DIRECT'
WEIGHT_BELOW = 'BELOW'


@dataclass(frozen=True)
class RiskFactor:
    """
    Published aggregates of one risk factor (log-OR scale, 95% CIs)
    """

    name: str
    estimate: float
    ci: tuple
    mu_hat: float
    mu_ci: tuple
    tau_hat: float
    shrinkage: float
    shrinkage_ci: tuple
    shrinkage_tol: float
    weight: float
    weight_check: str
    weight_tol: float


AKI_RISK_FACTORS = (
    RiskFactor("mechanical ventilation", 3.488, (2.686, 4.289),
               2.215, (1.799, 2.630), 0.920,
               3.271, (2.529, 4.017), 0.03,
               0.837, WEIGHT_TOTAL, 0.01),
    RiskFactor("vasopressors", 5.095, (4.076, 6.113),
               2.295, (1.558, 3.015), 1.250,
               4.665, (3.676, 5.659), 0.05,
               0.856, WEIGHT_TOTAL, 0.01),
    RiskFactor("hypertension", 1.352, (0.795, 1.909),
               0.687, (0.535, 0.855), 0.330,
               1.053, (0.601, 1.519), 0.05,
               0.566, WEIGHT_TOTAL, 0.03),
    RiskFactor("obesity", 1.955, (1.263, 2.648),
               0.283, (-0.113, 0.718), 0.520,
               1.383, (0.567, 2.178), 0.06,
               0.685, WEIGHT_DIRECT, 0.01),
    RiskFactor("diabetes", 0.694, (0.049, 1.340),
               0.548, (0.480, 0.610), 0.045,
               0.555, (0.389, 0.718), 0.02,
               0.054, WEIGHT_BELOW, 0.10),
    RiskFactor("gender", 0.634, (0.073, 1.195),
               0.432, (0.304, 0.567), 0.270,
               0.527, (0.134, 0.927), 0.02,
               0.485, WEIGHT_TOTAL, 0.03),
    RiskFactor("smoking", 0.903, (0.189, 1.616),
               0.244, (0.011, 0.557), 0.210,
               0.441, (0.031, 1.041), 0.06,
               0.328, WEIGHT_BELOW, 0.40),
)


@dataclass(frozen=True)
class Reproduction:
    factor: RiskFactor
    sigma: float
    midpoint: float
    sigma_hat: float
    shrinkage: float
    weight: object

    @property
    def checked_weight(self):
        if self.factor.weight_check == WEIGHT_TOTAL:
            return self.weight.total
        return self.weight.direct

    @property
    def shrinkage_ok(self):
        return abs(self.shrinkage - self.factor.shrinkage) <= \
            self.factor.shrinkage_tol

    @property
    def weight_ok(self):
        if self.factor.weight_check == WEIGHT_BELOW:
            # published value is the posterior-averaged weight
            return (self.weight.direct < self.factor.weight <
                    self.factor.weight_tol and
                    self.weight.total < self.factor.weight_tol)
        return abs(self.checked_weight - self.factor.weight) <= \
            self.factor.weight_tol

    @property
    def weight_discrepancy(self):
        return self.factor.weight - self.checked_weight

    def to_dict(self):
        return {
            "name": self.factor.name,
            "sigma": self.sigma,
            "midpoint": self.midpoint,
            "sigma_hat": self.sigma_hat,
            "shrinkage": self.shrinkage,
            "published_shrinkage": self.factor.shrinkage,
            "shrinkage_ok": self.shrinkage_ok,
            "weight": {"direct": self.weight.direct,
                       "indirect": self.weight.indirect,
                       "total": self.weight.total},
            "published_weight": self.factor.weight,
            "weight_check": self.factor.weight_check.lower(),
            "weight_ok": self.weight_ok,
            "weight_discrepancy": self.weight_discrepancy,
        }


def reproduce(factor):
    """
    Plug-in shrinkage mean and weight from the published aggregates
    """

    sigma, midpoint = sigma_from_ci(*factor.ci, level=0.95)
    sigma_hat, _ = sigma_from_ci(*factor.mu_ci, level=0.95)
    weight = shrinkage_weight_from_aggregates(sigma, factor.tau_hat,
                                              sigma_hat)
    shrinkage = weight.direct * factor.estimate + \
        (1.0 - weight.direct) * factor.mu_hat
    return Reproduction(factor, sigma, midpoint, sigma_hat, shrinkage, weight)


def reproduce_all(factors=AKI_RISK_FACTORS):
    return [reproduce(f) for f in factors]


_ROW = "{:<24} {:>8} {:>8} {:>4} {:>8} {:>8} {:>8} {:>6} {:>4}"


def render_reproduction(results):
    head = _ROW.format("risk factor", "shrink", "publ.", "ok", "direct",
                       "total", "publ.", "check", "ok")
    lines = [head, "-" * len(head)]
    for r in results:
        lines.append(_ROW.format(
            r.factor.name, fm.fmt(r.shrinkage), fm.fmt(r.factor.shrinkage),
            "yes" if r.shrinkage_ok else "NO", fm.fmt(r.weight.direct),
            fm.fmt(r.weight.total), fm.fmt(r.factor.weight),
            r.factor.weight_check.lower(), "yes" if r.weight_ok else "NO"))
    return "\n".join(lines) + "\n"


@CommandRegistry()
class SHM_OT_Reproduce(Command):
    """
    Plug-in reproduction of the published AKI risk-factor aggregates
    """

    idname = "reproduce"
    label = "Reproduce"
    description = "Check plug-in shrinkage means and weights against the " \
                  "published AKI/COVID-19 aggregates"

    out = StringProperty(name="out", description="JSON result path",
                         default="")

    def execute(self, args):
        results = reproduce_all()
        sys.stdout.write(render_reproduction(results))
        if args.out:
            common.atomic_write(args.out, json.dumps(
                [r.to_dict() for r in results], indent=2,
                sort_keys=True) + "\n")
        failed = [r.factor.name for r in results
                  if not (r.shrinkage_ok and r.weight_ok)]
        if failed:
            raise common.NumericalError(
                MODULE, "reproduction outside tolerance: {}"
                .format(", ".join(failed)))
        return {'FINISHED'}
