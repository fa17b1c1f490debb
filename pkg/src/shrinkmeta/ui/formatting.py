# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from dataclasses import dataclass
import math

import numpy as np


DECIMALS = 3

ROW_STUDY = "study"
ROW_SHRINKAGE = "shrinkage"
ROW_MU = "mu"
ROW_PREDICTION = "prediction"


def fmt(x):
    """
    Fixed 3-decimal text, never '-0.000'
    """

    text = "{:.{}f}".format(x, DECIMALS)
    if float(text) == 0.0:
        text = "{:.{}f}".format(0.0, DECIMALS)
    return text


def format_interval(lower, upper):
    return "[{}, {}]".format(fmt(lower), fmt(upper))


def format_estimate(x, lower, upper):
    return "{} {}".format(fmt(x), format_interval(lower, upper))


@dataclass(frozen=True)
class ForestRow:
    kind: str
    label: str
    estimate: float
    lower: float
    upper: float
    highlight: bool = False

    @property
    def is_summary(self):
        return self.kind in (ROW_MU, ROW_PREDICTION)

    @property
    def text(self):
        return format_estimate(self.estimate, self.lower, self.upper)


def forest_rows(report):
    """
    Study row followed by its shrinkage row for every study, then the mu
    diamond and the prediction bar
    """

    rows = []
    for st, sh in zip(report.studies, report.shrinkage):
        rows.append(ForestRow(ROW_STUDY, st.label, st.y, st.lower, st.upper))
        rows.append(ForestRow(ROW_SHRINKAGE, st.label + " (shrinkage)",
                              sh.mean, sh.lower, sh.upper,
                              highlight=sh.is_target))
    rows.append(ForestRow(ROW_MU, "mu", report.mu.mean, report.mu.lower,
                          report.mu.upper))
    rows.append(ForestRow(ROW_PREDICTION, "prediction",
                          report.prediction.mean, report.prediction.lower,
                          report.prediction.upper))
    return rows


def tau_line(report):
    return "tau = {} {}".format(fmt(report.tau_estimate),
                                format_interval(report.tau.lower,
                                                report.tau.upper))


def plot_range(rows, xlim=None):
    if xlim is not None:
        return xlim
    points = [r.estimate for r in rows]
    mu = [r for r in rows if r.kind == ROW_MU]
    if mu:
        points += [mu[0].lower, mu[0].upper]
    lo, hi = min(points), max(points)
    span = max(hi - lo, 1.0)
    return lo - 0.5 * span, hi + 0.5 * span


def nice_ticks(lo, hi, target=6):
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = mag
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if m * mag >= raw:
            step = m * mag
            break
    start = math.ceil(lo / step - 1e-9) * step
    ticks = np.arange(start, hi + 1e-9 * step, step)
    return [0.0 if abs(t) < 1e-12 else float(t) for t in ticks]


def odds_ratio_ticks(lo, hi):
    """
    Odds ratio ticks inside [exp(lo), exp(hi)] at 1-2-5 steps
    """

    candidates = []
    for e in range(-4, 5):
        for m in (1.0, 2.0, 5.0):
            candidates.append(m * 10.0 ** e)
    return [c for c in candidates if lo <= math.log(c) <= hi]


def format_odds_ratio(v):
    if v >= 1:
        return "{:g}".format(v)
    return "{:.2g}".format(v)
