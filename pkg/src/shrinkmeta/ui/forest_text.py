# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from . import formatting as fm


COLUMNS = 100
LABEL_WIDTH = 26
PLOT_WIDTH = 44
# remainder after label, plot and two separating blanks
VALUE_WIDTH = COLUMNS - LABEL_WIDTH - PLOT_WIDTH - 2

GLYPHS = {
    fm.ROW_STUDY: "x",
    fm.ROW_SHRINKAGE: "o",
    fm.ROW_MU: "D",
    fm.ROW_PREDICTION: "=",
}
TARGET_GLYPH = "*"


def _fit(text, width):
    return text[:width].ljust(width)


def _col(v, lo, hi):
    return int(round((v - lo) / (hi - lo) * (PLOT_WIDTH - 1)))


def _plot(row, lo, hi):
    cells = [" "] * PLOT_WIDTH
    a = max(_col(row.lower, lo, hi), 0)
    b = min(_col(row.upper, lo, hi), PLOT_WIDTH - 1)
    fill = "=" if row.kind == fm.ROW_PREDICTION else "-"
    for c in range(a, b + 1):
        cells[c] = fill
    if row.lower < lo:
        cells[0] = "<"
    if row.upper > hi:
        cells[-1] = ">"
    if lo <= row.estimate <= hi:
        glyph = TARGET_GLYPH if row.highlight else GLYPHS[row.kind]
        cells[_col(row.estimate, lo, hi)] = glyph
    return "".join(cells)


def _axis_line(lo, hi):
    cells = [" "] * PLOT_WIDTH
    for t in fm.nice_ticks(lo, hi):
        label = fm.fmt(t)
        c = _col(t, lo, hi)
        start = min(max(c - len(label) // 2, 0), PLOT_WIDTH - len(label))
        if all(ch == " " for ch in cells[max(start - 1, 0):
                                         start + len(label) + 1]):
            cells[start:start + len(label)] = label
    return "".join(cells)


def _line(label, plot, value):
    return "{} {} {}".format(_fit(label, LABEL_WIDTH), plot,
                             _fit(value, VALUE_WIDTH))


def render(report, xlim=None):
    """
    Forest plot as fixed 100-column text
    """

    rows = fm.forest_rows(report)
    lo, hi = fm.plot_range(rows, xlim)
    lines = [_line("study", _fit("log odds ratio", PLOT_WIDTH),
                   "estimate [interval]"),
             "-" * COLUMNS]
    for row in rows:
        lines.append(_line(row.label, _plot(row, lo, hi), row.text))
    lines.append("-" * COLUMNS)
    lines.append(_line("", _axis_line(lo, hi), ""))
    lines.append(_fit(fm.tau_line(report), COLUMNS))
    return "\n".join(lines) + "\n"


def render_table(report):
    """
    Plain-text summary table: studies, shrinkage, mu, prediction, tau and
    the target weight
    """

    head = "{:<24} {:>8} {:>8} {:>20} {:>8} {:>20}".format(
        "study", "y", "sigma", "interval", "shrink", "interval")
    lines = [head, "-" * len(head)]
    for st, sh in zip(report.studies, report.shrinkage):
        label = st.label + (" *" if st.is_target else "")
        lines.append("{:<24} {:>8} {:>8} {:>20} {:>8} {:>20}".format(
            label[:24], fm.fmt(st.y), fm.fmt(st.sigma),
            fm.format_interval(st.lower, st.upper), fm.fmt(sh.mean),
            fm.format_interval(sh.lower, sh.upper)))
    lines.append("-" * len(head))
    lines.append("mu          {}".format(
        fm.format_estimate(report.mu.mean, report.mu.lower,
                           report.mu.upper)))
    lines.append("prediction  {}".format(
        fm.format_estimate(report.prediction.mean, report.prediction.lower,
                           report.prediction.upper)))
    lines.append(fm.tau_line(report))
    w = report.weight
    if w is not None:
        if w.plug_in is not None:
            lines.append("weight of {} at tau = {}: direct {}, indirect {}, "
                         "total {}".format(w.label, fm.fmt(w.tau),
                                           fm.fmt(w.plug_in.direct),
                                           fm.fmt(w.plug_in.indirect),
                                           fm.fmt(w.plug_in.total)))
        if w.averaged is not None:
            lines.append("posterior-averaged weight: {}".format(
                fm.fmt(w.averaged)))
        lines.append("note: {}".format(w.note))
    return "\n".join(lines) + "\n"
