# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

import math

from . import formatting as fm
from .svg import SvgDocument


WIDTH = 960
ROW_HEIGHT = 24
TOP = 48
LABEL_X = 12
PLOT_LEFT = 300
PLOT_RIGHT = 700
VALUE_X = 716
ARROW = 6

COLOR_STUDY = "#1f4e79"
COLOR_SHRINKAGE = "#555555"
COLOR_TARGET = "#d62728"
COLOR_SUMMARY = "#000000"
FONT = "Helvetica, Arial, sans-serif"


class _Axis:
    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi

    def x(self, v):
        v = min(max(v, self.lo), self.hi)
        return PLOT_LEFT + (v - self.lo) / (self.hi - self.lo) * \
            (PLOT_RIGHT - PLOT_LEFT)


def _interval(doc, axis, y, row, color):
    x1, x2 = axis.x(row.lower), axis.x(row.upper)
    doc.line(x1, y, x2, y, stroke=color, stroke_width=1.5)
    if row.lower < axis.lo:
        doc.polygon([(x1, y), (x1 + ARROW, y - ARROW / 2),
                     (x1 + ARROW, y + ARROW / 2)],
                    class_="clip-marker", fill=color)
    if row.upper > axis.hi:
        doc.polygon([(x2, y), (x2 - ARROW, y - ARROW / 2),
                     (x2 - ARROW, y + ARROW / 2)],
                    class_="clip-marker", fill=color)


def _row(doc, axis, y, row):
    if row.kind == fm.ROW_STUDY:
        doc.group_start(class_="row study")
        _interval(doc, axis, y, row, COLOR_STUDY)
        if axis.lo <= row.estimate <= axis.hi:
            doc.rect(axis.x(row.estimate) - 4, y - 4, 8.0, 8.0,
                     fill=COLOR_STUDY)
    elif row.kind == fm.ROW_SHRINKAGE:
        color = COLOR_TARGET if row.highlight else COLOR_SHRINKAGE
        doc.group_start(class_="row shrinkage target" if row.highlight
                        else "row shrinkage")
        _interval(doc, axis, y, row, color)
        if axis.lo <= row.estimate <= axis.hi:
            doc.circle(axis.x(row.estimate), y, 4.0, fill="white",
                       stroke=color, stroke_width=1.5)
    elif row.kind == fm.ROW_MU:
        doc.group_start(class_="row summary mu")
        x1, x2 = axis.x(row.lower), axis.x(row.upper)
        xm = axis.x(row.estimate)
        doc.polygon([(x1, y), (xm, y - 7), (x2, y), (xm, y + 7)],
                    fill=COLOR_SUMMARY)
    else:
        doc.group_start(class_="row summary prediction")
        x1, x2 = axis.x(row.lower), axis.x(row.upper)
        doc.rect(x1, y - 3, x2 - x1, 6.0, fill=COLOR_SUMMARY,
                 fill_opacity="0.35")
        if row.lower < axis.lo or row.upper > axis.hi:
            _interval(doc, axis, y, row, COLOR_SUMMARY)
    label_weight = "bold" if row.is_summary else None
    doc.text(LABEL_X, y + 4, row.label, font_weight=label_weight)
    doc.text(VALUE_X, y + 4, row.text)
    doc.group_end()


def _axes(doc, axis, y0):
    doc.group_start(class_="axis log-or")
    doc.line(PLOT_LEFT, y0, PLOT_RIGHT, y0, stroke="black")
    for t in fm.nice_ticks(axis.lo, axis.hi):
        x = axis.x(t)
        doc.line(x, y0, x, y0 + 5, stroke="black")
        doc.text(x, y0 + 18, fm.fmt(t), text_anchor="middle")
    doc.text((PLOT_LEFT + PLOT_RIGHT) / 2, y0 + 34, "log odds ratio",
             text_anchor="middle")
    doc.group_end()

    y1 = y0 + 48
    doc.group_start(class_="axis odds-ratio")
    doc.line(PLOT_LEFT, y1, PLOT_RIGHT, y1, stroke="black")
    for t in fm.odds_ratio_ticks(axis.lo, axis.hi):
        x = axis.x(math.log(t))
        doc.line(x, y1, x, y1 + 5, stroke="black")
        doc.text(x, y1 + 18, fm.format_odds_ratio(t), text_anchor="middle")
    doc.text((PLOT_LEFT + PLOT_RIGHT) / 2, y1 + 34, "odds ratio",
             text_anchor="middle")
    doc.group_end()
    return y1 + 34


def render(report, xlim=None):
    """
    SVG forest plot of a report, byte-identical for identical input
    """

    rows = fm.forest_rows(report)
    axis = _Axis(*fm.plot_range(rows, xlim))
    y_axis = TOP + ROW_HEIGHT * len(rows) + 8
    height = y_axis + 48 + 34 + 40
    doc = SvgDocument(WIDTH, height)

    doc.group_start(font_family=FONT, font_size="12")
    doc.text(LABEL_X, 24, "Forest plot (level {})".format(report.level),
             font_weight="bold")
    doc.text(VALUE_X, 24, "estimate [interval]", font_weight="bold")
    if axis.lo <= 0.0 <= axis.hi:
        doc.line(axis.x(0.0), TOP - 12, axis.x(0.0), y_axis,
                 class_="null-line", stroke="#999999",
                 stroke_dasharray="4 3")
    for n, row in enumerate(rows):
        _row(doc, axis, TOP + ROW_HEIGHT * n, row)
    bottom = _axes(doc, axis, y_axis)
    doc.text(LABEL_X, bottom + 24, fm.tau_line(report), class_="tau")
    doc.group_end()
    return doc.get_svg()
