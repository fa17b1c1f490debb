# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from html import escape as html_escape


def _num(v):
    text = "{:.2f}".format(v)
    return "0.00" if text == "-0.00" else text


def _quote(value):
    return "\"{}\"".format(html_escape(str(value)))


class SvgDocument:
    """
    Minimal SVG 1.1 writer with fixed number formatting
    """

    def __init__(self, width, height):
        self.width = width
        self.height = height
        self._parts = []
        self._depth = 1

    def _emit(self, text):
        self._parts.append("  " * self._depth + text + "\n")

    @staticmethod
    def _attrs(attrs):
        out = []
        for key, value in attrs.items():
            if value is None:
                continue
            if isinstance(value, float):
                value = _num(value)
            out.append(" {}={}".format(key.rstrip("_").replace("_", "-"),
                                       _quote(value)))
        return "".join(out)

    def group_start(self, **attrs):
        self._emit("<g{}>".format(self._attrs(attrs)))
        self._depth += 1

    def group_end(self):
        self._depth -= 1
        self._emit("</g>")

    def line(self, x1, y1, x2, y2, **attrs):
        self._emit("<line x1={} y1={} x2={} y2={}{}/>".format(
            _quote(_num(x1)), _quote(_num(y1)), _quote(_num(x2)),
            _quote(_num(y2)), self._attrs(attrs)))

    def rect(self, x, y, width, height, **attrs):
        self._emit("<rect x={} y={} width={} height={}{}/>".format(
            _quote(_num(x)), _quote(_num(y)), _quote(_num(width)),
            _quote(_num(height)), self._attrs(attrs)))

    def circle(self, cx, cy, r, **attrs):
        self._emit("<circle cx={} cy={} r={}{}/>".format(
            _quote(_num(cx)), _quote(_num(cy)), _quote(_num(r)),
            self._attrs(attrs)))

    def polygon(self, points, **attrs):
        pts = " ".join("{},{}".format(_num(x), _num(y)) for x, y in points)
        self._emit("<polygon points={}{}/>".format(_quote(pts),
                                                   self._attrs(attrs)))

    def text(self, x, y, string, **attrs):
        self._emit("<text x={} y={}{}>{}</text>".format(
            _quote(_num(x)), _quote(_num(y)), self._attrs(attrs),
            html_escape(str(string), quote=False)))

    def get_svg(self):
        head = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            '<svg version="1.1" xmlns="http://www.w3.org/2000/svg" '
            'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
        ).format(w=self.width, h=self.height)
        return head + "".join(self._parts) + "</svg>\n"
