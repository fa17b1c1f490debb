# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from dataclasses import dataclass, field, replace
from functools import cached_property
import io
import json
import math
import os

import numpy as np
import pandas as pd
from scipy.stats import norm

from .. import common
from ..utils.props import EnumProperty, FloatProperty, StringProperty
from ..utils.property_class_registry import PropertyClassRegistry


MODULE = "effect-ingest"

CONTINUITY_ITEMS = [
    ('NONE', "none", "Reject tables with a zero cell"),
    ('HALVES_IF_ANY_ZERO', "halves-if-any-zero-cell",
     "Add 0.5 to all four cells iff any cell is zero"),
]

COLUMNS = ("label", "y", "se", "estimate", "ci_lower", "ci_upper",
           "ci_level", "a", "b", "c", "d", "target")

# input forms: (name, required columns, optional columns)
INPUT_FORMS = (
    ("y+se", ("y", "se"), ()),
    ("estimate+ci", ("estimate", "ci_lower", "ci_upper"), ("ci_level",)),
    ("2x2 counts", ("a", "b", "c", "d"), ()),
)

_TRUE_FLAGS = ("1", "true", "yes", "target")
_FALSE_FLAGS = ("0", "false", "no", "")


@PropertyClassRegistry()
class _Properties:
    idname = "effect_ingest"

    @classmethod
    def init_props(cls, config):
        config.continuity = EnumProperty(
            name="continuity",
            description="Continuity correction applied to 2x2 tables",
            items=CONTINUITY_ITEMS,
            default='HALVES_IF_ANY_ZERO'
        )
        config.ci_level = FloatProperty(
            name="ci_level",
            description="Level of published CIs without a ci_level column",
            default=0.95,
            min=1e-9,
            max=1.0 - 1e-9
        )
        config.target = StringProperty(
            name="target",
            description="Label of the study of primary interest "
                        "(overrides the input flag)",
            default=""
        )

    @classmethod
    def del_props(cls, config):
        del config.continuity
        del config.ci_level
        del config.target


@dataclass(frozen=True)
class TwoByTwo:
    events_exposed: float
    nonevents_exposed: float
    events_unexposed: float
    nonevents_unexposed: float

    def __post_init__(self):
        for name, value in self.cells():
            if not math.isfinite(value):
                raise common.ValidationError(
                    MODULE, "cell '{}' is not finite".format(name))
            if value < 0:
                raise common.ValidationError(
                    MODULE, "cell '{}' is negative ({})".format(name, value))

    def cells(self):
        return (("events_exposed", self.events_exposed),
                ("nonevents_exposed", self.nonevents_exposed),
                ("events_unexposed", self.events_unexposed),
                ("nonevents_unexposed", self.nonevents_unexposed))

    def swapped(self):
        """
        Table with exposed and unexposed rows exchanged
        """

        return TwoByTwo(self.events_unexposed, self.nonevents_unexposed,
                        self.events_exposed, self.nonevents_exposed)


@dataclass(frozen=True)
class Study:
    label: str
    y: float
    sigma: float
    is_target: bool = False
    quoted_ci: tuple = None

    def __post_init__(self):
        if not math.isfinite(self.y):
            raise common.ValidationError(
                MODULE, "study '{}': y is not finite".format(self.label))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise common.ValidationError(
                MODULE, "study '{}': sigma must be positive and finite "
                "(got {})".format(self.label, self.sigma))


@dataclass(frozen=True)
class Dataset:
    studies: tuple
    effect_scale: str = field(default='LOG_OR')

    def __post_init__(self):
        object.__setattr__(self, "studies", tuple(self.studies))
        if not self.studies:
            raise common.ValidationError(MODULE, "no studies")
        seen = set()
        for s in self.studies:
            if not s.label:
                continue
            if s.label in seen:
                raise common.ValidationError(
                    MODULE, "duplicate label '{}'".format(s.label))
            seen.add(s.label)
        if sum(1 for s in self.studies if s.is_target) > 1:
            raise common.ValidationError(
                MODULE, "more than one study is flagged as target")

    @property
    def k(self):
        return len(self.studies)

    @cached_property
    def y(self):
        return np.array([s.y for s in self.studies], dtype=float)

    @cached_property
    def sigma(self):
        return np.array([s.sigma for s in self.studies], dtype=float)

    @property
    def labels(self):
        return [s.label for s in self.studies]

    @property
    def target_index(self):
        for i, s in enumerate(self.studies):
            if s.is_target:
                return i
        return None

    def check_index(self, i):
        if not 0 <= i < self.k:
            raise common.ValidationError(
                MODULE, "study index {} out of range (k = {})"
                .format(i, self.k))

    def without(self, i):
        self.check_index(i)
        rest = self.studies[:i] + self.studies[i + 1:]
        return Dataset(tuple(replace(s, is_target=False) for s in rest),
                       self.effect_scale)

    def with_target(self, label):
        if label not in self.labels:
            raise common.ValidationError(
                MODULE, "target '{}' is not a study label".format(label))
        return Dataset(tuple(replace(s, is_target=(s.label == label))
                             for s in self.studies), self.effect_scale)


def log_odds_ratio(table, correction='HALVES_IF_ANY_ZERO'):
    """
    Woolf log odds ratio of a 2x2 table and its standard deviation
    """

    cells = table.cells()
    if correction == 'HALVES_IF_ANY_ZERO':
        if any(v == 0 for _, v in cells):
            cells = tuple((n, v + 0.5) for n, v in cells)
    elif correction == 'NONE':
        for name, value in cells:
            if value == 0:
                raise common.ValidationError(
                    MODULE, "cell '{}' is zero and no continuity correction "
                    "is applied".format(name))
    else:
        raise common.ValidationError(
            MODULE, "unknown continuity correction '{}'".format(correction))

    a, b, c, d = (v for _, v in cells)
    y = math.log(a) + math.log(d) - math.log(b) - math.log(c)
    sigma = math.sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d)
    return y, sigma


def sigma_from_ci(lower, upper, level=0.95):
    """
    Standard deviation and midpoint behind a symmetric normal CI
    """

    if not 0.0 < level < 1.0:
        raise common.ValidationError(
            MODULE, "CI level must lie in (0, 1) (got {})".format(level))
    if not upper > lower:
        raise common.ValidationError(
            MODULE, "CI upper bound {} must exceed lower bound {}"
            .format(upper, lower))
    z = norm.ppf(0.5 * (1.0 + level))
    return (upper - lower) / (2.0 * z), 0.5 * (upper + lower)


def _is_set(value):
    return value is not None and str(value).strip() != ""


def _number(row_no, column, value):
    try:
        v = float(str(value).strip())
    except ValueError:
        raise common.ValidationError(
            MODULE, "row {}: column '{}' is not a number ({!r})"
            .format(row_no, column, value)) from None
    if not math.isfinite(v):
        raise common.ValidationError(
            MODULE, "row {}: column '{}' is not finite".format(row_no, column))
    return v


def _target_flag(row_no, value):
    t = "" if value is None else str(value).strip().lower()
    if t in _TRUE_FLAGS:
        return True
    if t in _FALSE_FLAGS:
        return False
    raise common.ValidationError(
        MODULE, "row {}: target must be 0 or 1 (got {!r})"
        .format(row_no, value))


def _study_from_row(row_no, row, continuity, ci_level):
    touched = []
    for name, required, optional in INPUT_FORMS:
        if any(_is_set(row.get(c)) for c in required + optional):
            touched.append((name, required))
    if not touched:
        raise common.ValidationError(
            MODULE, "row {}: no input form (y+se | estimate+ci | 2x2 counts) "
            "is filled".format(row_no))
    if len(touched) > 1:
        raise common.ValidationError(
            MODULE, "row {}: several input forms are filled ({})"
            .format(row_no, ", ".join(t[0] for t in touched)))
    form, required = touched[0]
    missing = [c for c in required if not _is_set(row.get(c))]
    if missing:
        raise common.ValidationError(
            MODULE, "row {}: form {} is missing column(s) {}"
            .format(row_no, form, ", ".join(missing)))

    label = "" if row.get("label") is None else str(row.get("label")).strip()
    is_target = _target_flag(row_no, row.get("target"))
    quoted = None
    try:
        if form == "y+se":
            y = _number(row_no, "y", row["y"])
            sigma = _number(row_no, "se", row["se"])
        elif form == "estimate+ci":
            y = _number(row_no, "estimate", row["estimate"])
            lower = _number(row_no, "ci_lower", row["ci_lower"])
            upper = _number(row_no, "ci_upper", row["ci_upper"])
            level = ci_level
            if _is_set(row.get("ci_level")):
                level = _number(row_no, "ci_level", row["ci_level"])
            if not upper > lower:
                raise common.ValidationError(
                    MODULE, "row {}: ci_lower ({}) must be below ci_upper ({})"
                    .format(row_no, lower, upper))
            sigma, midpoint = sigma_from_ci(lower, upper, level)
            common.debug_print("row {}: estimate {} vs CI midpoint {}"
                               .format(row_no, y, midpoint))
            quoted = (lower, upper)
        else:
            table = TwoByTwo(*(_number(row_no, c, row[c])
                               for c in ("a", "b", "c", "d")))
            y, sigma = log_odds_ratio(table, continuity)
        return Study(label, y, sigma, is_target, quoted)
    except common.ValidationError as e:
        if e.message.startswith("row "):
            raise
        raise common.ValidationError(
            MODULE, "row {}: {}".format(row_no, e.message)) from None


def parse_dataset(source, fmt="csv", continuity='HALVES_IF_ANY_ZERO',
                  ci_level=0.95):
    """
    Parse CSV or JSON text into a Dataset

    Rows are numbered from 1 (the first row after the CSV header).
    """

    if fmt == "json":
        try:
            records = json.loads(source) if source.strip() else []
        except json.JSONDecodeError as e:
            raise common.ValidationError(
                MODULE, "invalid JSON: {}".format(e)) from None
        if not isinstance(records, list) or \
           not all(isinstance(r, dict) for r in records):
            raise common.ValidationError(
                MODULE, "JSON input must be an array of objects")
        frame = pd.DataFrame.from_records(records, columns=None) \
            if records else pd.DataFrame()
        frame = frame.astype(object).where(pd.notna(frame), None)
    elif fmt == "csv":
        if not source.strip():
            raise common.ValidationError(MODULE, "no studies")
        try:
            frame = pd.read_csv(io.StringIO(source), dtype=str,
                                keep_default_na=False, skipinitialspace=True)
        except pd.errors.ParserError as e:
            raise common.ValidationError(
                MODULE, "invalid CSV: {}".format(e)) from None
        frame.columns = [str(c).strip() for c in frame.columns]
    else:
        raise common.ValidationError(
            MODULE, "unknown input format '{}'".format(fmt))

    unknown = [c for c in frame.columns if c not in COLUMNS]
    if unknown:
        raise common.ValidationError(
            MODULE, "unknown column(s) {}".format(", ".join(unknown)))
    if frame.empty:
        raise common.ValidationError(MODULE, "no studies")

    studies = []
    for row_no, row in enumerate(frame.to_dict(orient="records"), start=1):
        studies.append(_study_from_row(row_no, row, continuity, ci_level))
    return Dataset(tuple(studies))


def load_dataset(path, continuity='HALVES_IF_ANY_ZERO', ci_level=0.95):
    if not os.path.isfile(path):
        raise common.ValidationError(
            MODULE, "input file not found: {}".format(path))
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise common.ValidationError(
            MODULE, "cannot read {}: {}".format(path, e.strerror)) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise common.ValidationError(
            MODULE, "{}: not valid UTF-8 (byte 0x{:02x} at offset {})"
            .format(path, raw[e.start], e.start)) from None
    fmt = "json" if path.lower().endswith(".json") else "csv"
    common.debug_print("loading {} as {}".format(path, fmt))
    return parse_dataset(text, fmt, continuity, ci_level)
