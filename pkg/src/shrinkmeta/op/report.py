# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import json
import os
import sys

from scipy.stats import norm

from .. import common
from ..ui import forest_svg, forest_text
from ..utils.command_registry import Command, CommandRegistry
from ..utils.props import (
    EnumProperty,
    StringCollectionProperty,
    StringProperty,
)
from ..utils.property_class_registry import PropertyClassRegistry
from .effect_ingest import load_dataset
from .mixture_posteriors import (
    IntervalSpec,
    map_predictive,
    map_update_discrepancy,
    marginal_mu,
    marginal_theta,
    posterior_averaged_weight,
)
from .nnhm_core import MuPrior, shrinkage_weight
from .tau_marginal import TauPrior, tau_posterior, tau_summaries


MODULE = "report-cli"

SCHEMA_VERSION = 1

FOREST_FORMAT_ITEMS = [
    ('SVG', "svg", "SVG 1.1 document"),
    ('TEXT', "text", "Monospace text, 100 columns"),
]


@PropertyClassRegistry()
class _Properties:
    idname = "report"

    @classmethod
    def init_props(cls, config):
        config.xlim = StringProperty(
            name="xlim",
            description="Forest plot range on the log-OR scale 'lo,hi' "
                        "(default: fitted to the estimates)",
            default=""
        )

    @classmethod
    def del_props(cls, config):
        del config.xlim


@dataclass(frozen=True)
class StudyRow:
    index: int
    label: str
    y: float
    sigma: float
    lower: float
    upper: float
    is_target: bool

    def to_dict(self):
        return {"label": self.label, "y": self.y, "sigma": self.sigma,
                "interval": [self.lower, self.upper],
                "is_target": self.is_target}


@dataclass(frozen=True)
class ShrinkageRow:
    index: int
    label: str
    mean: float
    sd: float
    lower: float
    upper: float
    is_target: bool

    def to_dict(self):
        return {"label": self.label, "mean": self.mean, "sd": self.sd,
                "interval": [self.lower, self.upper],
                "is_target": self.is_target}


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    lower: float
    upper: float

    @classmethod
    def of(cls, mixture, spec):
        lo, hi = mixture.interval(spec)
        return cls(mixture.mean, mixture.sd, lo, hi)

    def to_dict(self):
        return {"mean": self.mean, "sd": self.sd,
                "interval": [self.lower, self.upper]}


@dataclass(frozen=True)
class TargetWeight:
    study_index: int
    label: str
    tau: float
    plug_in: object
    averaged: float
    note: str
    map_update: object

    def to_dict(self):
        d = {"study_index": self.study_index, "label": self.label,
             "tau": self.tau, "note": self.note}
        if self.plug_in is not None:
            d["plug_in"] = {"direct": self.plug_in.direct,
                            "indirect": self.plug_in.indirect,
                            "total": self.plug_in.total}
        if self.averaged is not None:
            d["posterior_averaged"] = self.averaged
        if self.map_update is not None:
            d["map_update"] = self.map_update.to_dict()
        return d


@dataclass(frozen=True)
class AnalysisReport:
    studies: tuple
    shrinkage: tuple
    mu: Summary
    prediction: Summary
    tau: object
    tau_estimate: float
    weight: TargetWeight
    config: dict
    grid: object
    mu_mixture: object
    prediction_mixture: object

    @property
    def k(self):
        return len(self.studies)

    @property
    def level(self):
        return self.config["level"]

    def to_dict(self):
        d = {
            "schema_version": SCHEMA_VERSION,
            "config": dict(self.config),
            "studies": [r.to_dict() for r in self.studies],
            "shrinkage": [r.to_dict() for r in self.shrinkage],
            "mu": dict(self.mu.to_dict(), mixture=self.mu_mixture.to_dict()),
            "prediction": dict(self.prediction.to_dict(),
                               mixture=self.prediction_mixture.to_dict()),
            "tau": {
                "estimate": self.tau_estimate,
                "estimate_kind": self.config["tau_estimate"].lower(),
                "median": self.tau.median,
                "mode": self.tau.mode,
                "mean": self.tau.mean,
                "interval": [self.tau.lower, self.tau.upper],
            },
            "grid": dict(self.grid.to_dict(),
                         log_evidence=self.grid.log_evidence),
        }
        if self.weight is not None:
            d["weight"] = self.weight.to_dict()
        _check_finite_tree(d, "report")
        return d


def _check_finite_tree(node, path):
    if isinstance(node, dict):
        for key, value in node.items():
            _check_finite_tree(value, "{}.{}".format(path, key))
    elif isinstance(node, (list, tuple)):
        for n, value in enumerate(node):
            _check_finite_tree(value, "{}[{}]".format(path, n))
    elif isinstance(node, float):
        common.check_finite(MODULE, path, node)


def _display_label(study, i):
    return study.label if study.label else str(i + 1)


def _quoted_interval(study, level):
    if study.quoted_ci is not None:
        return study.quoted_ci
    z = norm.ppf(0.5 * (1.0 + level))
    return study.y - z * study.sigma, study.y + z * study.sigma


def _target_weight(data, grid, mu_prior, tau_prior, tau_hat, config, spec):
    i = data.target_index
    label = _display_label(data.studies[i], i)
    if not mu_prior.is_uniform:
        return TargetWeight(i, label, tau_hat, None, None,
                            "decomposition defined for uniform prior only",
                            None)
    plug_in = shrinkage_weight(data, i, tau_hat, mu_prior)
    averaged = posterior_averaged_weight(grid, i)
    note = "posterior-averaged weight differs from plug-in by {:+.3f}" \
        .format(averaged - plug_in.total)
    map_update = None
    if data.k >= 2:
        try:
            map_update = map_update_discrepancy(data, mu_prior, tau_prior, i,
                                                config.tol, spec,
                                                full_grid=grid)
        except common.ValidationError as e:
            common.warn(MODULE, "MAP update comparison skipped: {}"
                        .format(e.message))
    return TargetWeight(i, label, tau_hat, plug_in, averaged, note,
                        map_update)


def run_analysis(data, config):
    """
    tau posterior, mixtures and intervals of one dataset
    """

    if config.target:
        data = data.with_target(config.target)
    mu_prior = MuPrior.parse(config.mu_prior)
    tau_prior = TauPrior.parse(config.tau_prior)
    spec = IntervalSpec(config.level, config.interval)

    grid = tau_posterior(data, mu_prior, tau_prior, config.tol)
    tau = tau_summaries(grid, config.level)
    tau_hat = tau.estimate(config.tau_estimate)

    studies = []
    shrinkage = []
    for i, s in enumerate(data.studies):
        label = _display_label(s, i)
        lo, hi = _quoted_interval(s, config.level)
        studies.append(StudyRow(i, label, s.y, s.sigma, float(lo), float(hi),
                                s.is_target))
        theta = Summary.of(marginal_theta(grid, i), spec)
        shrinkage.append(ShrinkageRow(i, label, theta.mean, theta.sd,
                                      theta.lower, theta.upper, s.is_target))

    mu_mixture = marginal_mu(grid)
    pred_mixture = map_predictive(grid)

    weight = None
    if data.target_index is None:
        common.warn(MODULE, "no target study flagged; weight section omitted")
    else:
        weight = _target_weight(data, grid, mu_prior, tau_prior, tau_hat,
                                config, spec)

    return AnalysisReport(
        studies=tuple(studies), shrinkage=tuple(shrinkage),
        mu=Summary.of(mu_mixture, spec),
        prediction=Summary.of(pred_mixture, spec),
        tau=tau, tau_estimate=tau_hat, weight=weight,
        config=config.to_dict(), grid=grid, mu_mixture=mu_mixture,
        prediction_mixture=pred_mixture)


def report_to_json(report, extra=None):
    d = report.to_dict()
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def parse_xlim(text):
    if not text:
        return None
    try:
        lo, hi = (float(v) for v in str(text).split(","))
    except ValueError:
        raise common.ValidationError(
            MODULE, "xlim expects 'lo,hi' (got '{}')".format(text)) from None
    if not hi > lo:
        raise common.ValidationError(MODULE, "xlim upper must exceed lower")
    return lo, hi


def render_forest(report, fmt='SVG'):
    xlim = parse_xlim(report.config.get("xlim", ""))
    if fmt == 'SVG':
        return forest_svg.render(report, xlim)
    if fmt == 'TEXT':
        return forest_text.render(report, xlim)
    raise common.ValidationError(
        MODULE, "unknown forest format '{}'".format(fmt))


def output_path(path, input_path, several):
    """
    Insert the input's stem before the extension when analyzing several
    inputs
    """

    if not several:
        return path
    root, ext = os.path.splitext(path)
    stem = os.path.splitext(os.path.basename(input_path))[0]
    return "{}-{}{}".format(root, stem, ext)


@CommandRegistry()
class SHM_OT_Analyze(Command):
    """
    Full analysis of one or more datasets
    """

    idname = "analyze"
    label = "Analyze"
    description = "Posterior analysis, JSON report and forest plot"
    use_analysis_config = True

    input = StringCollectionProperty(
        name="input", description="Dataset file, CSV or JSON (repeatable)")
    out = StringProperty(name="out",
                         description="JSON report path (default: stdout)",
                         default="")
    forest = StringProperty(name="forest", description="Forest plot path",
                            default="")
    forest_format = EnumProperty(name="forest_format",
                                 description="Forest plot format",
                                 items=FOREST_FORMAT_ITEMS, default='SVG')
    table = StringProperty(name="table",
                           description="Plain-text summary table path",
                           default="")

    def _analyze(self, path):
        with common.collect_warnings() as caught:
            data = load_dataset(path, self.config.continuity,
                                self.config.ci_level)
            report = run_analysis(data, self.config)
        return report, caught

    def execute(self, args):
        if not args.input:
            raise common.ValidationError(MODULE, "--input is required")
        inputs = list(args.input)
        several = len(inputs) > 1
        for option in (args.out, args.forest, args.table):
            if option:
                for path in inputs:
                    common.check_output_path(
                        output_path(option, path, several))
        with ThreadPoolExecutor(max_workers=min(len(inputs), 4)) as executor:
            results = list(executor.map(self._analyze, inputs))

        to_stdout = not (args.out or args.forest or args.table)
        for path, (report, caught) in zip(inputs, results):
            for message in caught:
                self.report({'WARNING'}, "{}: {}".format(path, message))
            text = report_to_json(report, {"input": path})
            if args.out:
                common.atomic_write(output_path(args.out, path, several),
                                    text)
            elif to_stdout:
                sys.stdout.write(text)
            if args.forest:
                common.atomic_write(output_path(args.forest, path, several),
                                    render_forest(report, args.forest_format))
            if args.table:
                common.atomic_write(output_path(args.table, path, several),
                                    forest_text.render_table(report))
            self.report({'INFO'}, "{}: k = {}, mu = {:.3f}, tau = {:.3f}"
                        .format(path, report.k, report.mu.mean,
                                report.tau_estimate))
        return {'FINISHED'}
