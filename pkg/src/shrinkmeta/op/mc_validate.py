# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import math
import sys

import numpy as np
from scipy.stats import halfcauchy, halfnorm, norm

from .. import common
from ..utils.command_registry import Command, CommandRegistry
from ..utils.props import (
    FloatProperty,
    IntProperty,
    StringCollectionProperty,
    StringProperty,
)
from .effect_ingest import Dataset, Study, load_dataset
from .mixture_posteriors import (
    IntervalSpec,
    map_predictive,
    marginal_mu,
    marginal_theta,
)
from .nnhm_core import MuPrior
from .tau_marginal import TauPrior, tau_posterior, tau_summaries


MODULE = "mc-validate"

TARGETS = ("mu", "theta_target", "theta_new")
BAND_SES = 4.0
MIN_ORACLE_RESOLUTION = 10001


@dataclass(frozen=True)
class SimConfig:
    k: int = 5
    mu_true: float = 0.0
    tau_true: float = 0.5
    sigma_fixed: tuple = (0.3,)
    sigma_range: tuple = None
    replications: int = 2000
    seed: int = 42
    level: float = 0.95

    def __post_init__(self):
        if self.k < 1:
            raise common.ValidationError(MODULE, "k must be >= 1")
        if not (self.tau_true >= 0 and math.isfinite(self.tau_true)):
            raise common.ValidationError(
                MODULE, "tau_true must be finite and >= 0")
        if not math.isfinite(self.mu_true):
            raise common.ValidationError(MODULE, "mu_true must be finite")
        if self.replications < 1:
            raise common.ValidationError(MODULE, "replications must be >= 1")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise common.ValidationError(
                MODULE, "seed must be a 64-bit unsigned integer")
        if not 0.0 < self.level < 1.0:
            raise common.ValidationError(MODULE, "level must lie in (0, 1)")
        if self.sigma_range is not None:
            object.__setattr__(self, "sigma_fixed", None)
            lo, hi = self.sigma_range
            if not 0 < lo < hi < math.inf:
                raise common.ValidationError(
                    MODULE, "sigma range needs 0 < lower < upper")
        else:
            if not self.sigma_fixed:
                raise common.ValidationError(
                    MODULE, "sigma law needs fixed values or a range")
            object.__setattr__(self, "sigma_fixed",
                               tuple(float(s) for s in self.sigma_fixed))
            if any(not (s > 0 and math.isfinite(s))
                   for s in self.sigma_fixed):
                raise common.ValidationError(
                    MODULE, "fixed sigmas must be positive and finite")

    def to_dict(self):
        return asdict(self)


def _generator(cfg, rep):
    # one independent stream per replication
    return np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(rep,)))


def _draw(cfg, rep):
    rng = _generator(cfg, rep)
    if cfg.sigma_range is not None:
        lo, hi = cfg.sigma_range
        sigma = np.exp(rng.uniform(math.log(lo), math.log(hi), cfg.k))
    else:
        sigma = np.resize(np.asarray(cfg.sigma_fixed, dtype=float), cfg.k)
    theta = cfg.mu_true + cfg.tau_true * rng.standard_normal(cfg.k)
    y = theta + sigma * rng.standard_normal(cfg.k)
    theta_new = cfg.mu_true + cfg.tau_true * rng.standard_normal()
    studies = tuple(Study("sim-{}".format(i + 1), float(y[i]),
                          float(sigma[i]), is_target=(i == cfg.k - 1))
                    for i in range(cfg.k))
    return Dataset(studies), theta, float(theta_new)


def simulate_dataset(cfg, rep):
    """
    One NNHM dataset; the last study is the target
    """

    if rep < 0:
        raise common.ValidationError(MODULE, "replication index must be >= 0")
    return _draw(cfg, rep)[0]


def _contains(interval, value):
    return bool(interval[0] <= value <= interval[1])


def _replicate(job):
    cfg, rep, mu_prior, tau_prior, tol, method = job
    data, theta, theta_new = _draw(cfg, rep)
    grid = tau_posterior(data, mu_prior, tau_prior, tol)
    spec = IntervalSpec(cfg.level, method)
    return (
        _contains(marginal_mu(grid).interval(spec), cfg.mu_true),
        _contains(marginal_theta(grid, data.k - 1).interval(spec),
                  float(theta[-1])),
        _contains(map_predictive(grid).interval(spec), theta_new),
    )


@dataclass(frozen=True)
class CoverageReport:
    config: SimConfig
    indicators: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    @property
    def replications(self):
        return len(self.indicators[TARGETS[0]])

    def coverage(self, target):
        return float(np.mean(self.indicators[target]))

    def standard_error(self, target):
        c = self.coverage(target)
        return math.sqrt(c * (1.0 - c) / self.replications)

    def band(self):
        """
        Acceptance band of +-4 binomial SEs around the nominal level
        """

        lv = self.config.level
        se = math.sqrt(lv * (1.0 - lv) / self.replications)
        return max(lv - BAND_SES * se, 0.0), min(lv + BAND_SES * se, 1.0)

    def within_band(self, target):
        lo, hi = self.band()
        return lo <= self.coverage(target) <= hi

    def to_dict(self):
        lo, hi = self.band()
        return {
            "schema_version": 1,
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "settings": dict(self.settings),
            "replications": self.replications,
            "band": [lo, hi],
            "coverage": {
                t: {
                    "coverage": self.coverage(t),
                    "se": self.standard_error(t),
                    "within_band": self.within_band(t),
                } for t in TARGETS
            },
        }


def coverage_study(cfg, mu_prior, tau_prior, tol=1e-6, method='SHORTEST',
                   workers=1):
    """
    Interval coverage of mu, the target's theta and a new study's theta
    """

    if workers < 1:
        raise common.ValidationError(MODULE, "workers must be >= 1")
    jobs = [(cfg, rep, mu_prior, tau_prior, tol, method)
            for rep in range(cfg.replications)]
    if workers == 1 or cfg.replications == 1:
        results = [_replicate(j) for j in jobs]
    else:
        chunk = max(1, cfg.replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_replicate, jobs, chunksize=chunk))
    indicators = {t: tuple(r[n] for r in results)
                  for n, t in enumerate(TARGETS)}
    common.debug_print("coverage: {}".format(
        {t: sum(v) for t, v in indicators.items()}))
    return CoverageReport(cfg, indicators, {
        "mu_prior": mu_prior.to_string(),
        "tau_prior": tau_prior.to_string(),
        "tol": tol,
        "interval": method.lower(),
    })


class _OracleMixture:
    """
    Normal mixture CDF evaluated directly with scipy.stats
    """

    def __init__(self, weights, means, sds):
        self.weights = weights
        self.means = means
        self.sds = sds

    def cdf(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        for j, v in enumerate(x):
            out[j] = np.dot(self.weights, norm.cdf(v, self.means, self.sds))
        return out

    @property
    def mean(self):
        return float(np.dot(self.weights, self.means))


@dataclass(frozen=True)
class OracleResult:
    nodes: np.ndarray
    masses: np.ndarray
    mu: _OracleMixture
    thetas: tuple
    tau_median: float
    tau_mean: float
    tau_hi: float


def _oracle_log_prior(tau_prior, taus):
    kind = tau_prior.kind
    if kind == 'HALF_NORMAL':
        return halfnorm.logpdf(taus, scale=tau_prior.scale)
    if kind == 'HALF_CAUCHY':
        return halfcauchy.logpdf(taus, scale=tau_prior.scale)
    if kind == 'JEFFREYS':
        return -np.log(taus)
    return np.zeros_like(taus)


def _oracle_tau_hi(data, tau_prior):
    if math.isfinite(tau_prior.upper):
        return tau_prior.upper
    hi = 10.0 * float(np.max(data.sigma))
    if tau_prior.is_proper:
        hi = max(hi, tau_prior.ppf(0.9999))
    return hi


def dense_grid_oracle(data, mu_prior, tau_prior, resolution=100001,
                      tau_hi=None, studies=None):
    """
    Posterior quantities on a fixed uniform tau grid with trapezoid weights

    Shares only the Dataset and prior types with the adaptive pipeline.
    """

    if resolution < MIN_ORACLE_RESOLUTION:
        raise common.ValidationError(
            MODULE, "oracle resolution must be >= {}"
            .format(MIN_ORACLE_RESOLUTION))
    if tau_hi is None:
        tau_hi = _oracle_tau_hi(data, tau_prior)
    taus = np.linspace(tau_prior.lower, tau_hi, resolution)
    y, s2 = data.y, data.sigma ** 2

    # mu integrated out: p(y | tau) = prod N(y_i; m, v_i) * N(m; prior) /
    # N(m; posterior) for any m, evaluated at the posterior mean
    v = s2[None, :] + taus[:, None] ** 2
    prec = np.sum(1.0 / v, axis=1)
    num = np.sum(y[None, :] / v, axis=1)
    if not mu_prior.is_uniform:
        prec = prec + 1.0 / mu_prior.sigma_p ** 2
        num = num + mu_prior.mu_p / mu_prior.sigma_p ** 2
    post_mean = num / prec
    post_sd = 1.0 / np.sqrt(prec)
    loglik = np.sum(norm.logpdf(y[None, :], post_mean[:, None], np.sqrt(v)),
                    axis=1) - norm.logpdf(post_mean, post_mean, post_sd)
    if not mu_prior.is_uniform:
        loglik = loglik + norm.logpdf(post_mean, mu_prior.mu_p,
                                      mu_prior.sigma_p)

    logp = loglik + _oracle_log_prior(tau_prior, taus)
    dens = np.exp(logp - np.max(logp))
    h = taus[1] - taus[0]
    trap = np.full(resolution, h)
    trap[0] = trap[-1] = 0.5 * h
    masses = dens * trap
    masses = masses / masses.sum()

    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (dens[1:] + dens[:-1]))])
    cum = cum / cum[-1]
    tau_median = float(np.interp(0.5, cum, taus))
    tau_mean = float(np.sum(masses * taus))

    thetas = []
    for i in (range(data.k) if studies is None else studies):
        frac = taus ** 2 / (taus ** 2 + s2[i])
        means = post_mean + frac * (y[i] - post_mean)
        var = frac * s2[i] + ((1.0 - frac) * post_sd) ** 2
        thetas.append(_OracleMixture(masses, means, np.sqrt(var)))

    return OracleResult(nodes=taus, masses=masses,
                        mu=_OracleMixture(masses, post_mean, post_sd),
                        thetas=tuple(thetas), tau_median=tau_median,
                        tau_mean=tau_mean, tau_hi=float(tau_hi))


@dataclass(frozen=True)
class OracleComparison:
    mu_sup: float
    theta_sup: float
    tau_median_diff: float
    tau_mean_diff: float
    tau_hi: float
    adaptive_nodes: int

    def passes(self, cdf_tol=1e-4, tau_rel_tol=1e-4):
        return (self.mu_sup < cdf_tol and self.theta_sup < cdf_tol and
                self.tau_median_diff < tau_rel_tol * self.tau_hi)

    def to_dict(self):
        d = asdict(self)
        d["passes"] = self.passes()
        return d


def _sup_distance(adaptive, oracle, probes):
    center, spread = adaptive.mean, adaptive.sd
    xs = np.linspace(center - 8.0 * spread, center + 8.0 * spread, probes)
    return float(np.max(np.abs(adaptive.cdf(xs) - oracle.cdf(xs))))


def compare_with_oracle(data, mu_prior, tau_prior, tol=1e-6,
                        resolution=100001, probes=201, studies=None):
    """
    Sup-distances of the mu and theta_i posterior CDFs and the tau median
    difference between the adaptive grid and the dense oracle
    """

    grid = tau_posterior(data, mu_prior, tau_prior, tol)
    studies = tuple(range(data.k)) if studies is None else tuple(studies)
    oracle = dense_grid_oracle(data, mu_prior, tau_prior, resolution,
                               tau_hi=float(grid.nodes[-1]), studies=studies)
    summary = tau_summaries(grid)
    mu_sup = _sup_distance(marginal_mu(grid), oracle.mu, probes)
    theta_sup = 0.0
    for i, om in zip(studies, oracle.thetas):
        theta_sup = max(theta_sup,
                        _sup_distance(marginal_theta(grid, i), om, probes))
    return OracleComparison(
        mu_sup=mu_sup, theta_sup=theta_sup,
        tau_median_diff=abs(summary.median - oracle.tau_median),
        tau_mean_diff=abs(summary.mean - oracle.tau_mean),
        tau_hi=oracle.tau_hi, adaptive_nodes=grid.size)


def _parse_floats(module, name, text):
    try:
        values = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise common.ValidationError(
            module, "{} expects comma separated numbers (got '{}')"
            .format(name, text)) from None
    if not values:
        raise common.ValidationError(
            module, "{} needs at least one value".format(name))
    return values


def _emit(text, out):
    if out:
        common.atomic_write(out, text)
    else:
        sys.stdout.write(text)


@CommandRegistry()
class SHM_OT_Simulate(Command):
    """
    Coverage simulation under the NNHM
    """

    idname = "simulate"
    label = "Simulate"
    description = "Measure interval coverage on simulated datasets"
    use_analysis_config = True

    k = IntProperty(name="k", description="Studies per dataset", default=5,
                    min=1)
    mu = FloatProperty(name="mu", description="True overall effect",
                       default=0.0)
    tau = FloatProperty(name="tau", description="True heterogeneity sd",
                        default=0.5, min=0.0)
    sigma = StringProperty(
        name="sigma",
        description="Fixed sampling sds, comma separated (cycled to k)",
        default="0.3")
    sigma_range = StringProperty(
        name="sigma_range",
        description="Log-uniform sampling sd range 'lo,hi' "
                    "(replaces --sigma)",
        default="")
    reps = IntProperty(name="reps", description="Replications",
                       default=2000, min=1)
    seed = IntProperty(name="seed", description="Seed of the generator",
                       default=42, min=0)
    workers = IntProperty(name="workers", description="Worker processes",
                          default=1, min=1)
    out = StringProperty(name="out",
                         description="Coverage JSON path (default: stdout)",
                         default="")

    def execute(self, args):
        if args.out:
            common.check_output_path(args.out)
        sigma_range = None
        if args.sigma_range:
            sigma_range = _parse_floats(MODULE, "--sigma-range",
                                        args.sigma_range)
            if len(sigma_range) != 2:
                raise common.ValidationError(
                    MODULE, "--sigma-range expects 'lo,hi'")
        cfg = SimConfig(k=args.k, mu_true=args.mu, tau_true=args.tau,
                        sigma_fixed=_parse_floats(MODULE, "--sigma",
                                                  args.sigma),
                        sigma_range=sigma_range, replications=args.reps,
                        seed=args.seed, level=self.config.level)
        report = coverage_study(cfg, MuPrior.parse(self.config.mu_prior),
                                TauPrior.parse(self.config.tau_prior),
                                self.config.tol, self.config.interval,
                                args.workers)
        _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
              args.out)
        for t in TARGETS:
            if not report.within_band(t):
                self.report({'WARNING'},
                            "{} coverage {:.3f} outside [{:.3f}, {:.3f}]"
                            .format(t, report.coverage(t), *report.band()))
        return {'FINISHED'}


@CommandRegistry()
class SHM_OT_OracleCheck(Command):
    """
    Adaptive pipeline against the dense-grid oracle
    """

    idname = "oracle-check"
    label = "Oracle Check"
    description = "Compare the adaptive posterior with a dense-grid oracle"
    use_analysis_config = True

    input = StringCollectionProperty(name="input",
                                     description="Dataset file (CSV/JSON)")
    resolution = IntProperty(name="resolution",
                             description="Oracle grid nodes",
                             default=100001, min=MIN_ORACLE_RESOLUTION)
    out = StringProperty(name="out",
                         description="Comparison JSON path (default: stdout)",
                         default="")

    def execute(self, args):
        if not args.input:
            raise common.ValidationError(MODULE, "--input is required")
        if args.out:
            common.check_output_path(args.out)
        mu_prior = MuPrior.parse(self.config.mu_prior)
        tau_prior = TauPrior.parse(self.config.tau_prior)
        results = {}
        failed = False
        for path in args.input:
            data = load_dataset(path, self.config.continuity,
                                self.config.ci_level)
            cmp = compare_with_oracle(data, mu_prior, tau_prior,
                                      self.config.tol, args.resolution)
            results[path] = cmp.to_dict()
            if not cmp.passes():
                failed = True
                self.report({'WARNING'},
                            "{}: oracle disagreement (mu {:.2e}, theta {:.2e})"
                            .format(path, cmp.mu_sup, cmp.theta_sup))
        _emit(json.dumps(results, indent=2, sort_keys=True) + "\n", args.out)
        if failed:
            raise common.NumericalError(
                MODULE, "adaptive posterior disagrees with the oracle")
        return {'FINISHED'}
