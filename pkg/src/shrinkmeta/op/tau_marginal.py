# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.stats import halfcauchy, halfnorm

from .. import common
from ..utils import compatibility as compat
from ..utils.props import EnumProperty, FloatProperty, StringProperty
from ..utils.property_class_registry import PropertyClassRegistry
from .nnhm_core import (
    ConditionalMuPosterior,
    conditional_moments,
    log_likelihood_curve,
)


MODULE = "tau-marginal"

INITIAL_NODES = 64
EXTENSION_NODES = 32
TAIL_FRACTION = 1e-6
DEFAULT_TOL = 1e-6
DEFAULT_MAX_NODES = 200000

TAU_ESTIMATE_ITEMS = [
    ('MEDIAN', "median", "Posterior median of tau"),
    ('MODE', "mode", "Posterior mode of tau"),
    ('MEAN', "mean", "Posterior mean of tau"),
]

_KIND_NAMES = {
    'HALF_NORMAL': "half-normal",
    'HALF_CAUCHY': "half-cauchy",
    'JEFFREYS': "jeffreys",
    'UNIFORM': "uniform",
    'IMPROPER_UNIFORM': "improper-uniform",
}


@PropertyClassRegistry()
class _Properties:
    idname = "tau_marginal"

    @classmethod
    def init_props(cls, config):
        config.tau_prior = StringProperty(
            name="tau_prior",
            description="Heterogeneity prior, kind:param "
                        "(half-normal:1.0, half-cauchy:0.5, uniform:0,10, "
                        "jeffreys:0.001,10, improper-uniform)",
            default="half-normal:1.0"
        )
        config.tol = FloatProperty(
            name="tol",
            description="Per-panel tolerance of the adaptive tau grid",
            default=DEFAULT_TOL,
            min=1e-14,
            max=1e-2
        )
        config.tau_estimate = EnumProperty(
            name="tau_estimate",
            description="Reported tau point estimate",
            items=TAU_ESTIMATE_ITEMS,
            default='MEDIAN'
        )

    @classmethod
    def del_props(cls, config):
        del config.tau_prior
        del config.tol
        del config.tau_estimate


@dataclass(frozen=True)
class TauPrior:
    kind: str = 'HALF_NORMAL'
    scale: float = 1.0
    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        if self.kind not in _KIND_NAMES:
            raise common.ValidationError(
                MODULE, "unknown tau prior kind '{}'".format(self.kind))
        if self.kind in ('HALF_NORMAL', 'HALF_CAUCHY'):
            if not (self.scale > 0 and math.isfinite(self.scale)):
                raise common.ValidationError(
                    MODULE, "tau prior scale must be positive (got {})"
                    .format(self.scale))
            object.__setattr__(self, "lower", 0.0)
            object.__setattr__(self, "upper", math.inf)
        elif self.kind == 'JEFFREYS':
            if not (0 < self.lower < self.upper < math.inf):
                raise common.ValidationError(
                    MODULE, "jeffreys tau prior needs 0 < eps < tau_max")
        elif self.kind == 'UNIFORM':
            if not (0 <= self.lower < self.upper < math.inf):
                raise common.ValidationError(
                    MODULE, "uniform tau prior needs 0 <= lower < upper")
        else:
            object.__setattr__(self, "lower", 0.0)
            object.__setattr__(self, "upper", math.inf)

    @property
    def is_proper(self):
        return self.kind != 'IMPROPER_UNIFORM'

    @classmethod
    def parse(cls, text):
        """
        Parse the kind:param grammar of the CLI
        """

        t = str(text).strip().lower()
        name, _, params = t.partition(":")
        kinds = {v: k for k, v in _KIND_NAMES.items()}
        if name not in kinds:
            raise common.ValidationError(
                MODULE, "unknown tau prior '{}'".format(text))
        kind = kinds[name]
        try:
            values = [float(v) for v in params.split(",")] if params else []
        except ValueError:
            raise common.ValidationError(
                MODULE, "invalid tau prior parameters in '{}'"
                .format(text)) from None
        expected = {'HALF_NORMAL': 1, 'HALF_CAUCHY': 1, 'JEFFREYS': 2,
                    'UNIFORM': 2, 'IMPROPER_UNIFORM': 0}[kind]
        if len(values) != expected:
            raise common.ValidationError(
                MODULE, "tau prior '{}' expects {} parameter(s)"
                .format(name, expected))
        if expected == 1:
            return cls(kind, scale=values[0])
        if expected == 2:
            return cls(kind, lower=values[0], upper=values[1])
        return cls(kind)

    def to_string(self):
        name = _KIND_NAMES[self.kind]
        if self.kind in ('HALF_NORMAL', 'HALF_CAUCHY'):
            return "{}:{!r}".format(name, self.scale)
        if self.kind in ('JEFFREYS', 'UNIFORM'):
            return "{}:{!r},{!r}".format(name, self.lower, self.upper)
        return name

    def support(self):
        return self.lower, self.upper

    def log_pdf(self, taus):
        taus = np.asarray(taus, dtype=float)
        inside = (taus >= self.lower) & (taus <= self.upper)
        out = np.full(taus.shape, -np.inf)
        t = taus[inside]
        if self.kind == 'HALF_NORMAL':
            out[inside] = halfnorm.logpdf(t, scale=self.scale)
        elif self.kind == 'HALF_CAUCHY':
            out[inside] = halfcauchy.logpdf(t, scale=self.scale)
        elif self.kind == 'JEFFREYS':
            out[inside] = -np.log(t) - math.log(math.log(self.upper /
                                                         self.lower))
        elif self.kind == 'UNIFORM':
            out[inside] = -math.log(self.upper - self.lower)
        else:
            out[inside] = 0.0
        return out

    def ppf(self, q):
        if self.kind == 'HALF_NORMAL':
            return float(halfnorm.ppf(q, scale=self.scale))
        if self.kind == 'HALF_CAUCHY':
            return float(halfcauchy.ppf(q, scale=self.scale))
        if self.kind == 'JEFFREYS':
            return self.lower * (self.upper / self.lower) ** q
        if self.kind == 'UNIFORM':
            return self.lower + q * (self.upper - self.lower)
        raise common.ValidationError(
            MODULE, "improper tau prior has no quantiles")


@dataclass(frozen=True)
class TauSummary:
    median: float
    mode: float
    mean: float
    lower: float
    upper: float
    level: float

    def estimate(self, which):
        return {'MEDIAN': self.median, 'MODE': self.mode,
                'MEAN': self.mean}[which]


@dataclass(frozen=True)
class TauPosteriorGrid:
    nodes: np.ndarray
    masses: np.ndarray
    density: np.ndarray
    log_evidence: float
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    data: object = None
    mu_prior: object = None
    tau_prior: object = None
    tol: float = None

    @property
    def size(self):
        return self.nodes.shape[0]

    @cached_property
    def conditionals(self):
        """
        Per-node conditional posteriors of mu
        """

        out = []
        for tau, mu_hat, sigma_hat in zip(self.nodes, self.mu_hat,
                                          self.sigma_hat):
            w = 1.0 / (self.data.sigma ** 2 + tau ** 2)
            out.append(ConditionalMuPosterior(float(tau), float(mu_hat),
                                              float(sigma_hat), w,
                                              w / w.sum()))
        return tuple(out)

    @cached_property
    def cdf(self):
        if self.size == 1:
            return np.ones(1)
        c = cumulative_trapezoid(self.density, self.nodes, initial=0.0)
        return c / c[-1]

    def quantile(self, p):
        if self.size == 1:
            return float(self.nodes[0])
        return float(np.interp(p, self.cdf, self.nodes))

    def restricted(self, j):
        """
        Single-node grid at node j
        """

        return TauPosteriorGrid.point_mass(self.data, self.mu_prior,
                                           float(self.nodes[j]))

    @classmethod
    def point_mass(cls, data, mu_prior, tau):
        mu_hat, sigma_hat = conditional_moments(data.y, data.sigma, [tau],
                                                mu_prior)
        ll = log_likelihood_curve(data.y, data.sigma, [tau], mu_prior)
        return cls(nodes=np.array([float(tau)]), masses=np.ones(1),
                   density=np.ones(1), log_evidence=float(ll[0]),
                   mu_hat=mu_hat, sigma_hat=sigma_hat, data=data,
                   mu_prior=mu_prior)

    @classmethod
    def from_log_density(cls, nodes, log_density, data=None, mu_prior=None,
                         tau_prior=None, tol=None):
        """
        Normalized grid from unnormalized log density values at the nodes
        """

        nodes = np.asarray(nodes, dtype=float)
        log_density = np.asarray(log_density, dtype=float)
        if nodes.ndim != 1 or nodes.shape != log_density.shape:
            raise common.ValidationError(
                MODULE, "nodes and log densities must be matching 1-d arrays")
        if nodes.shape[0] > 1 and np.any(np.diff(nodes) <= 0):
            raise common.ValidationError(
                MODULE, "grid nodes must be strictly increasing")
        ref = np.max(log_density)
        if not math.isfinite(ref):
            raise common.NumericalError(
                MODULE, "posterior density of tau vanishes on the grid")
        f = np.exp(log_density - ref)
        if nodes.shape[0] == 1:
            masses = np.ones(1)
            z = 1.0
        else:
            h = np.diff(nodes)
            widths = np.zeros_like(nodes)
            widths[:-1] += 0.5 * h
            widths[1:] += 0.5 * h
            masses = f * widths
            z = masses.sum()
            masses = masses / z
        if data is not None:
            mu_hat, sigma_hat = conditional_moments(data.y, data.sigma,
                                                    nodes, mu_prior)
        else:
            mu_hat = sigma_hat = np.full(nodes.shape, np.nan)
        return cls(nodes=nodes, masses=masses, density=f / z,
                   log_evidence=float(ref + math.log(z)), mu_hat=mu_hat,
                   sigma_hat=sigma_hat, data=data, mu_prior=mu_prior,
                   tau_prior=tau_prior, tol=tol)

    def to_dict(self):
        return {
            "nodes": [float(v) for v in self.nodes],
            "masses": [float(v) for v in self.masses],
        }


def _check_propriety(data, mu_prior, tau_prior):
    if tau_prior.is_proper:
        return
    needed = 3 if mu_prior.is_uniform else 2
    if data.k < needed:
        raise common.ValidationError(
            MODULE, "improper posterior: an improper tau prior needs at "
            "least {} studies with a {} mu prior (k = {}); the likelihood "
            "does not decay fast enough in tau".format(
                needed, "uniform" if mu_prior.is_uniform else "normal",
                data.k))


def _initial_upper(data, tau_prior):
    hi = 10.0 * float(np.max(data.sigma))
    if tau_prior.is_proper:
        hi = max(hi, tau_prior.ppf(0.9999))
    if math.isfinite(tau_prior.upper):
        hi = tau_prior.upper
    return hi


def tau_posterior(data, mu_prior, tau_prior, tol=DEFAULT_TOL,
                  max_nodes=DEFAULT_MAX_NODES):
    """
    Adaptive trapezoid grid of the marginal posterior of tau

    Starts from 64 nodes on [lower, tau_hi], doubles tau_hi while the tail
    bound f(tau_hi) * tau_hi exceeds 1e-6 of the mass, then bisects every
    panel whose trapezoid and two-panel trapezoid disagree by more than
    tol times the total mass.
    """

    _check_propriety(data, mu_prior, tau_prior)
    if not tol > 0:
        raise common.ValidationError(MODULE, "tol must be positive")

    def log_f(t):
        return (log_likelihood_curve(data.y, data.sigma, t, mu_prior)
                + tau_prior.log_pdf(t))

    lo, upper = tau_prior.support()
    hi = _initial_upper(data, tau_prior)
    nodes = np.linspace(lo, hi, INITIAL_NODES)
    logf = log_f(nodes)
    if not np.any(np.isfinite(logf)):
        raise common.NumericalError(
            MODULE, "log posterior of tau is not finite on [{}, {}]"
            .format(lo, hi))

    while hi < upper:
        ref = np.max(logf)
        f = np.exp(logf - ref)
        z = compat.trapezoid(f, nodes)
        if f[-1] * hi <= TAIL_FRACTION * z:
            break
        new_hi = min(2.0 * hi, upper)
        ext = np.linspace(hi, new_hi, EXTENSION_NODES + 1)[1:]
        nodes = np.concatenate([nodes, ext])
        logf = np.concatenate([logf, log_f(ext)])
        hi = new_hi
        if nodes.shape[0] > max_nodes:
            raise common.NumericalError(
                MODULE, "tail of the tau posterior not bounded within {} "
                "nodes".format(max_nodes))
    common.debug_print("tau grid upper bound: {}".format(hi))

    while True:
        ref = np.max(logf)
        f = np.exp(logf - ref)
        z = compat.trapezoid(f, nodes)
        h = np.diff(nodes)
        mids = nodes[:-1] + 0.5 * h
        logf_mid = log_f(mids)
        f_mid = np.exp(logf_mid - ref)
        coarse = 0.5 * h * (f[:-1] + f[1:])
        fine = 0.25 * h * (f[:-1] + 2.0 * f_mid + f[1:])
        split = np.abs(coarse - fine) > tol * z
        if not np.any(split):
            break
        if nodes.shape[0] + int(split.sum()) > max_nodes:
            raise common.NumericalError(
                MODULE, "tau grid refinement exceeded {} nodes (tol = {})"
                .format(max_nodes, tol))
        nodes = np.concatenate([nodes, mids[split]])
        logf = np.concatenate([logf, logf_mid[split]])
        order = np.argsort(nodes, kind="stable")
        nodes = nodes[order]
        logf = logf[order]

    common.debug_print("tau grid: {} nodes on [{}, {}]"
                       .format(nodes.shape[0], nodes[0], nodes[-1]))
    return TauPosteriorGrid.from_log_density(nodes, logf, data, mu_prior,
                                             tau_prior, tol)


def _mode(grid):
    j = int(np.argmax(grid.density))     # first maximum: smaller tau wins
    if j == 0 or j == grid.size - 1:
        return float(grid.nodes[j])
    x0, x1, x2 = grid.nodes[j - 1:j + 2]
    f0, f1, f2 = grid.density[j - 1:j + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (f1 - f0) + x1 * (f0 - f2) + x0 * (f2 - f1)) / denom
    b = (x2 ** 2 * (f0 - f1) + x1 ** 2 * (f2 - f0) +
         x0 ** 2 * (f1 - f2)) / denom
    if a >= 0:
        return float(x1)
    return float(min(max(-b / (2.0 * a), x0), x2))


def tau_summaries(grid, level=0.95):
    if not 0.0 < level < 1.0:
        raise common.ValidationError(
            MODULE, "level must lie in (0, 1) (got {})".format(level))
    if grid.size == 1:
        t = float(grid.nodes[0])
        return TauSummary(t, t, t, t, t, level)
    alpha = 1.0 - level
    mean = compat.trapezoid(grid.nodes * grid.density, grid.nodes) / \
        compat.trapezoid(grid.density, grid.nodes)
    return TauSummary(median=grid.quantile(0.5),
                      mode=_mode(grid),
                      mean=float(mean),
                      lower=grid.quantile(0.5 * alpha),
                      upper=grid.quantile(1.0 - 0.5 * alpha),
                      level=level)
