# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

from dataclasses import dataclass
import math

import numpy as np

from .. import common
from ..utils.props import StringProperty
from ..utils.property_class_registry import PropertyClassRegistry


MODULE = "nnhm-core"

LOG_2PI = math.log(2.0 * math.pi)


@PropertyClassRegistry()
class _Properties:
    idname = "nnhm_core"

    @classmethod
    def init_props(cls, config):
        config.mu_prior = StringProperty(
            name="mu_prior",
            description="Prior of the overall effect: uniform | normal:m,s",
            default="uniform"
        )

    @classmethod
    def del_props(cls, config):
        del config.mu_prior


@dataclass(frozen=True)
class MuPrior:
    kind: str = 'UNIFORM'
    mu_p: float = 0.0
    sigma_p: float = None

    def __post_init__(self):
        if self.kind not in ('UNIFORM', 'NORMAL'):
            raise common.ValidationError(
                MODULE, "unknown mu prior kind '{}'".format(self.kind))
        if self.kind == 'NORMAL':
            if not math.isfinite(self.mu_p):
                raise common.ValidationError(
                    MODULE, "normal mu prior needs a finite mean")
            if self.sigma_p is None or not self.sigma_p > 0 or \
               not math.isfinite(self.sigma_p):
                raise common.ValidationError(
                    MODULE, "normal mu prior needs a positive finite sd")

    @property
    def is_uniform(self):
        return self.kind == 'UNIFORM'

    @classmethod
    def parse(cls, text):
        """
        Parse 'uniform' or 'normal:m,s'
        """

        t = str(text).strip().lower()
        if t == "uniform":
            return cls('UNIFORM')
        kind, _, params = t.partition(":")
        if kind == "normal":
            try:
                m, s = (float(v) for v in params.split(","))
            except ValueError:
                raise common.ValidationError(
                    MODULE, "normal mu prior expects 'normal:m,s' (got '{}')"
                    .format(text)) from None
            return cls('NORMAL', m, s)
        raise common.ValidationError(
            MODULE, "unknown mu prior '{}'".format(text))

    def to_string(self):
        if self.is_uniform:
            return "uniform"
        return "normal:{!r},{!r}".format(self.mu_p, self.sigma_p)


@dataclass(frozen=True)
class ConditionalMuPosterior:
    tau: float
    mu_hat: float
    sigma_hat: float
    weights: np.ndarray
    normalized_weights: np.ndarray


@dataclass(frozen=True)
class ShrinkageMoments:
    study_index: int
    tau: float
    mean: float
    sd: float


@dataclass(frozen=True)
class ShrinkageWeight:
    study_index: int
    tau: float
    direct: float
    indirect: float
    total: float


def _check_tau(tau):
    tau = float(tau)
    if not (tau >= 0 and math.isfinite(tau)):
        raise common.ValidationError(
            MODULE, "tau must be finite and >= 0 (got {})".format(tau))
    return tau


def conditional_moments(y, sigma, taus, prior):
    """
    mu_hat(tau) and sigma_hat(tau) for an array of tau values
    """

    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    w = 1.0 / (sigma[None, :] ** 2 + taus[:, None] ** 2)
    precision = w.sum(axis=1)
    weighted = (w * y[None, :]).sum(axis=1)
    if not prior.is_uniform:
        p0 = prior.sigma_p ** -2
        precision = precision + p0
        weighted = weighted + prior.mu_p * p0
    return weighted / precision, 1.0 / np.sqrt(precision)


def shrinkage_moments(y_i, sigma_i, taus, mu_hat, sigma_hat):
    """
    Conditional mean and sd of theta_i for arrays of tau, mu_hat, sigma_hat
    """

    taus = np.asarray(taus, dtype=float)
    s2 = sigma_i ** 2
    t2 = taus ** 2
    # pull towards mu_hat: tau^-2 / (sigma^-2 + tau^-2), equal to 1 at tau = 0
    b = s2 / (s2 + t2)
    mean = (1.0 - b) * y_i + b * mu_hat
    var = s2 * t2 / (s2 + t2) + (b * sigma_hat) ** 2
    return mean, np.sqrt(var)


def mu_posterior_given_tau(data, prior, tau):
    tau = _check_tau(tau)
    w = 1.0 / (data.sigma ** 2 + tau ** 2)
    mu_hat, sigma_hat = conditional_moments(data.y, data.sigma, [tau], prior)
    return ConditionalMuPosterior(tau=tau,
                                  mu_hat=float(mu_hat[0]),
                                  sigma_hat=float(sigma_hat[0]),
                                  weights=w,
                                  normalized_weights=w / w.sum())


def shrinkage_given_tau(data, cond, i):
    data.check_index(i)
    y_i = float(data.y[i])
    s2 = float(data.sigma[i]) ** 2
    if cond.tau == 0.0:
        # complete pooling limit of the conditional posterior
        return ShrinkageMoments(i, 0.0, cond.mu_hat, cond.sigma_hat)

    prec = 1.0 / s2 + cond.tau ** -2
    mean = (y_i / s2 + cond.mu_hat / cond.tau ** 2) / prec
    var = 1.0 / prec + (cond.tau ** -2 / prec * cond.sigma_hat) ** 2
    return ShrinkageMoments(i, cond.tau, mean, math.sqrt(var))


def fixed_effect_weights(data):
    w = data.sigma ** -2
    return w / w.sum()


def _weight_decomposition(i, tau, sigma_i, w_i, w_sum):
    t2 = tau ** 2
    direct = t2 / (t2 + sigma_i ** 2)
    indirect = (1.0 - direct) * (w_i / w_sum)
    return ShrinkageWeight(i, tau, direct, indirect, direct + indirect)


def shrinkage_weight(data, i, tau, prior=None):
    """
    Coefficient of y_i in its own shrinkage mean (uniform mu prior)
    """

    if prior is not None and not prior.is_uniform:
        raise common.ValidationError(
            MODULE, "decomposition defined for uniform prior only")
    data.check_index(i)
    tau = _check_tau(tau)
    w = 1.0 / (data.sigma ** 2 + tau ** 2)
    return _weight_decomposition(i, tau, float(data.sigma[i]), float(w[i]),
                                 float(w.sum()))


def shrinkage_weight_from_aggregates(sigma_i, tau, sigma_hat):
    """
    Plug-in weight from published aggregates, sum of weights = sigma_hat^-2
    """

    tau = _check_tau(tau)
    if not (sigma_i > 0 and sigma_hat > 0):
        raise common.ValidationError(
            MODULE, "sigma_i and sigma_hat must be positive")
    w_i = 1.0 / (sigma_i ** 2 + tau ** 2)
    w_sum = sigma_hat ** -2
    if w_i > w_sum:
        raise common.ValidationError(
            MODULE, "study weight {:.6g} exceeds the total weight {:.6g} "
            "implied by sigma_hat".format(w_i, w_sum))
    return _weight_decomposition(None, tau, sigma_i, w_i, w_sum)


def log_likelihood_curve(y, sigma, taus, prior):
    """
    log p(y | tau) with mu integrated out, for an array of tau values
    """

    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    k = y.shape[0]
    v = sigma[None, :] ** 2 + taus[:, None] ** 2
    w = 1.0 / v
    w_sum = w.sum(axis=1)
    if prior.is_uniform:
        mu = (w * y[None, :]).sum(axis=1) / w_sum
        resid = (w * (y[None, :] - mu[:, None]) ** 2).sum(axis=1)
        return (0.5 * np.log(w).sum(axis=1) - 0.5 * np.log(w_sum)
                - 0.5 * resid - 0.5 * (k - 1) * LOG_2PI)

    # y ~ N(mu_p 1, diag(v) + s^2 J), rank-one update of the diagonal
    s2 = prior.sigma_p ** 2
    r = y[None, :] - prior.mu_p
    wr = (w * r).sum(axis=1)
    quad = (w * r ** 2).sum(axis=1) - s2 * wr ** 2 / (1.0 + s2 * w_sum)
    logdet = np.log(v).sum(axis=1) + np.log1p(s2 * w_sum)
    return -0.5 * k * LOG_2PI - 0.5 * logdet - 0.5 * quad


def integrated_log_likelihood(data, prior, tau):
    tau = _check_tau(tau)
    return float(log_likelihood_curve(data.y, data.sigma, [tau], prior)[0])
