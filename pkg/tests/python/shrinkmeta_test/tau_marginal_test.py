import math

import numpy as np
from scipy.stats import halfnorm

from shrinkmeta import common as smc
from shrinkmeta.op.nnhm_core import MuPrior, log_likelihood_curve
from shrinkmeta.op.tau_marginal import (
    TauPosteriorGrid,
    TauPrior,
    tau_posterior,
    tau_summaries,
)
from shrinkmeta.utils import compatibility as compat

from . import common


UNIFORM = MuPrior('UNIFORM')
HALF_NORMAL = TauPrior('HALF_NORMAL', 1.0)


class TestTauPrior(common.TestBase):
    module_name = "tau_marginal"
    submodule_name = "TauPrior"
    idname = [
        ('PROPERTY', 'tau_prior'),
        ('PROPERTY', 'tol'),
        ('PROPERTY', 'tau_estimate'),
    ]

    def test_ok_parse(self):
        print("[TEST] (OK) Parse tau prior grammar")
        self.assertEqual(TauPrior.parse("half-normal:0.5"),
                         TauPrior('HALF_NORMAL', 0.5))
        self.assertEqual(TauPrior.parse("half-cauchy:1"),
                         TauPrior('HALF_CAUCHY', 1.0))
        self.assertEqual(TauPrior.parse("uniform:0,10").support(),
                         (0.0, 10.0))
        self.assertEqual(TauPrior.parse("jeffreys:0.001,10").support(),
                         (0.001, 10.0))
        self.assertFalse(TauPrior.parse("improper-uniform").is_proper)
        for text in ["half-normal:2.5", "uniform:0.5,3.0",
                     "jeffreys:0.01,5.0", "improper-uniform"]:
            p = TauPrior.parse(text)
            self.assertEqual(TauPrior.parse(p.to_string()), p)

    def test_ok_log_pdf(self):
        print("[TEST] (OK) Prior densities")
        t = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(np.exp(HALF_NORMAL.log_pdf(t)),
                                   halfnorm.pdf(t), rtol=1e-12)
        u = TauPrior('UNIFORM', lower=0.0, upper=4.0)
        np.testing.assert_allclose(np.exp(u.log_pdf([1.0, 3.0])), [0.25, 0.25])
        self.assertEqual(u.log_pdf([5.0])[0], -np.inf)
        self.assertAlmostEqual(HALF_NORMAL.ppf(0.5), 0.6744897501960817,
                               places=10)

    def test_ng_parse(self):
        print("[TEST] (NG) Invalid tau priors")
        for text in ["gamma:1", "half-normal", "half-normal:-1",
                     "uniform:5,1", "jeffreys:0,10", "improper-uniform:1",
                     "half-cauchy:x"]:
            with self.assertRaises(smc.ValidationError):
                TauPrior.parse(text)


class TestTauPosterior(common.TestBase):
    module_name = "tau_marginal"
    submodule_name = "tau_posterior"

    def test_ok_single_study_is_prior(self):
        print("[TEST] (OK) Single study leaves the prior unchanged")
        data = common.make_dataset([0.8], [0.5])
        grid = tau_posterior(data, UNIFORM, HALF_NORMAL, tol=1e-6)
        err = np.max(np.abs(grid.cdf - halfnorm.cdf(grid.nodes)))
        self.assertLess(err, 1e-4)
        self.assertAlmostEqual(grid.quantile(0.5), 0.6745, delta=1e-3)
        self.assertAlmostEqual(tau_summaries(grid).median, 0.6745,
                               delta=1e-3)

    def test_ok_grid_shape(self):
        print("[TEST] (OK) Grid nodes, masses and CDF")
        rng = np.random.default_rng(21)
        data = common.random_dataset(rng, 5)
        grid = tau_posterior(data, UNIFORM, HALF_NORMAL)
        self.assertEqual(grid.nodes[0], 0.0)
        self.assertTrue(np.all(np.diff(grid.nodes) > 0))
        self.assertTrue(np.all(grid.masses >= 0))
        self.assertAlmostEqual(grid.masses.sum(), 1.0, delta=1e-10)
        self.assertTrue(np.all(np.diff(grid.cdf) >= 0))
        self.assertAlmostEqual(grid.cdf[-1], 1.0, delta=1e-10)
        self.assertEqual(len(grid.conditionals), grid.size)
        d = grid.to_dict()
        self.assertEqual(len(d["nodes"]), len(d["masses"]))

    def test_ok_equal_studies_mode_zero(self):
        print("[TEST] (OK) Equal studies under a uniform prior")
        data = common.make_dataset([0.0, 0.0], [1.0, 1.0])
        prior = TauPrior('UNIFORM', lower=0.0, upper=10.0)
        grid = tau_posterior(data, UNIFORM, prior)
        self.assertEqual(tau_summaries(grid).mode, 0.0)
        self.assertTrue(np.all(np.diff(grid.density) <= 1e-15))

    def test_ok_oracle(self):
        print("[TEST] (OK) Agreement with a fixed dense grid")
        rng = np.random.default_rng(4)
        for prior in [HALF_NORMAL, TauPrior('HALF_CAUCHY', 0.5)]:
            data = common.random_dataset(rng, 4)
            grid = tau_posterior(data, UNIFORM, prior)
            hi = float(grid.nodes[-1])
            nodes = np.linspace(0.0, hi, 100001)
            logf = log_likelihood_curve(data.y, data.sigma, nodes, UNIFORM) \
                + prior.log_pdf(nodes)
            f = np.exp(logf - logf.max())
            z = compat.trapezoid(f, nodes)
            cdf = np.concatenate([[0.0], np.cumsum(
                0.5 * np.diff(nodes) * (f[1:] + f[:-1]))]) / z
            median = float(np.interp(0.5, cdf, nodes))
            mean = compat.trapezoid(nodes * f, nodes) / z
            s = tau_summaries(grid)
            self.assertLess(abs(s.median - median), 1e-4 * hi)
            self.assertLess(abs(s.mean - mean), 1e-4 * hi)

    def test_ok_tol_halving(self):
        print("[TEST] (OK) Halving tol barely moves the summaries")
        rng = np.random.default_rng(8)
        data = common.random_dataset(rng, 6)
        a = tau_summaries(tau_posterior(data, UNIFORM, HALF_NORMAL, tol=1e-5))
        b = tau_summaries(tau_posterior(data, UNIFORM, HALF_NORMAL,
                                        tol=5e-6))
        for name in ["median", "mean", "lower", "upper"]:
            self.assertLess(abs(getattr(a, name) - getattr(b, name)), 1e-3)

    def test_ok_improper_prior_enough_studies(self):
        print("[TEST] (OK) Improper tau prior with three studies")
        data = common.make_dataset([0.1, 0.9, 0.5], [0.3, 0.3, 0.3])
        grid = tau_posterior(data, UNIFORM, TauPrior('IMPROPER_UNIFORM'))
        self.assertAlmostEqual(grid.masses.sum(), 1.0, delta=1e-10)

    def test_ok_jeffreys_support(self):
        print("[TEST] (OK) Truncated prior support")
        data = common.make_dataset([0.1, 0.9], [0.3, 0.3])
        prior = TauPrior('JEFFREYS', lower=0.001, upper=5.0)
        grid = tau_posterior(data, UNIFORM, prior)
        self.assertEqual(grid.nodes[0], 0.001)
        self.assertEqual(grid.nodes[-1], 5.0)

    def test_ng_improper_posterior(self):
        print("[TEST] (NG) Improper posterior")
        prior = TauPrior('IMPROPER_UNIFORM')
        for y in [[0.5], [0.5, 0.1]]:
            data = common.make_dataset(y, [0.2] * len(y))
            with self.assertRaises(smc.ValidationError) as cm:
                tau_posterior(data, UNIFORM, prior)
            self.assertIn("improper posterior", str(cm.exception))
        with self.assertRaises(smc.ValidationError):
            tau_posterior(common.make_dataset([0.5], [0.2]),
                          MuPrior('NORMAL', 0.0, 1.0), prior)

    def test_ng_tol(self):
        print("[TEST] (NG) Non-positive tol")
        with self.assertRaises(smc.ValidationError):
            tau_posterior(common.make_dataset([0.5], [0.2]), UNIFORM,
                          HALF_NORMAL, tol=0.0)


class TestTauSummaries(common.TestBase):
    module_name = "tau_marginal"
    submodule_name = "tau_summaries"

    def test_ok_point_mass(self):
        print("[TEST] (OK) Point mass")
        data = common.make_dataset([0.1, 0.9], [0.3, 0.3])
        s = tau_summaries(TauPosteriorGrid.point_mass(data, UNIFORM, 0.7))
        for v in (s.median, s.mode, s.mean, s.lower, s.upper):
            self.assertEqual(v, 0.7)
        self.assertEqual(s.estimate('MODE'), 0.7)

    def test_ok_narrow_bump(self):
        print("[TEST] (OK) Narrow bump")
        nodes = np.arange(0, 2001) / 1000.0
        logf = -0.5 * ((nodes - 0.7) / 0.005) ** 2
        s = tau_summaries(TauPosteriorGrid.from_log_density(nodes, logf))
        for v in (s.median, s.mode, s.mean):
            self.assertAlmostEqual(v, 0.7, delta=1e-3)

    def test_ok_two_bumps(self):
        print("[TEST] (OK) Two bumps: higher bump is the mode")
        nodes = np.arange(0, 401) / 100.0
        a = -0.5 * ((nodes - 1.0) / 0.2) ** 2
        b = -0.5 * ((nodes - 3.0) / 0.2) ** 2
        s = tau_summaries(TauPosteriorGrid.from_log_density(
            nodes, np.logaddexp(a + math.log(0.4), b + math.log(0.6))))
        self.assertAlmostEqual(s.mode, 3.0, delta=0.01)

    def test_ok_tie_breaks_low(self):
        print("[TEST] (OK) Exact tie: smaller tau wins")
        nodes = np.arange(0, 401) / 100.0
        a = -0.5 * ((nodes - 1.0) / 0.2) ** 2
        b = -0.5 * ((nodes - 3.0) / 0.2) ** 2
        s = tau_summaries(TauPosteriorGrid.from_log_density(
            nodes, np.logaddexp(a, b)))
        self.assertAlmostEqual(s.mode, 1.0, delta=0.01)
        self.assertTrue(1.0 < s.median < 3.0)

    def test_ok_estimate(self):
        print("[TEST] (OK) Select the reported estimate")
        data = common.make_dataset([0.1, 0.9, 0.4], [0.3, 0.3, 0.2])
        s = tau_summaries(tau_posterior(data, UNIFORM, HALF_NORMAL))
        self.assertEqual(s.estimate('MEDIAN'), s.median)
        self.assertEqual(s.estimate('MEAN'), s.mean)
        self.assertTrue(s.lower <= s.median <= s.upper)

    def test_ng_level(self):
        print("[TEST] (NG) Level outside (0, 1)")
        data = common.make_dataset([0.1], [0.3])
        with self.assertRaises(smc.ValidationError):
            tau_summaries(TauPosteriorGrid.point_mass(data, UNIFORM, 0.5),
                          level=1.5)

    def test_ng_grid(self):
        print("[TEST] (NG) Non-increasing nodes")
        with self.assertRaises(smc.ValidationError):
            TauPosteriorGrid.from_log_density([0.0, 1.0, 1.0],
                                              [0.0, 0.0, 0.0])
