import math
import unittest

import numpy as np
from scipy import integrate

from levy_mp.analysis import (SELECTION_LABEL, check_harnack_kernel, exit_decomposition, harmonic_mc, harnack_ratio,
                              resolvent_fourier, resolvent_identity_check, resolvent_mc, resolvent_weights,
                              sup_resolvent, viscosity_residual)
from levy_mp.coefficients import make_coefficient
from levy_mp.exceptions import ParameterError, PreconditionError
from levy_mp.generator import combine, make_gaussian
from levy_mp.levy_core import ConditionId, LevyTriplet, Verdict, constant_symbol
from levy_mp.simulate import PathSkeleton, SDEScheme, SolutionEnsemble, ode_selection_ensemble, simulate_ensemble


def _drift_symbol(b: float):
    return constant_symbol(LevyTriplet([b], [[0.0]]))


class TestResolvent(unittest.TestCase):
    """Test cases for Monte Carlo and Fourier resolvents."""

    def test_weights(self):
        """Test that the grid weights integrate e^{-λt} exactly."""
        times = np.linspace(0.0, 2.0, 9)

        self.assertAlmostEqual(resolvent_weights(times, 1.5).sum(), (1 - math.exp(-3.0)) / 1.5)
        with self.assertRaises(ParameterError):
            resolvent_weights(times, 0.0)

    def test_constant_path(self):
        """Test that a path at rest has resolvent f(x)/λ."""
        ens = simulate_ensemble(SDEScheme(0.0, 0.0), 0.0, 5, 20.0, 0.5, master_seed=1)
        estimate = resolvent_mc(ens, lambda x: 3.0 + 0 * x, 1.0, tail_tolerance=1e-8)

        self.assertAlmostEqual(estimate.value, 3.0)
        self.assertEqual(estimate.std_error, 0.0)

    def test_drift_path(self):
        """Test ∫ e^{-λt} e^{-t} dt = 1/(λ + 1) along x(t) = t."""
        ens = simulate_ensemble(SDEScheme(1.0, 0.0), 0.0, 2, 20.0, 0.01, master_seed=1)
        estimate = resolvent_mc(ens, lambda x: np.exp(-x), 1.0, f_bound=1.0)

        self.assertAlmostEqual(estimate.value, 0.5, places=4)

    def test_horizon_too_short(self):
        """Test that a truncation bound above the tolerance is refused."""
        ens = simulate_ensemble(SDEScheme(0.0, 0.0), 0.0, 2, 1.0, 0.5, master_seed=1)

        with self.assertRaises(PreconditionError):
            resolvent_mc(ens, 1.0, 1.0)

    def test_grouped_by_start(self):
        """Test that ensembles with several initial points are grouped."""
        times = np.array([0.0, 10.0, 20.0])
        paths = [PathSkeleton(times, np.full(3, x)) for x in (1.0, 1.0, 2.0)]
        ens = SolutionEnsemble.from_paths(paths, {"kind": "manual"}, 0, {"kind": "manual"})

        estimate = resolvent_mc(ens, lambda x: x, 1.0, f_bound=2.0, tail_tolerance=1e-8)

        np.testing.assert_allclose(estimate.values, [1.0, 2.0])
        np.testing.assert_array_equal(estimate.counts, [2, 1])
        self.assertEqual(len(estimate.to_frame()), 2)
        with self.assertRaises(PreconditionError):
            _ = estimate.value

    def test_fourier_zero_exponent(self):
        """Test that the resolvent of the constant process is f(x)/λ."""
        value = resolvent_fourier({"kind": "zero"}, make_gaussian(1.0), 2.0, 0.5)

        self.assertAlmostEqual(value, math.exp(-0.25) / 2.0, places=6)

    def test_fourier_brownian_green_kernel(self):
        """Test the Brownian resolvent against convolution with e^{-√λ|y|}/(2√λ)."""
        f = make_gaussian(1.0)
        lam, x = 2.0, 0.3
        root = math.sqrt(lam)

        def green(y):
            return math.exp(-root * abs(x - y)) / (2 * root) * math.exp(-y * y)

        oracle = integrate.quad(green, -np.inf, x)[0] + integrate.quad(green, x, np.inf)[0]
        value = resolvent_fourier({"kind": "gaussian", "covariance": 2.0}, f, lam, x)

        self.assertAlmostEqual(value, oracle, places=6)

    def test_monte_carlo_matches_fourier(self):
        """Test the simulated resolvent against the Fourier formula for several Lévy exponents."""
        f = make_gaussian(1.0)
        drivers = [
            {"kind": "stable", "alpha": 0.8},
            {"kind": "stable", "alpha": 1.2},
            {"kind": "stable", "alpha": 1.7},
            {"kind": "gaussian", "covariance": 1.0},
            {"kind": "composite", "parts": [{"kind": "stable", "alpha": 1.0},
                                            {"kind": "gaussian", "covariance": 0.5}]},
        ]
        for seed, driver in enumerate(drivers):
            ens = simulate_ensemble(SDEScheme(0.0, 1.0, driver), 0.5, 4000, 16.0, 0.05, master_seed=40 + seed,
                                    max_workers=2)
            for lam in (0.5, 2.0):
                with self.subTest(driver=driver, lam=lam):
                    estimate = resolvent_mc(ens, f, lam, tail_tolerance=1e-3)
                    oracle = resolvent_fourier(driver, f, lam, 0.5)

                    self.assertLessEqual(abs(estimate.value - oracle), 4 * estimate.std_error + 2e-3)


class TestSupResolvent(unittest.TestCase):
    """Test cases for the sup over the two ODE selections."""

    def test_selections(self):
        """Test that the upward branch attains the sup for the indicator of [0, ∞)."""
        ensembles = [ode_selection_ensemble(0.0, s, 20.0, 0.01) for s in ("X_branch", "Y_branch")]
        f = make_coefficient({"kind": "step", "at": 0.0, "left": 0.0, "right": 1.0})

        result = sup_resolvent(ensembles, f, 1.0, f_bound=1.0)

        self.assertEqual(result.argmax, 0)
        self.assertAlmostEqual(result.value, 1.0, places=6)
        self.assertLess(result.values[1], 0.01)
        self.assertEqual(result.label, SELECTION_LABEL)

    def test_family_checks(self):
        """Test that empty families and different starts are refused."""
        with self.assertRaises(ParameterError):
            sup_resolvent([], 1.0, 1.0)
        a = ode_selection_ensemble(0.0, "X_branch", 20.0, 0.5)
        b = ode_selection_ensemble(1.0, "X_branch", 20.0, 0.5)
        with self.assertRaises(PreconditionError):
            sup_resolvent([a, b], lambda x: np.exp(-np.abs(x)), 1.0, f_bound=1.0)


class TestResolventIdentity(unittest.TestCase):
    """Test cases for the resolvent identity and its stopped version."""

    @classmethod
    def setUpClass(cls):
        cls.ens = simulate_ensemble(SDEScheme(1.0, 0.0), 0.0, 2, 20.0, 0.01, master_seed=0)
        cls.phi = make_gaussian(1.0)

    def test_matching_symbol(self):
        """Test the identity for the drift that generated the paths."""
        result = resolvent_identity_check(self.ens, _drift_symbol(1.0), self.phi, 1.0, 0.0)

        self.assertEqual(result.verdict, Verdict.PASS)
        self.assertAlmostEqual(result.bound_or_target, 1.0)

    def test_mismatched_symbol(self):
        """Test that the reversed drift breaks the identity."""
        result = resolvent_identity_check(self.ens, _drift_symbol(-1.0), self.phi, 1.0, 0.0)

        self.assertEqual(result.verdict, Verdict.FAIL)

    def test_wrong_start(self):
        """Test that the identity needs the ensemble to start at x."""
        with self.assertRaises(PreconditionError):
            resolvent_identity_check(self.ens, _drift_symbol(1.0), self.phi, 1.0, 0.5)

    def test_exit_decomposition(self):
        """Test the identity stopped at the exit from B(0, r)."""
        result = exit_decomposition(self.ens, _drift_symbol(1.0), self.phi, 1.0, 0.5)

        self.assertEqual(result.verdict, Verdict.PASS)

    def test_exit_decomposition_arguments(self):
        """Test the radius and horizon preconditions."""
        with self.assertRaises(ParameterError):
            exit_decomposition(self.ens, _drift_symbol(1.0), self.phi, 1.0, 0.0)
        with self.assertRaises(PreconditionError):
            exit_decomposition(self.ens, _drift_symbol(1.0), self.phi, 1.0, 30.0)


class TestViscosity(unittest.TestCase):
    """Test cases for viscosity residuals."""

    def test_exact_solution(self):
        """Test a zero residual for u = φ solving λu - Au = f."""
        phi = make_gaussian(1.0)
        f = combine(2.0, phi, 0.0, phi)

        result = viscosity_residual(phi, phi, 0.3, 2.0, f, _drift_symbol(0.0))

        self.assertEqual(result.verdict, Verdict.PASS)
        self.assertAlmostEqual(result.residual, 0.0)

    def test_not_an_extremum(self):
        """Test that x₀ must be a lattice maximum of u - φ in sub mode."""
        phi = make_gaussian(1.0)
        u = combine(1.0, phi, 1.0, make_gaussian(1.0, center=1.0))

        with self.assertRaises(PreconditionError):
            viscosity_residual(u, phi, 0.0, 1.0, 0.0, _drift_symbol(0.0))

    def test_mode(self):
        """Test that only sub and super modes exist."""
        phi = make_gaussian(1.0)

        with self.assertRaises(ParameterError):
            viscosity_residual(phi, phi, 0.0, 1.0, 0.0, _drift_symbol(0.0), mode="both")


class TestHarmonic(unittest.TestCase):
    """Test cases for harmonic functions and Harnack ratios."""

    def test_drift_exit_position(self):
        """Test that g is read at the first grid state outside the ball."""
        estimate = harmonic_mc(SDEScheme(1.0, 0.0), 0.0, 0.0, 0.45, lambda x: x, 4, 2.0, 0.1, master_seed=0)

        self.assertAlmostEqual(estimate.value, 0.5)
        self.assertAlmostEqual(estimate.mean_exit_time, 0.5)
        self.assertEqual(estimate.verdict, Verdict.PASS)

    def test_no_exit_inconclusive(self):
        """Test that paths still inside at T_max make the estimate inconclusive."""
        estimate = harmonic_mc(SDEScheme(0.0, 0.0), 0.0, 0.0, 1.0, 1.0, 2, 1.0, 0.5, master_seed=0)

        self.assertEqual(estimate.verdict, Verdict.INCONCLUSIVE)
        self.assertEqual(estimate.exit_fraction, 0.0)
        self.assertEqual(estimate.mean_exit_time, math.inf)

    def test_gamblers_ruin(self):
        """Test that Brownian motion leaves (-1, 1) through the right end with probability (x + 1)/2."""
        brownian = SDEScheme(0.0, 1.0, {"kind": "stable", "alpha": 2.0})
        for x in (-0.5, 0.0, 0.5):
            with self.subTest(x=x):
                estimate = harmonic_mc(brownian, x, 0.0, 1.0, lambda y: (y > 0).astype(float), 10000, 8.0, 2e-3,
                                       master_seed=11, max_workers=2)

                self.assertEqual(estimate.verdict, Verdict.PASS)
                self.assertLessEqual(abs(estimate.value - (x + 1) / 2), 4 * estimate.std_error + 0.015)

    def test_optional_stopping_on_inner_ball(self):
        """Test that (x + 1)/2 read at the exit of a small ball around x is still (x + 1)/2."""
        brownian = SDEScheme(0.0, 1.0, {"kind": "stable", "alpha": 2.0})
        for x in (-0.3, 0.2):
            with self.subTest(x=x):
                estimate = harmonic_mc(brownian, x, x, 0.3, lambda y: np.clip((y + 1) / 2, 0.0, 1.0), 10000, 4.0,
                                       2e-3, master_seed=12, max_workers=2)

                self.assertEqual(estimate.verdict, Verdict.PASS)
                self.assertLessEqual(abs(estimate.value - (x + 1) / 2), 4 * estimate.std_error + 5e-3)

    def test_harnack_constant_g(self):
        """Test that a constant exit value gives ratio 1."""
        brownian = SDEScheme(0.0, 1.0, {"kind": "stable", "alpha": 2.0})

        report = harnack_ratio(brownian, 0.0, 0.25, 1.0, 50, 20.0, 0.01, master_seed=5, max_workers=2)

        self.assertAlmostEqual(report.ratio, 1.0)
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(len(report.to_frame()), 9)

    def test_harnack_probe_outside(self):
        """Test that probes outside B(x₀, r) are refused."""
        with self.assertRaises(ParameterError):
            harnack_ratio(SDEScheme(), 0.0, 0.25, 1.0, 10, 1.0, 0.1, master_seed=0, probes=[0.5])


class TestHarnackKernel(unittest.TestCase):
    """Test cases for the sampled kernel conditions."""

    @staticmethod
    def _cauchy(x, y):
        return np.abs(y) ** -2.0 + 0 * x

    def test_cauchy_kernel(self):
        """Test that |y|^{-2} meets the conditions with c₄ = 4."""
        report = check_harnack_kernel(self._cauchy, 1.0, 1.0, 1.0, 4.0, 1.0, 1.0, 1.0, n_samples=2000, seed=1)

        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertTrue(report.gap_ok)
        self.assertEqual([r.condition_id for r in report.reports()],
                         [ConditionId.HARNACK_H1, ConditionId.HARNACK_H2, ConditionId.HARNACK_H3])

    def test_h3_constant_too_small(self):
        """Test that c₄ = 1 fails H3 and names a worst point."""
        report = check_harnack_kernel(self._cauchy, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, n_samples=2000, seed=1)

        self.assertEqual(report.h3.verdict, Verdict.FAIL)
        self.assertIn("z", report.h3.extras["worst"])
        self.assertEqual(report.verdict, Verdict.FAIL)

    def test_exponent_gap(self):
        """Test that β - α ≥ 1 fails the gap flag."""
        report = check_harnack_kernel(self._cauchy, 1.0, 1e-9, 1e9, 4.0, 0.5, 1.5, 1.0, n_samples=500)

        self.assertFalse(report.gap_ok)
        self.assertEqual(report.verdict, Verdict.FAIL)


if __name__ == '__main__':
    unittest.main()
