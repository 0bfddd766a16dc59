import unittest

import numpy as np
from scipy import integrate
from scipy.integrate import trapezoid

from levy_mp.catalog import make_catalog_symbol
from levy_mp.exceptions import ParameterError
from levy_mp.generator import (apply_fourier, apply_integro, bump_constant, combine, constant_function, make_bump,
                               make_gaussian, make_test_function, multiply, operator_interpolant, tabulate_operator,
                               zero_function)
from levy_mp.levy_core import LevyTriplet, constant_symbol


def _catalog_symbols():
    """One symbol of each closed-form catalog kind."""
    return {
        "isotropic_stable_like": make_catalog_symbol("isotropic_stable_like",
                                                     alpha={"kind": "tanh", "base": 1.2, "amplitude": 0.5}),
        "sde_symbol": make_catalog_symbol("sde_symbol", drift={"kind": "tanh", "amplitude": 0.7}, sigma=1.3,
                                          psi={"kind": "stable", "alpha": 1.5}),
        "mixed": make_catalog_symbol("mixed", phi1={"kind": "sine", "base": 1.0, "amplitude": 0.5}, phi2=0.5,
                                     psi1={"kind": "stable", "alpha": 0.8},
                                     psi2={"kind": "gaussian", "covariance": 2.0}),
        "integrated_stable": make_catalog_symbol("integrated_stable", f="phi",
                                                 phi={"kind": "tanh", "base": 1.0, "amplitude": 0.5},
                                                 interval=[1.0, 1.8]),
        "levy": make_catalog_symbol("levy", psi={"kind": "relativistic", "rho": 1.0}),
    }


class TestTestFunctions(unittest.TestCase):
    """Test cases for the test function builders."""

    def test_bump_plateau_and_support(self):
        """Test that u_R is 1 on B(0, R/2) and 0 off B(0, R)."""
        u = make_bump(2.0)

        np.testing.assert_allclose(u([-1.0, 0.0, 0.9]), [1.0, 1.0, 1.0])
        np.testing.assert_allclose(u([-2.0, 2.5, 10.0]), [0.0, 0.0, 0.0])
        self.assertTrue(0.0 < u(1.5) < 1.0)
        self.assertEqual(u.support_radius, 2.0)
        self.assertEqual(u.sup_norm, 1.0)

    def test_bump_center(self):
        """Test that a centered bump moves its plateau and support radius."""
        u = make_bump(1.0, center=3.0)

        self.assertEqual(u(3.0), 1.0)
        self.assertEqual(u(0.0), 0.0)
        self.assertEqual(u.support_radius, 4.0)

    def test_bump_radius_positive(self):
        """Test that non-positive radii are rejected."""
        with self.assertRaises(ParameterError):
            make_bump(0.0)

    def test_bump_fourier_at_zero(self):
        """Test that û_R(0) is the integral of u_R over 2π."""
        u = make_bump(1.0)
        x = np.linspace(-1.0, 1.0, 20001)
        integral = trapezoid(u(x), x)

        self.assertAlmostEqual(u.fourier(0.0)[0].real, integral / (2 * np.pi), places=5)

    def test_gaussian_derivatives(self):
        """Test the analytic gradient and Hessian of the Gaussian."""
        f = make_gaussian(1.0)

        self.assertAlmostEqual(f.gradient(0.5)[0], -1.0 * np.exp(-0.25))
        self.assertAlmostEqual(f.hessian(0.0)[0, 0], -2.0)
        self.assertAlmostEqual(f.fourier(0.0)[0].real, np.sqrt(np.pi) / (2 * np.pi))
        self.assertTrue(np.isinf(f.support_radius))

    def test_gaussian_rate_positive(self):
        """Test that a non-positive rate is rejected."""
        with self.assertRaises(ParameterError):
            make_gaussian(-1.0)

    def test_multiply(self):
        """Test the product value and its support."""
        fg = multiply(make_bump(2.0), make_gaussian(1.0))

        self.assertAlmostEqual(fg(0.5), np.exp(-0.25))
        self.assertEqual(fg.support_radius, 2.0)
        self.assertEqual(fg.params["kind"], "product")

    def test_combine(self):
        """Test a linear combination and the norms of its terms."""
        h = combine(2.0, make_gaussian(1.0), -1.0, make_gaussian(2.0))

        self.assertAlmostEqual(h(0.0), 1.0)
        self.assertEqual(h.sup_norm, 3.0)
        self.assertIsNotNone(h.fourier_fn)

    def test_zero_and_constant(self):
        """Test the zero and constant functions."""
        self.assertTrue(zero_function().is_zero)
        c = constant_function(2.0)
        self.assertEqual(c(5.0), 2.0)
        self.assertEqual(c.norm_2, 2.0)

    def test_make_test_function(self):
        """Test declarative test functions, products included."""
        self.assertEqual(make_test_function({"kind": "bump", "R": 2.0}).support_radius, 2.0)
        product = make_test_function({"kind": "product", "factors": [{"kind": "bump"}, {"kind": "gaussian"}]})
        self.assertEqual(product.support_radius, 1.0)

        f = make_gaussian()
        self.assertIs(make_test_function(f), f)

    def test_make_test_function_errors(self):
        """Test that unknown kinds, bad parameters and short products are rejected."""
        with self.assertRaises(ParameterError):
            make_test_function({"kind": "spline"})
        with self.assertRaises(ParameterError):
            make_test_function({"kind": "bump", "radius": 1.0})
        with self.assertRaises(ParameterError):
            make_test_function({"kind": "product", "factors": [{"kind": "bump"}]})

    def test_bump_constant_zero(self):
        """Test that the zero function has bump constant 0."""
        self.assertEqual(bump_constant(zero_function()), 0.0)


class TestApplyOperator(unittest.TestCase):
    """Test cases for the two forms of the generator."""

    def test_brownian_on_gaussian(self):
        """Test Af = f'' for q(ξ) = ξ² at the origin."""
        sym = make_catalog_symbol("levy", psi={"kind": "gaussian", "covariance": 2.0})
        f = make_gaussian(1.0)

        self.assertAlmostEqual(apply_integro(sym, f, 0.0), -2.0)
        self.assertAlmostEqual(apply_fourier(sym, f, 0.0), -2.0, places=5)

    def test_drift(self):
        """Test Af = b f' for a pure drift."""
        sym = constant_symbol(LevyTriplet([1.5], [[0.0]]))
        f = make_gaussian(1.0)

        self.assertAlmostEqual(apply_integro(sym, f, 0.5), 1.5 * -1.0 * np.exp(-0.25))

    def test_forms_agree_for_stable(self):
        """Test that the Fourier and integro forms agree for a stable-like symbol."""
        sym = make_catalog_symbol("isotropic_stable_like", alpha={"kind": "tanh", "base": 1.5, "amplitude": 0.3})
        f = make_gaussian(1.0)

        for x in (0.0, 0.5, 2.0):
            with self.subTest(x=x):
                self.assertAlmostEqual(apply_integro(sym, f, x), apply_fourier(sym, f, x), places=4)

    def test_bump_against_direct_quadrature(self):
        """Test the integro form on a bump against ∫(f(x+y) + f(x-y) - 2f(x))/(πy²)dy for q(ξ) = |ξ|."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.0})
        u = make_bump(1.0)

        for x in (0.0, 0.6, 1.0):
            with self.subTest(x=x):
                far = abs(x) + 1.0
                inner, _ = integrate.quad(lambda y: (u(x + y) + u(x - y) - 2 * u(x)) / (np.pi * y ** 2), 0.0, far,
                                          points=[0.25, 0.5, 0.75], limit=200, epsabs=1e-10)
                expected = inner - 2 * u(x) / (np.pi * far)
                self.assertAlmostEqual(apply_integro(sym, u, x), expected, places=5)
                self.assertAlmostEqual(apply_fourier(sym, u, x), expected, places=5)

    def test_forms_agree_on_catalog(self):
        """Test |integro - fourier| ≤ 1e-4(1 + |Af|) for catalog symbols on bumps, Gaussians and their products."""
        functions = {"bump": make_bump(2.0), "gaussian": make_gaussian(1.0),
                     "gaussian*bump": multiply(make_gaussian(0.5), make_bump(3.0))}
        xs = np.linspace(-3.0, 3.0, 50)
        for name, sym in _catalog_symbols().items():
            for f_name, f in functions.items():
                with self.subTest(symbol=name, f=f_name):
                    df = tabulate_operator(sym, f, xs, form="both")
                    worst = float(np.max(df["residual"] / (1.0 + df["Af"].abs())))
                    self.assertLessEqual(worst, 1e-4)

    def test_positive_maximum_principle(self):
        """Test Af(x₀) ≤ 0 where the bump attains its maximum."""
        u = make_bump(2.0)
        for name, sym in _catalog_symbols().items():
            for x0 in (0.0, 0.5):
                with self.subTest(symbol=name, x0=x0):
                    self.assertLessEqual(apply_integro(sym, u, x0), 1e-8)
                    self.assertLessEqual(apply_fourier(sym, u, x0), 1e-8)

    def test_zero_function(self):
        """Test that A0 = 0."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.0})

        self.assertEqual(apply_integro(sym, zero_function(), 1.0), 0.0)

    def test_tabulate(self):
        """Test the tabulation frame, its order and the residual column."""
        sym = make_catalog_symbol("levy", psi={"kind": "gaussian", "covariance": 2.0})
        df = tabulate_operator(sym, make_gaussian(1.0), [0.0, 1.0], form="both", max_workers=2)

        self.assertListEqual(list(df.columns), ["x", "Af", "form", "residual"])
        self.assertListEqual(df["x"].tolist(), [0.0, 1.0])
        self.assertAlmostEqual(df["Af"].iloc[0], -2.0)
        self.assertLess(df["residual"].max(), 1e-5)

    def test_tabulate_bad_form(self):
        """Test that an unknown form is rejected."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.0})

        with self.assertRaises(ParameterError):
            tabulate_operator(sym, make_gaussian(), [0.0], form="laplace")

    def test_interpolant(self):
        """Test that the interpolated Af follows the exact drift action."""
        sym = constant_symbol(LevyTriplet([1.0], [[0.0]]))
        f = make_gaussian(1.0)
        interp = operator_interpolant(sym, f, [-3.0, 3.0], spacing=0.01)
        x = np.array([-1.0, 0.0, 0.3, 2.5])

        np.testing.assert_allclose(interp(x), -2.0 * x * np.exp(-x ** 2), atol=1e-3)


if __name__ == '__main__':
    unittest.main()
