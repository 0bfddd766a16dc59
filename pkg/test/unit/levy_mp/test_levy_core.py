import unittest

import numpy as np

from levy_mp.catalog import make_catalog_symbol
from levy_mp.exceptions import ParameterError, PreconditionError
from levy_mp.generator import make_bump, make_gaussian, zero_function
from levy_mp.levy_core import (AtomicJumps, ConditionId, JumpDensity, LevyTriplet, SymbolField, Verdict,
                               check_conditions, constant_symbol, eval_symbol, nu_ball_mass, operator_sup_bound,
                               small_jump_moment, stable_constant, subadditivity_defect)


def _cauchy_triplet() -> LevyTriplet:
    c = stable_constant(1.0)
    return LevyTriplet([0.0], [[0.0]], JumpDensity(lambda y: c * np.abs(y) ** -2.0, 1.0, 1.0, symmetric=True))


class TestTriplets(unittest.TestCase):
    """Test cases for Lévy triplets and jump measures."""

    def test_stable_constant(self):
        """Test the Cauchy constant 1/π and the rejected index 2."""
        self.assertAlmostEqual(stable_constant(1.0), 1.0 / np.pi)
        with self.assertRaises(ParameterError):
            stable_constant(2.0)

    def test_density_exponent_validation(self):
        """Test that jump density exponents are validated."""
        with self.assertRaises(ParameterError):
            JumpDensity(lambda y: y, 2.0, 1.0)
        with self.assertRaises(ParameterError):
            JumpDensity(lambda y: y, 1.0, 0.0)

    def test_atoms_validation(self):
        """Test that atoms reject negative masses, mismatched shapes and the origin."""
        with self.assertRaises(ParameterError):
            AtomicJumps([[1.0]], [-0.5])
        with self.assertRaises(ParameterError):
            AtomicJumps([[1.0], [2.0]], [0.5])
        with self.assertRaises(ParameterError):
            AtomicJumps([[0.0]], [1.0])

    def test_triplet_validation(self):
        """Test that the diffusion matrix must be symmetric and semidefinite."""
        with self.assertRaises(ParameterError):
            LevyTriplet([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
        with self.assertRaises(ParameterError):
            LevyTriplet([0.0], [[-1.0]])

    def test_density_on_plane_rejected(self):
        """Test that densities are restricted to the real line."""
        with self.assertRaises(ParameterError):
            LevyTriplet([0.0, 0.0], np.zeros((2, 2)), JumpDensity(lambda y: y, 1.0, 1.0))

    def test_small_jump_moment_density(self):
        """Test ∫ min(|y|², 1) ν(dy) = 4/π for the Cauchy density."""
        self.assertAlmostEqual(small_jump_moment(_cauchy_triplet()), 4.0 / np.pi, places=4)

    def test_small_jump_moment_atoms(self):
        """Test the small jump moment of an atomic measure."""
        triplet = LevyTriplet([0.0], [[0.0]], AtomicJumps([[0.5], [-2.0]], [1.0, 0.25]))

        self.assertAlmostEqual(small_jump_moment(triplet), 0.25 + 0.25)
        self.assertEqual(small_jump_moment(LevyTriplet([0.0], [[1.0]])), 0.0)

    def test_nu_ball_mass(self):
        """Test the jump mass of a ball away from the origin."""
        self.assertAlmostEqual(nu_ball_mass(_cauchy_triplet(), 2.0, 1.0), 2.0 / (3.0 * np.pi), places=6)

        atoms = LevyTriplet([0.0], [[0.0]], AtomicJumps([[1.0], [-2.0]], [0.5, 0.25]))
        self.assertAlmostEqual(nu_ball_mass(atoms, 1.5, 0.6), 0.5)

    def test_nu_ball_mass_origin(self):
        """Test that a density ball around the origin is refused."""
        with self.assertRaises(PreconditionError):
            nu_ball_mass(_cauchy_triplet(), 0.5, 1.0)

    def test_to_dict(self):
        """Test that triplets serialize to plain lists."""
        d = LevyTriplet([1.0], [[2.0]]).to_dict()

        self.assertEqual(d["drift"], [1.0])
        self.assertEqual(d["diffusion"], [[2.0]])
        self.assertEqual(d["jump_measure"], {"type": "zero"})


class TestEvalSymbol(unittest.TestCase):
    """Test cases for symbol evaluation."""

    def test_direct_and_quadrature_agree(self):
        """Test that the triplet quadrature reproduces |ξ|^α."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.5})
        xi = np.array([0.5, 1.0, 3.0])

        direct = eval_symbol(sym, 0.0, xi, method="direct")
        quad = eval_symbol(sym, 0.0, xi, method="quadrature")

        np.testing.assert_allclose(direct.real, xi ** 1.5)
        np.testing.assert_allclose(quad.real, xi ** 1.5, rtol=1e-3)
        np.testing.assert_allclose(quad.imag, 0.0, atol=1e-6)

    def test_scalar_returns_complex(self):
        """Test that a single frequency gives a complex scalar."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 2.0})

        self.assertEqual(sym(0.0, 1.0), complex(1.0))

    def test_drift_only_symbol(self):
        """Test q(x, ξ) = -i b ξ for a pure drift triplet."""
        sym = constant_symbol(LevyTriplet([2.0], [[0.0]]))

        self.assertAlmostEqual(eval_symbol(sym, 0.0, 1.5), -3.0j)

    def test_direct_without_closed_form(self):
        """Test that direct evaluation needs a closed form."""
        sym = constant_symbol(LevyTriplet([0.0], [[1.0]]))

        with self.assertRaises(ParameterError):
            eval_symbol(sym, 0.0, 1.0, method="direct")

    def test_bad_method_and_frequency(self):
        """Test that unknown methods and non-finite frequencies are rejected."""
        sym = constant_symbol(LevyTriplet([0.0], [[1.0]]))

        with self.assertRaises(ParameterError):
            eval_symbol(sym, 0.0, 1.0, method="series")
        with self.assertRaises(ParameterError):
            eval_symbol(sym, 0.0, np.inf)

    def test_subadditivity(self):
        """Test that √|q| is subadditive for a negative definite symbol."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.0})

        for xi, eta in ((1.0, 2.0), (-1.0, 3.0), (0.5, 0.5)):
            with self.subTest(xi=xi, eta=eta):
                self.assertLessEqual(subadditivity_defect(sym, 0.0, xi, eta), 1e-12)

    def test_symbol_axioms(self):
        """Test q(x, 0) = 0, q(x, -ξ) = conj q(x, ξ) and Re q ≥ 0 on a lattice for every closed-form kind."""
        symbols = {
            "isotropic_stable_like": make_catalog_symbol("isotropic_stable_like",
                                                         alpha={"kind": "tanh", "base": 1.2, "amplitude": 0.5}),
            "sde_symbol": make_catalog_symbol("sde_symbol", drift={"kind": "sign", "scale": -1.0}, sigma=1.3,
                                              psi={"kind": "stable", "alpha": 1.5}),
            "mixed": make_catalog_symbol("mixed", phi1=1.0, phi2={"kind": "indicator", "low": -1.0, "high": 1.0},
                                         psi1={"kind": "stable", "alpha": 0.8},
                                         psi2={"kind": "gaussian", "covariance": 2.0}),
            "integrated_stable": make_catalog_symbol("integrated_stable", interval=[0.5, 2.0]),
            "drift_ode": make_catalog_symbol("drift_ode"),
            "levy": make_catalog_symbol("levy", psi={"kind": "relativistic", "rho": 1.3, "mass": 2.0}),
        }
        xi = np.linspace(0.1, 20.0, 40)
        for name, sym in symbols.items():
            for x in (-2.0, -0.3, 0.0, 0.7, 3.0):
                with self.subTest(symbol=name, x=x):
                    self.assertAlmostEqual(abs(eval_symbol(sym, x, 0.0)), 0.0, places=12)
                    plus, minus = eval_symbol(sym, x, xi), eval_symbol(sym, x, -xi)
                    np.testing.assert_allclose(minus, np.conj(plus), rtol=1e-12, atol=1e-12)
                    self.assertGreaterEqual(float(np.min(plus.real)), -1e-10)


class TestCheckConditions(unittest.TestCase):
    """Test cases for sampled symbol conditions."""

    def setUp(self):
        self.stable = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.5})

    def test_local_bounded(self):
        """Test that sup |ξ|^α over |ξ| ≤ 1 is 1 at every radius."""
        report = check_conditions(self.stable, "LOCAL_BOUNDED", [1.0, 2.0])

        self.assertEqual(report.verdict, Verdict.PASS)
        for _, value in report.sup_values:
            self.assertAlmostEqual(value, 1.0)
        self.assertIn("c_R", report.extras)

    def test_cont_at_zero_decays(self):
        """Test that sup over |ξ| ≤ 1/R equals R^{-α} and passes."""
        report = check_conditions(self.stable, ConditionId.CONT_AT_ZERO, [1.0, 2.0, 4.0])

        self.assertEqual(report.verdict, Verdict.PASS)
        np.testing.assert_allclose([v for _, v in report.sup_values], [1.0, 2.0 ** -1.5, 4.0 ** -1.5])

    def test_unbounded_values_fail(self):
        """Test that infinite sampled values produce FAIL rather than an exception."""
        blow_up = SymbolField("blow_up", 1, lambda x: LevyTriplet([0.0], [[0.0]]),
                              lambda x, xi: np.full(xi.shape[0], np.inf + 0j))

        report = check_conditions(blow_up, "LOCAL_BOUNDED", [1.0])

        self.assertEqual(report.verdict, Verdict.FAIL)

    def test_family_conditions(self):
        """Test that the equiboundedness condition accepts a family."""
        other = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.0})

        report = check_conditions([self.stable, other], "C1_EQUIBOUNDED", [1.0])

        self.assertEqual(report.grid_spec["family"], ["levy", "levy"])
        self.assertEqual(report.verdict, Verdict.PASS)

    def test_family_rejected_for_single_conditions(self):
        """Test that single-symbol conditions refuse a family."""
        with self.assertRaises(ParameterError):
            check_conditions([self.stable, self.stable], "LOCAL_BOUNDED", [1.0])

    def test_grid_validation(self):
        """Test that empty and non-increasing grids are rejected."""
        with self.assertRaises(ParameterError):
            check_conditions(self.stable, "LOCAL_BOUNDED", [])
        with self.assertRaises(ParameterError):
            check_conditions(self.stable, "LOCAL_BOUNDED", [2.0, 1.0])
        with self.assertRaises(ParameterError):
            check_conditions(self.stable, "HARNACK_H1", [1.0])


class TestOperatorSupBound(unittest.TestCase):
    """Test cases for the sup bound of ‖Af‖_∞."""

    def test_zero_function(self):
        """Test that the zero function has bound 0."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.5})

        self.assertEqual(operator_sup_bound(sym, zero_function()), 0.0)

    def test_unbounded_support(self):
        """Test that a Gaussian is refused."""
        sym = make_catalog_symbol("levy", psi={"kind": "stable", "alpha": 1.5})

        with self.assertRaises(PreconditionError):
            operator_sup_bound(sym, make_gaussian(1.0))

    def test_drift_bound(self):
        """Test the integral form for a pure drift, which has no outer jump term."""
        sym = constant_symbol(LevyTriplet([1.0], [[0.0]]))
        f = make_bump(1.0)

        self.assertAlmostEqual(operator_sup_bound(sym, f), 2.0 * f.norm_2)


if __name__ == '__main__':
    unittest.main()
