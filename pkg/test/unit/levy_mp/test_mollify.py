import math
import unittest

import numpy as np
from scipy.integrate import trapezoid

from levy_mp.coefficients import make_coefficient
from levy_mp.exceptions import ParameterError
from levy_mp.mollify import (holder_exponent_for_lipschitz, holder_quotient, mollifier, mollifier_cdf,
                             mollifier_derivative_norm, mollify_coefficient, mollify_sequence,
                             null_set_modification)


def _step(x):
    return (np.asarray(x) >= 0).astype(float)


class TestMollifier(unittest.TestCase):
    """Test cases for the mollifier χ."""

    def test_probability_density(self):
        """Test that χ is a density supported in (-1, 1)."""
        y = np.linspace(-1.0, 1.0, 40001)

        self.assertAlmostEqual(trapezoid(mollifier(y), y), 1.0, places=6)
        np.testing.assert_allclose(mollifier([-1.0, 1.0, 2.0]), 0.0)

    def test_cdf(self):
        """Test the distribution function at its ends and midpoint."""
        np.testing.assert_allclose(mollifier_cdf([-2.0, 0.0, 2.0]), [0.0, 0.5, 1.0], atol=1e-12)

    def test_derivative_norm(self):
        """Test that ‖χ'‖₁ equals 2χ(0)."""
        self.assertAlmostEqual(mollifier_derivative_norm(), 2.0 * float(mollifier(0.0)))

    def test_holder_exponent(self):
        """Test α = 1 for small constants and 2L^α = 3 otherwise."""
        self.assertEqual(holder_exponent_for_lipschitz(1.0), 1.0)
        self.assertAlmostEqual(holder_exponent_for_lipschitz(2.25), 0.5)
        with self.assertRaises(ParameterError):
            holder_exponent_for_lipschitz(0.0)


class TestMollifySequence(unittest.TestCase):
    """Test cases for the mollified sequence f_n."""

    def test_step(self):
        """Test that the mollified step is the mollifier distribution at nx."""
        f8 = mollify_sequence(_step, 8, bound=1.0, breakpoints=[0.0])

        self.assertAlmostEqual(f8(0.0), 0.5, places=8)
        np.testing.assert_allclose(f8(np.array([-1.0, 0.05, 1.0])),
                                   [0.0, float(mollifier_cdf(0.4)[0]), 1.0], atol=1e-8)

    def test_certified_metadata(self):
        """Test the Lipschitz constant, Hölder exponent and Hölder bound."""
        f = mollify_sequence(make_coefficient({"kind": "sign", "scale": 2.0}), 16)

        self.assertAlmostEqual(f.lipschitz, 2.0 * 16 * mollifier_derivative_norm())
        self.assertAlmostEqual(f.alpha, min(1.0, math.log(1.5) / math.log(16 * mollifier_derivative_norm())))
        self.assertEqual(f.holder_bound, 8.0)
        self.assertEqual(f.lower, -2.0)

    def test_bounds_preserved(self):
        """Test inf f ≤ f_n ≤ sup f on a lattice."""
        c = make_coefficient({"kind": "piecewise_constant", "breakpoints": [-1.0, 1.0], "values": [0.5, 2.0, 1.0]})
        f = mollify_sequence(c, 4)
        values = f(np.linspace(-3.0, 3.0, 301))

        self.assertTrue(np.all(values >= 0.5 - 1e-12))
        self.assertTrue(np.all(values <= 2.0 + 1e-12))

    def test_holder_quotient_within_bound(self):
        """Test that sampled Hölder quotients respect the certified bound."""
        f = mollify_sequence(_step, 32, bound=1.0, breakpoints=[0.0])
        x = np.linspace(-0.1, 0.1, 41)

        self.assertLessEqual(holder_quotient(f, f.alpha, x[:-1], x[1:]), f.holder_bound)

    def test_holder_bound_for_small_sup(self):
        """Test that α_n ignores ‖f‖_∞ and the 4‖f‖_∞ bound holds for a step of height 1/4."""
        f = mollify_sequence(lambda x: 0.25 * _step(x), 32, bound=0.25, breakpoints=[0.0])
        x = np.linspace(-0.1, 0.1, 81)
        i, j = np.triu_indices(x.size, k=1)

        self.assertAlmostEqual(f.alpha, holder_exponent_for_lipschitz(32 * mollifier_derivative_norm()))
        self.assertEqual(f.holder_bound, 1.0)
        self.assertLessEqual(holder_quotient(f, f.alpha, x[i], x[j]), f.holder_bound)

    def test_validation(self):
        """Test that bad levels, missing bounds and violated bounds are rejected."""
        with self.assertRaises(ParameterError):
            mollify_sequence(_step, 0, bound=1.0)
        with self.assertRaises(ParameterError):
            mollify_sequence(_step, 2)
        with self.assertRaises(ParameterError):
            mollify_sequence(make_coefficient({"kind": "signed_sqrt"}), 2)
        with self.assertRaises(ParameterError):
            mollify_sequence(_step, 2, bound=0.5)

    def test_mollify_coefficient(self):
        """Test that a mollified coefficient is continuous and keeps its bounds."""
        c = mollify_coefficient(make_coefficient({"kind": "sign", "scale": -1.0}), 4)

        self.assertEqual(c.name, "mollified")
        self.assertTrue(c.continuous)
        self.assertEqual(c.bound, 1.0)
        self.assertAlmostEqual(float(c(0.0)), 0.0, places=10)
        self.assertEqual(c.params["base"], {"kind": "sign", "scale": -1.0})


class TestHelpers(unittest.TestCase):
    """Test cases for the Hölder quotient and null set modifications."""

    def test_holder_quotient(self):
        """Test the quotient of the identity and that equal pairs are skipped."""
        self.assertAlmostEqual(holder_quotient(lambda x: x, 1.0, [0.0, 1.0], [1.0, 3.0]), 1.0)
        self.assertEqual(holder_quotient(lambda x: x, 1.0, [1.0], [1.0]), 0.0)

    def test_null_set_modification(self):
        """Test that the modification differs only on the given points."""
        alpha = make_coefficient(1.5)
        beta = null_set_modification(alpha, [0.0, 1.0])

        np.testing.assert_allclose(beta([-1.0, 0.0, 0.5, 1.0]), [1.5, 0.0, 1.5, 0.0])
        self.assertFalse(beta.continuous)
        self.assertEqual(beta.lower, 0.0)


if __name__ == '__main__':
    unittest.main()
