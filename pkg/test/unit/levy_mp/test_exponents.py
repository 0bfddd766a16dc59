import unittest

import numpy as np

from levy_mp.exceptions import ParameterError
from levy_mp.exponents import (CompositeExponent, GaussianExponent, RelativisticStableExponent, StableExponent,
                               ZeroExponent, make_exponent)
from levy_mp.levy_core import JumpDensity


class TestExponents(unittest.TestCase):
    """Test cases for the Lévy exponents."""

    def test_stable_values(self):
        """Test that the stable exponent is |ξ|^α."""
        psi = make_exponent({"kind": "stable", "alpha": 1.5})

        np.testing.assert_allclose(psi([-2.0, 0.0, 2.0]), [2.0 ** 1.5, 0.0, 2.0 ** 1.5])
        self.assertEqual(psi.dimension, 1)

    def test_stable_index_range(self):
        """Test that indices outside (0, 2] are rejected."""
        for alpha in (0.0, -1.0, 2.5):
            with self.subTest(alpha=alpha):
                with self.assertRaises(ParameterError):
                    StableExponent(alpha)

    def test_stable_triplet(self):
        """Test that α < 2 has a symmetric density and α = 2 is Gaussian with Q = 2."""
        jumps = StableExponent(1.2).triplet()
        brownian = StableExponent(2.0).triplet()

        self.assertIsInstance(jumps.jump_measure, JumpDensity)
        self.assertTrue(jumps.jump_measure.symmetric)
        self.assertIsNone(brownian.jump_measure)
        np.testing.assert_allclose(brownian.diffusion, [[2.0]])

    def test_stable_density_plane_unsupported(self):
        """Test that stable jump densities are restricted to the line."""
        with self.assertRaises(ParameterError):
            StableExponent(1.5, dimension=2).triplet()

    def test_gaussian(self):
        """Test that the Gaussian exponent is ½ ξ·Qξ."""
        psi = GaussianExponent(covariance=[[2.0, 0.0], [0.0, 4.0]])

        np.testing.assert_allclose(psi([[1.0, 1.0]]), [3.0])
        self.assertEqual(psi.dimension, 2)

    def test_gaussian_not_semidefinite(self):
        """Test that an indefinite covariance is rejected."""
        with self.assertRaises(ParameterError):
            GaussianExponent(covariance=[[1.0, 0.0], [0.0, -1.0]])

    def test_relativistic(self):
        """Test that the relativistic exponent vanishes at 0 and grows like |ξ|^ϱ."""
        psi = RelativisticStableExponent(1.0, mass=1.0)

        self.assertAlmostEqual(psi(0.0)[0].real, 0.0)
        self.assertAlmostEqual(psi(1.0)[0].real, np.sqrt(2.0) - 1.0)
        big = psi(1e4)[0].real
        self.assertAlmostEqual(big / 1e4, 1.0, places=3)

    def test_relativistic_validation(self):
        """Test the relativistic parameter ranges."""
        with self.assertRaises(ParameterError):
            RelativisticStableExponent(2.0)
        with self.assertRaises(ParameterError):
            RelativisticStableExponent(1.0, mass=0.0)

    def test_relativistic_density_finite(self):
        """Test that the relativistic density is finite and positive away from 0."""
        density = RelativisticStableExponent(1.0).triplet().jump_measure
        values = density(np.array([0.1, 1.0, 10.0]))

        self.assertTrue(np.all(np.isfinite(values)))
        self.assertTrue(np.all(values > 0))
        self.assertGreater(values[0], values[1])

    def test_composite(self):
        """Test that a composite exponent is the sum of its parts."""
        psi = make_exponent({"kind": "composite", "parts": [{"kind": "stable", "alpha": 1.0},
                                                            {"kind": "gaussian", "covariance": 2.0}]})

        self.assertIsInstance(psi, CompositeExponent)
        np.testing.assert_allclose(psi(2.0), [2.0 + 4.0])
        triplet = psi.triplet()
        np.testing.assert_allclose(triplet.diffusion, [[2.0]])
        self.assertIsNotNone(triplet.jump_measure)

    def test_composite_validation(self):
        """Test that empty or mixed-dimension composites are rejected."""
        with self.assertRaises(ParameterError):
            CompositeExponent([])
        with self.assertRaises(ParameterError):
            CompositeExponent([StableExponent(1.0), StableExponent(1.0, dimension=2)])

    def test_zero(self):
        """Test the exponent of the constant process."""
        psi = make_exponent({"kind": "zero"})

        self.assertIsInstance(psi, ZeroExponent)
        np.testing.assert_allclose(psi([1.0, 5.0]), [0.0, 0.0])

    def test_to_dict_round_trip(self):
        """Test that to_dict rebuilds the same exponent."""
        psi = make_exponent({"kind": "relativistic", "rho": 0.5, "mass": 2.0})

        self.assertEqual(make_exponent(psi.to_dict()).to_dict(), psi.to_dict())

    def test_unknown_kind(self):
        """Test that unknown kinds raise a ParameterError."""
        with self.assertRaises(ParameterError):
            make_exponent({"kind": "cauchy"})
        with self.assertRaises(ParameterError):
            make_exponent({"kind": "stable", "index": 1.0})


if __name__ == '__main__':
    unittest.main()
