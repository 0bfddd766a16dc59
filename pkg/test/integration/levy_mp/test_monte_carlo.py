import unittest

from levy_mp.levy_core import Verdict
from levy_mp.pipeline import Experiment


def _stable_spec(alpha, checks):
    return {
        "scheme": {"kind": "stable_like", "alpha": alpha, "initial": 0.0, "n_paths": 20000, "horizon": 0.5,
                   "dt": 0.01, "seed": 99},
        "checks": checks,
    }


class TestMonteCarloAcceptance(unittest.TestCase):
    """Monte Carlo checks on processes whose law is known."""

    def test_stable_martingale(self):
        """Test that α-stable paths solve the martingale problem of |ξ|^α."""
        experiment = Experiment(_stable_spec(1.5, {
            "martingale": {"type": "martingale", "f": {"kind": "gaussian", "a": 1.0}, "s": 0.0, "t": 0.5},
        }))
        experiment.run()

        self.assertEqual(experiment.results["martingale"].verdict, Verdict.PASS)

    def test_brownian_maximal_inequality(self):
        """Test the maximal inequality for Brownian motion with variance 2t."""
        experiment = Experiment({
            "scheme": {"kind": "sde", "driver": {"kind": "stable", "alpha": 2.0}, "n_paths": 20000,
                       "horizon": 1.0, "dt": 0.01, "seed": 3},
            "checks": {"maximal": {"type": "maximal", "r": 0.5, "R": 2.0, "t": 1.0}},
        })
        experiment.run()

        result = experiment.results["maximal"]
        self.assertEqual(result.verdict, Verdict.PASS)
        self.assertGreater(result.statistic, 0.0)


if __name__ == '__main__':
    unittest.main()
