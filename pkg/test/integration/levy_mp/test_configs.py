import json
import os
import tempfile
import unittest
from io import StringIO
from unittest.mock import patch

from levy_mp.config import config
from levy_mp.levy_core import Verdict
from levy_mp.pipeline import Experiment
from levy_mp.scripts import main

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "..", "configs")


def _config_path(name):
    return os.path.join(CONFIG_DIR, name)


class TestBundledConfigs(unittest.TestCase):
    """Run the experiment files shipped in configs/."""

    def test_stable_sde_borel(self):
        """Test that the mollified Borel drift experiment passes at every level."""
        experiment = Experiment.from_file(_config_path("stable_sde_borel.toml"))
        experiment.run()

        for level in ("n=4", "n=16", "n=64"):
            self.assertIn(f"martingale@{level}", experiment.results)
            self.assertIn(f"krylov@{level}", experiment.results)
        self.assertIn("containment", experiment.results)
        self.assertIn("generator_gap", experiment.results)
        failed = [k for k, r in experiment.results.items() if r.verdict == Verdict.FAIL]
        self.assertListEqual(failed, [])
        self.assertEqual(experiment.exit_code, 0)

    def test_negative_control(self):
        """Test that paths checked against the reversed drift fail the martingale check."""
        experiment = Experiment.from_file(_config_path("negative_control.toml"))
        experiment.run()

        result = experiment.results["martingale"]
        self.assertEqual(result.verdict, Verdict.FAIL)
        self.assertGreater(abs(result.statistic), result.budget + 3 * result.std_error)
        self.assertEqual(experiment.exit_code, 1)

    def test_command_line(self):
        """Test the exit codes of levy-mp run on both files."""
        for name, expected in (("stable_sde_borel.toml", 0), ("negative_control.toml", 1)):
            with self.subTest(name=name):
                with tempfile.TemporaryDirectory() as tmp:
                    with patch('sys.stdout', new_callable=StringIO) as mock_stdout:
                        with self.assertRaises(SystemExit) as context:
                            main(['run', _config_path(name), '--out', tmp])
                    self.assertTrue(os.path.exists(os.path.join(tmp, "report.json")))
                    self.assertTrue(os.path.exists(os.path.join(tmp, "scoreboard.csv")))

                self.assertEqual(context.exception.code, expected)
                self.assertIn("Successfully saved results to", mock_stdout.getvalue())


class TestDeterminism(unittest.TestCase):
    """Reports depend on the seed only, not on the thread count."""

    def setUp(self):
        """Save the configuration."""
        self.original = config.snapshot()

    def tearDown(self):
        """Restore the configuration."""
        config.set(**self.original)

    def test_report_independent_of_threads(self):
        """Test that report.json is byte-identical for 1 and 4 worker threads."""
        reports = []
        for threads in (1, 4):
            config.set(threads=threads)
            experiment = Experiment.from_file(_config_path("negative_control.toml"))
            experiment.run()
            with tempfile.TemporaryDirectory() as tmp:
                experiment.write(tmp)
                with open(os.path.join(tmp, "report.json"), encoding="utf-8") as f:
                    reports.append(f.read())

        self.assertEqual(reports[0], reports[1])
        self.assertEqual(json.loads(reports[0])["summary"]["fail"], 1)


if __name__ == '__main__':
    unittest.main()
