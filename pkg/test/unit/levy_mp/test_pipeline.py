import json
import os
import tempfile
import unittest

import pandas as pd

from levy_mp.config import config
from levy_mp.exceptions import ConfigError
from levy_mp.levy_core import Verdict
from levy_mp.pipeline import SCHEMA_VERSION, Experiment, load_experiment
from levy_mp.utils import dumps


def _drift_spec(**checks):
    """Deterministic paths X_t = t (no noise) with the given checks."""
    return {
        "scheme": {"kind": "sde", "drift": 1.0, "sigma": 0.0, "driver": {"kind": "stable", "alpha": 2.0},
                   "initial": 0.0, "n_paths": 2, "horizon": 1.0, "dt": 0.01, "seed": 5},
        "checks": checks,
    }


_MARTINGALE = {"type": "martingale", "f": {"kind": "gaussian", "a": 1.0}, "s": 0.0, "t": 1.0}


class TestExperimentSetup(unittest.TestCase):
    """Test cases for reading and validating experiment files."""

    def test_unknown_section(self):
        """Test that unknown sections are rejected."""
        with self.assertRaises(ConfigError) as context:
            Experiment({**_drift_spec(), "plots": {}})

        self.assertIn("plots", str(context.exception))

    def test_seed_required(self):
        """Test that a scheme without a seed is rejected."""
        spec = _drift_spec()
        del spec["scheme"]["seed"]
        with self.assertRaises(ConfigError):
            Experiment(spec)

    def test_out_dir(self):
        """Test the output directory precedence."""
        self.assertEqual(Experiment(_drift_spec()).out_dir, "results")
        self.assertEqual(Experiment({**_drift_spec(), "output": {"dir": "a"}}).out_dir, "a")
        self.assertEqual(Experiment({**_drift_spec(), "output": {"dir": "a"}}, out_dir="b").out_dir, "b")

    def test_load_missing_file(self):
        """Test that a missing file is a ConfigError."""
        with self.assertRaises(ConfigError):
            load_experiment("no/such/experiment.toml")

    def test_load_invalid_toml(self):
        """Test that a malformed file is a ConfigError."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.toml")
            with open(path, "w", encoding="utf-8") as f:
                f.write("[scheme\nseed = 1\n")
            with self.assertRaises(ConfigError):
                load_experiment(path)

    def test_load_experiment(self):
        """Test that a TOML file parses into nested tables."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "drift.toml")
            with open(path, "w", encoding="utf-8") as f:
                f.write('[scheme]\ndrift = 1.0\nseed = 3\n\n[checks.m]\ntype = "martingale"\ns = 0.0\nt = 1.0\n')
            spec = load_experiment(path)

        self.assertEqual(spec["scheme"]["seed"], 3)
        self.assertEqual(spec["checks"]["m"]["type"], "martingale")


class TestExperimentRun(unittest.TestCase):
    """Test cases for running experiments."""

    def setUp(self):
        """Save the configuration."""
        self.original = config.snapshot()

    def tearDown(self):
        """Restore the configuration."""
        config.set(**self.original)

    def test_matching_symbol(self):
        """Test that the scheme's own symbol passes the martingale check."""
        experiment = Experiment(_drift_spec(martingale=_MARTINGALE))
        experiment.run()

        self.assertListEqual(list(experiment.results), ["martingale"])
        self.assertEqual(experiment.results["martingale"].verdict, Verdict.PASS)
        self.assertEqual(experiment.exit_code, 0)
        self.assertListEqual(list(experiment.ensembles), ["base"])

    def test_symbol_override_fails(self):
        """Test that a [symbol] section with the reversed drift fails."""
        spec = _drift_spec(martingale=_MARTINGALE)
        spec["symbol"] = {"kind": "sde_symbol", "drift": -1.0, "sigma": 0.0}
        experiment = Experiment(spec)
        experiment.run()

        self.assertEqual(experiment.results["martingale"].verdict, Verdict.FAIL)
        self.assertEqual(experiment.exit_code, 1)

    def test_mollify_levels(self):
        """Test that each mollification level gets its own ensemble and check id."""
        spec = _drift_spec(martingale=_MARTINGALE)
        spec["scheme"].update(drift={"kind": "sign", "scale": -1.0}, mollify_levels=[4, 8])
        experiment = Experiment(spec)
        experiment.run()

        self.assertListEqual(list(experiment.results), ["martingale@n=4", "martingale@n=8"])
        self.assertListEqual(sorted(experiment.ensembles), ["n=4", "n=8"])
        self.assertEqual(experiment.exit_code, 0)

    def test_several_checks(self):
        """Test conditions, maximal and harmonic checks on the drift paths."""
        experiment = Experiment(_drift_spec(
            bounded={"type": "conditions", "which": "LOCAL_BOUNDED", "R_grid": [1.0, 2.0]},
            maximal={"type": "maximal", "r": 0.5, "R": 2.0, "t": 1.0},
            exit={"type": "harmonic", "g": 1.0, "x": 0.0, "radius": 0.5, "T_max": 1.0, "expected": 1.0},
        ))
        experiment.run()

        self.assertListEqual(list(experiment.results), ["bounded", "maximal", "exit"])
        for check_id, result in experiment.results.items():
            with self.subTest(check_id=check_id):
                self.assertEqual(result.verdict, Verdict.PASS)
        self.assertListEqual(experiment.scoreboard["check_id"].tolist(), ["bounded", "maximal", "exit"])

    def test_settings_apply_during_run(self):
        """Test that [settings] overrides are reported and restored afterwards."""
        spec = _drift_spec(martingale=_MARTINGALE)
        spec["settings"] = {"mc_sigmas": 4.0}
        experiment = Experiment(spec)
        experiment.run()

        self.assertEqual(experiment.report["config"]["mc_sigmas"], 4.0)
        self.assertEqual(config.mc_sigmas, self.original["mc_sigmas"])

    def test_unknown_setting(self):
        """Test that an unknown settings key is rejected and the configuration left alone."""
        spec = _drift_spec(martingale=_MARTINGALE)
        spec["settings"] = {"colour": "blue"}
        with self.assertRaises(ConfigError):
            Experiment(spec).run()

        self.assertEqual(config.snapshot(), self.original)

    def test_malformed_checks(self):
        """Test unknown check types, missing keys and checks without their prerequisites."""
        bad = {
            "unknown type": {"type": "histogram"},
            "missing key": {"type": "martingale", "s": 0.0, "t": 1.0},
            "no levels": {"type": "generator_gap", "f": {"kind": "gaussian"}, "gamma0": 1.0, "gamma_inf": 1.0},
        }
        for name, check in bad.items():
            with self.subTest(name=name):
                with self.assertRaises(ConfigError):
                    Experiment(_drift_spec(check=check)).run()

    def test_deterministic(self):
        """Test that the same file gives the same report."""
        reports = []
        for _ in range(2):
            experiment = Experiment(_drift_spec(martingale=_MARTINGALE))
            experiment.run()
            reports.append(dumps(experiment.report))

        self.assertEqual(reports[0], reports[1])


class TestExperimentWrite(unittest.TestCase):
    """Test cases for writing reports."""

    def test_write_before_run(self):
        """Test that write() needs a finished run."""
        with self.assertRaises(ConfigError):
            Experiment(_drift_spec()).write()

    def test_write(self):
        """Test report.json, scoreboard.csv and run_info.json."""
        experiment = Experiment(_drift_spec(martingale=_MARTINGALE))
        experiment.run()
        with tempfile.TemporaryDirectory() as tmp:
            out = experiment.write(os.path.join(tmp, "out"))
            with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
                report = json.load(f)
            with open(os.path.join(out, "run_info.json"), encoding="utf-8") as f:
                run_info = json.load(f)
            board = pd.read_csv(os.path.join(out, "scoreboard.csv"))

        self.assertEqual(report["schema_version"], SCHEMA_VERSION)
        self.assertEqual(report["summary"]["pass"], 1)
        self.assertIn("martingale", report["results"])
        self.assertNotIn("threads", report["config"])
        self.assertIn("timestamp", run_info)
        self.assertListEqual(board["check_id"].tolist(), ["martingale"])


if __name__ == '__main__':
    unittest.main()
