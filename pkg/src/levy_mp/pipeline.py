"""Config-driven verification experiments.

An experiment file declares a scheme (optionally mollified at several levels),
an optional symbol to verify against, and a list of checks.  Running it
simulates one ensemble per mollification level, evaluates every check and
collects the CheckResults in a scoreboard.

Experiment files are TOML with the sections ``[scheme]``, ``[symbol]``,
``[checks.<name>]``, ``[settings]`` (configuration overrides for the run) and
``[output]``.  Seeds are mandatory so that a run can always be repeated.

Key Features:
    * One ensemble per mollification level, all drawn from the same seed
    * Check types: conditions, martingale, maximal, containment, krylov, generator_gap,
      resolvent_identity and harmonic
    * Per-level check ids suffixed with ``@n=<level>``
    * Reports written with sorted keys; timestamps kept in a separate run_info.json

Classes:
    Experiment: Runs one experiment file and holds its results.

Example::

    >>> from levy_mp.pipeline import Experiment, load_experiment
    >>> experiment = Experiment(load_experiment("configs/stable_sde_borel.toml"), out_dir="results")
    >>> experiment.run()
    >>> experiment.scoreboard[["check_id", "verdict"]]
                 check_id verdict
    0          equibounded    pass
    ...
    >>> experiment.write()
    'results'

A minimal experiment file::

    [scheme]
    kind = "sde"
    drift = { kind = "sign", scale = -1.0 }
    driver = { kind = "stable", alpha = 1.5 }
    n_paths = 20000
    horizon = 1.0
    dt = 0.01
    seed = 7

    [checks.martingale]
    type = "martingale"
    f = { kind = "bump", R = 2.0 }
    s = 0.0
    t = 0.5

See Also:
    levy_mp.verify: The checks and their verdict rule
    levy_mp.scripts: The levy-mp command line interface
"""
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from levy_mp.analysis import harmonic_mc, resolvent_identity_check
from levy_mp.catalog import make_symbol
from levy_mp.coefficients import COEFFICIENT_KINDS, Coefficient, make_coefficient
from levy_mp.config import config
from levy_mp.exceptions import ConfigError
from levy_mp.exponents import StableExponent
from levy_mp.generator import make_test_function, operator_interpolant
from levy_mp.levy_core import ConditionId, ConditionReport, SymbolField, Verdict, check_conditions
from levy_mp.mollify import mollify_coefficient
from levy_mp.simulate import Scheme, SDEScheme, SolutionEnsemble, make_scheme, simulate_ensemble
from levy_mp.utils import dumps, json_normalize
from levy_mp.verify import (CheckResult, compact_containment_profile, generator_gap, judge, krylov_check,
                            krylov_measure, martingale_residual, maximal_inequality_check, scoreboard,
                            sde_exponents)

__all__ = ["SCHEMA_VERSION", "CHECK_TYPES", "load_experiment", "Experiment"]

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SECTIONS = ("scheme", "symbol", "checks", "settings", "output")
_RUN_KEYS = ("initial", "n_paths", "horizon", "dt", "seed", "mollify_levels")
_DECAY_CONDITIONS = (ConditionId.CONT_AT_ZERO, ConditionId.C2_EQUICONTINUOUS)
_FAMILY_CONDITIONS = (ConditionId.C1_EQUIBOUNDED, ConditionId.C2_EQUICONTINUOUS)


def load_experiment(path: str) -> Dict[str, Any]:
    """Read an experiment file.

    Raises:
        ConfigError: when the file is missing, is not valid TOML or has unknown sections
    """
    try:
        with open(path, "rb") as f:
            spec = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Experiment file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e
    return spec


def _require(params: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in params:
        raise ConfigError(f"'{where}' is missing the required key '{key}'")
    return params[key]


def _point_function(spec: Any) -> Callable:
    """A coefficient (step, indicator, ...) or a test function, whichever the ``kind`` names."""
    if isinstance(spec, (int, float)) or (isinstance(spec, Mapping) and spec.get("kind") in COEFFICIENT_KINDS):
        return make_coefficient(spec)
    return make_test_function(spec)


def _mollified(spec: Any, n: int) -> Coefficient:
    coef = make_coefficient(spec)
    return coef if coef.name == "constant" else mollify_coefficient(coef, n)


def _condition_result(check_id: str, report: ConditionReport) -> CheckResult:
    """A condition report as a scoreboard row: the sup at the largest radius against the sup at the smallest."""
    values = [v for _, v in report.sup_values]
    bound = values[0] if report.condition_id in _DECAY_CONDITIONS else math.inf
    return CheckResult(check_id, values[-1], bound, 0.0, report.verdict, "bound", 0.0, {"report": report.to_dict()})


@dataclass(frozen=True)
class _Level:
    """One mollification level (label None without mollification) with its scheme and verification symbol."""
    label: Optional[str]
    n: Optional[int]
    scheme: Optional[Scheme]
    symbol: SymbolField


class Experiment:
    """A class for running an experiment file and holding the results.

    Results are stored in ``results`` (check id to CheckResult, in the order of the file), the simulated
    ensembles in ``ensembles`` (keyed by level label) and the scoreboard DataFrame in ``scoreboard``.
    """

    def __init__(self, spec: Mapping[str, Any], out_dir: Optional[str] = None):
        """Construct an instance for running an experiment.

        Args:
            spec: The parsed experiment file
            out_dir: Where write() puts the reports.  Taken from [output] dir (default "results") if None.

        Raises:
            ConfigError: when the file has unknown sections or the scheme has no seed
        """
        unknown = sorted(set(spec) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"Unknown experiment sections {unknown}. Known sections: {list(SECTIONS)}")
        self.spec = dict(spec)
        self.output = dict(spec.get("output", {}))
        self.out_dir = out_dir or self.output.get("dir", "results")
        self.checks: Dict[str, Dict[str, Any]] = dict(spec.get("checks", {}))
        self.scheme_spec: Optional[Dict[str, Any]] = dict(spec["scheme"]) if "scheme" in spec else None
        if self.scheme_spec is not None and "seed" not in self.scheme_spec:
            raise ConfigError("[scheme] needs a seed")

        self.results: Dict[str, CheckResult] = {}
        self.ensembles: Dict[str, SolutionEnsemble] = {}
        self.scoreboard: Optional[pd.DataFrame] = None
        self.report: Optional[Dict[str, Any]] = None
        self._levels: Optional[List[_Level]] = None

    @classmethod
    def from_file(cls, path: str, out_dir: Optional[str] = None) -> "Experiment":
        return cls(load_experiment(path), out_dir)

    @property
    def exit_code(self) -> int:
        """1 when any check failed, else 0.  Inconclusive checks do not fail a run."""
        return 1 if any(r.verdict == Verdict.FAIL for r in self.results.values()) else 0

    # Scheme and levels
    def _run_param(self, key: str) -> Any:
        if self.scheme_spec is None:
            raise ConfigError("this check needs a [scheme] section")
        return _require(self.scheme_spec, key, "scheme")

    def _scheme_body(self) -> Dict[str, Any]:
        return {k: v for k, v in self.scheme_spec.items() if k not in _RUN_KEYS}

    def _level_scheme(self, n: int) -> Scheme:
        body = self._scheme_body()
        kind = body.get("kind", "sde")
        if kind == "sde":
            for key in ("drift", "sigma"):
                if key in body:
                    body[key] = _mollified(body[key], n)
        elif kind == "stable_like":
            body["alpha"] = _mollified(_require(body, "alpha", "scheme"), n)
        return make_scheme(body)

    def levels(self) -> List[_Level]:
        """The mollification levels, or a single unlabelled level.

        A [symbol] section replaces the symbol of every level's scheme in the checks.
        """
        if self._levels is not None:
            return self._levels
        override = make_symbol(self.spec["symbol"]) if "symbol" in self.spec else None
        if self.scheme_spec is None:
            if override is None:
                raise ConfigError("an experiment needs a [scheme] or a [symbol] section")
            self._levels = [_Level(None, None, None, override)]
            return self._levels
        levels = [int(n) for n in self.scheme_spec.get("mollify_levels", [])]
        if levels:
            schemes = [(f"n={n}", n, self._level_scheme(n)) for n in levels]
        else:
            schemes = [(None, None, make_scheme(self._scheme_body()))]
        self._levels = [_Level(label, n, scheme, override or scheme.symbol()) for label, n, scheme in schemes]
        return self._levels

    def limit_symbol(self) -> SymbolField:
        """The symbol of the unmollified scheme (or the [symbol] section)."""
        if "symbol" in self.spec:
            return make_symbol(self.spec["symbol"])
        if self.scheme_spec is None:
            raise ConfigError("an experiment needs a [scheme] or a [symbol] section")
        return make_scheme(self._scheme_body()).symbol()

    def ensemble(self, level: _Level) -> SolutionEnsemble:
        """The ensemble of a level, simulated on first use."""
        key = level.label or "base"
        if key not in self.ensembles:
            if level.scheme is None:
                raise ConfigError("this check needs a [scheme] section")
            logger.info("simulating %s ensemble for level %s", self._run_param("n_paths"), key)
            self.ensembles[key] = simulate_ensemble(level.scheme, self.scheme_spec.get("initial", 0.0),
                                                    int(self._run_param("n_paths")),
                                                    float(self._run_param("horizon")), float(self._run_param("dt")),
                                                    int(self._run_param("seed")))
        return self.ensembles[key]

    @staticmethod
    def _check_id(name: str, level: _Level) -> str:
        return name if level.label is None else f"{name}@{level.label}"

    # Check types
    def _conditions(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        try:
            which = ConditionId(_require(params, "which", name))
        except ValueError as e:
            raise ConfigError(f"'{name}': {e}") from e
        R_grid = _require(params, "R_grid", name)
        density = int(params.get("xi_grid_density", 21))
        if which in _FAMILY_CONDITIONS:
            family = [level.symbol for level in self.levels()]
            return [_condition_result(name, check_conditions(family, which, R_grid, density))]
        return [_condition_result(self._check_id(name, level), check_conditions(level.symbol, which, R_grid, density))
                for level in self.levels()]

    def _martingale(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        f = make_test_function(_require(params, "f", name))
        s, t = float(_require(params, "s", name)), float(_require(params, "t", name))
        probes = [(float(_require(p, "t", name)), _point_function(_require(p, "g", name)))
                  for p in params.get("probes", [])]
        return [martingale_residual(self.ensemble(level), level.symbol, f, s, t, probes, self._check_id(name, level))
                for level in self.levels()]

    def _maximal(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        r, R, t = (float(_require(params, k, name)) for k in ("r", "R", "t"))
        return [maximal_inequality_check(self.ensemble(level), level.symbol, r, R, t, self._check_id(name, level))
                for level in self.levels()]

    def _containment(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        family = [self.ensemble(level) for level in self.levels()]
        T = float(params.get("T", self._run_param("horizon")))
        profile = compact_containment_profile(family, T, _require(params, "R_grid", name), params.get("epsilon"))
        return [profile.to_check(name)]

    def _exponents(self, name: str, params: Dict[str, Any]) -> Tuple[float, float]:
        """(γ₀, γ∞) from the check, or derived from a stable driver."""
        if "gamma0" in params and "gamma_inf" in params:
            return float(params["gamma0"]), float(params["gamma_inf"])
        scheme = make_scheme(self._scheme_body()) if self.scheme_spec is not None else None
        if not isinstance(scheme, SDEScheme) or not isinstance(scheme.driver, StableExponent):
            raise ConfigError(f"'{name}' needs gamma0 and gamma_inf unless the scheme is driven by a stable process")
        alpha = scheme.driver.alpha
        return sde_exponents(alpha, alpha, make_coefficient(self.scheme_spec.get("drift", 0.0)).bound == 0)

    def _krylov(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        u = _point_function(_require(params, "u", name))
        p, c = float(params.get("p", 1.0)), float(_require(params, "c", name))
        T = float(params.get("T", self._run_param("horizon")))
        gamma0, gamma_inf = self._exponents(name, params)
        m = krylov_measure(self.scheme_spec.get("initial", 0.0), gamma0, gamma_inf)
        breakpoints = getattr(u, "breakpoints", ())
        return [krylov_check(self.ensemble(level), u, m, p, c, T, breakpoints, self._check_id(name, level))
                for level in self.levels()]

    def _generator_gap(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        """‖A_n f - Lf‖_{L^p(m)} per level; passes when the gap at the finest level is at most the first."""
        levels = self.levels()
        if levels[0].n is None:
            raise ConfigError(f"'{name}' needs [scheme] mollify_levels")
        f = make_test_function(_require(params, "f", name))
        p = float(params.get("p", 1.0))
        gamma0, gamma_inf = self._exponents(name, params)
        m = krylov_measure(self.scheme_spec.get("initial", 0.0), gamma0, gamma_inf)
        limit = self.limit_symbol()
        window = config.generator_gap_window
        candidate = operator_interpolant(limit, f, np.array([-window, window]))
        gaps = [generator_gap([level.symbol], limit, f, m, p, candidate) for level in levels]
        meta = {"levels": [level.n for level in levels], "gaps": gaps, "p": p, "f": f.params, "measure": m.name}
        return [judge(name, gaps[-1], gaps[0], 0.0, "bound", 0.0, meta)]

    def _resolvent_identity(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        phi = make_test_function(_require(params, "phi", name))
        lam, x = float(_require(params, "lam", name)), _require(params, "x", name)
        return [resolvent_identity_check(self.ensemble(level), level.symbol, phi, lam, x,
                                         params.get("multiplier_lambda"), params.get("tail_tolerance"),
                                         self._check_id(name, level))
                for level in self.levels()]

    def _harmonic(self, name: str, params: Dict[str, Any]) -> List[CheckResult]:
        """E^x g(X_τ) for the exit from a ball, against ``expected`` when given."""
        g = _point_function(_require(params, "g", name))
        x, radius = _require(params, "x", name), float(_require(params, "radius", name))
        center = params.get("center", 0.0)
        n_paths = int(params.get("n_paths", self._run_param("n_paths")))
        dt = float(params.get("dt", self._run_param("dt")))
        seed = int(params.get("seed", self._run_param("seed")))
        T_max = float(_require(params, "T_max", name))
        results = []
        for level in self.levels():
            if level.scheme is None:
                raise ConfigError(f"'{name}' needs a [scheme] section")
            estimate = harmonic_mc(level.scheme, x, center, radius, g, n_paths, T_max, dt, seed)
            check_id = self._check_id(name, level)
            meta = {"estimate": estimate.to_dict(), "radius": radius, "center": center}
            if "expected" in params:
                result = judge(check_id, estimate.value, float(params["expected"]), estimate.std_error, "equality",
                               0.0, meta)
            else:
                result = CheckResult(check_id, estimate.value, math.inf, estimate.std_error, Verdict.PASS, "bound",
                                     0.0, meta)
            if estimate.verdict == Verdict.INCONCLUSIVE:
                result = CheckResult(result.check_id, result.statistic, result.bound_or_target, result.std_error,
                                     Verdict.INCONCLUSIVE, result.kind, result.budget, result.metadata)
            results.append(result)
        return results

    def run(self):
        """Run every check of the experiment in file order.

        Results will be stored in the results, ensembles, scoreboard and report fields.  [settings] overrides
        apply for the duration of the run.

        Raises:
            ConfigError: when a check is malformed or a settings key is unknown
            ParameterError: when a catalog, scheme or test-function parameter is rejected
            PreconditionError: when a check is called outside its preconditions
            SimulationBlowUp: when a path leaves every compact set
            QuadratureError: when a quadrature does not converge
        """
        saved = config.snapshot()
        try:
            config.set(**self.spec.get("settings", {}))
            self.results = {}
            for name, params in self.checks.items():
                if not isinstance(params, Mapping):
                    raise ConfigError(f"[checks.{name}] must be a table")
                kind = params.get("type", name)
                if kind not in CHECK_TYPES:
                    raise ConfigError(f"Unknown check type '{kind}' in [checks.{name}]. Known types: {CHECK_TYPES}")
                for result in getattr(self, f"_{kind}")(name, dict(params)):
                    self.results[result.check_id] = result
            self.scoreboard = scoreboard(self.results)
            self.report = self._build_report()
        finally:
            config.set(**saved)
        logger.info("experiment finished: %d checks, exit code %d", len(self.results), self.exit_code)

    def _build_report(self) -> Dict[str, Any]:
        settings = config.snapshot()
        settings.pop("threads", None)
        counts = {v.value: sum(r.verdict == v for r in self.results.values()) for v in Verdict}
        return json_normalize({
            "schema_version": SCHEMA_VERSION,
            "config": settings,
            "experiment": self.spec,
            "results": {k: r.to_dict() for k, r in self.results.items()},
            "ensembles": {k: e.metadata() for k, e in self.ensembles.items()},
            "summary": counts,
        })

    def write(self, out_dir: Optional[str] = None) -> str:
        """Write report.json, scoreboard.csv and run_info.json (and the ensembles if [output] asks for them).

        Returns:
            The output directory
        """
        if self.report is None:
            raise ConfigError("run() the experiment before writing its report")
        out = out_dir or self.out_dir
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as f:
            f.write(dumps(self.report))
        self.scoreboard.to_csv(os.path.join(out, "scoreboard.csv"), index=False)
        with open(os.path.join(out, "run_info.json"), "w", encoding="utf-8") as f:
            f.write(dumps({"timestamp": datetime.now().isoformat(), "version": _package_version(),
                           "threads": config.threads}))
        if self.output.get("save_ensembles", False):
            for key, ens in self.ensembles.items():
                ens.to_binary(os.path.join(out, f"ensemble_{key.replace('=', '')}.bin"))
        return out


CHECK_TYPES = ["conditions", "martingale", "maximal", "containment", "krylov", "generator_gap", "resolvent_identity",
               "harmonic"]


def _package_version() -> str:
    try:
        return version("levy_mp")
    except PackageNotFoundError:
        return "unknown"
