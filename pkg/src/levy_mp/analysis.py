"""Resolvents, viscosity residuals, harmonic functions and Harnack ratios.

These are the consequences of a well-posed (or merely solvable) martingale
problem that can be estimated from simulated paths:

    * the resolvent E∫_0^∞ e^{-λt} f(X_t) dt and its Fourier oracle for constant coefficients
    * the sup of the resolvent over an explicit finite family of solutions (a lower
      bound for the sup over all Markovian selections)
    * the resolvent identity φ(x) = ∫_0^∞ e^{-λt} E^x(λφ - Aφ)(X_t) dt and its
      version stopped at the first exit from a ball
    * the viscosity residual λu(x₀) - Aφ(x₀) - f(x₀) at a touching point
    * harmonic functions u(x) = E^x g(X_{τ_D}) and empirical Harnack ratios
    * sampled verification of the jump-kernel conditions of the Harnack inequality

Time integrals against e^{-λt} use exact weights for the piecewise linear
interpolant of the integrand on the simulation grid, and the part beyond the
horizon T is replaced by e^{-λT}/λ times the integrand at T.  The truncation error
is at most e^{-λT}‖h‖_∞/λ; operations refuse horizons where this exceeds the
requested tolerance.

Classes:
    ResolventEstimate: Resolvent per initial point with standard errors.
    SupResolvent: Maximum over an ensemble family, labelled as a lower bound.
    ViscosityResult: Signed residual at a touching point.
    HarmonicEstimate: Exit-position average with exit statistics.
    HarnackReport: Max/min ratio of a harmonic function over probe points.
    HarnackKernelReport: The three kernel conditions and the exponent gap flag.

Example::

    >>> from levy_mp.analysis import resolvent_mc
    >>> from levy_mp.simulate import SDEScheme, Dirac, simulate_ensemble
    >>> ens = simulate_ensemble(SDEScheme(0.0, 0.0), Dirac(0.0), n_paths=10, T=20.0, dt=0.5, master_seed=1)
    >>> round(resolvent_mc(ens, lambda x: 3.0 + 0 * x, 1.0, tail_tolerance=1e-8).value, 10)
    3.0

See Also:
    levy_mp.verify: Checks and the CheckResult verdict rule
    levy_mp.simulate: Ensembles and exit simulation
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from levy_mp.config import config
from levy_mp.exceptions import ParameterError, PreconditionError, QuadratureError
from levy_mp.exponents import LevyExponent, make_exponent
from levy_mp.generator import TestFunction, apply_integro, fourier_integral, operator_interpolant
from levy_mp.levy_core import ConditionId, ConditionReport, SymbolField, Verdict
from levy_mp.simulate import Scheme, SolutionEnsemble, make_scheme, simulate_until_exit
from levy_mp.utils import (as_point, evaluate_on_points, inputs_hash, json_normalize, mean_and_error, odd_linspace,
                           records_frame)
from levy_mp.verify import CheckResult, judge

__all__ = ["resolvent_weights", "ResolventEstimate", "resolvent_mc", "resolvent_fourier", "SupResolvent",
           "sup_resolvent", "resolvent_identity_check", "exit_decomposition", "ViscosityResult",
           "viscosity_residual", "HarmonicEstimate", "harmonic_mc", "HarnackReport", "harnack_ratio",
           "HarnackKernelReport", "check_harnack_kernel"]

logger = logging.getLogger(__name__)

SELECTION_LABEL = "lower bound for the selection sup"


def _interval_weights(times: np.ndarray, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """Weights of the left and right endpoint of each grid interval in ∫ e^{-λt} h(t) dt, h piecewise linear."""
    a = times[:-1]
    h = np.diff(times)
    q = lam * h
    e = np.exp(-lam * a)
    right = e * (-np.expm1(-q) - q * np.exp(-q)) / (lam * q)
    left = e * (-np.expm1(-q)) / lam - right
    return left, right


def resolvent_weights(times: np.ndarray, lam: float) -> np.ndarray:
    """Grid weights w with Σ w_k h(t_k) = ∫_0^T e^{-λt} h(t) dt for the piecewise linear interpolant of h.

    The weights sum to (1 - e^{-λT})/λ.
    """
    if not lam > 0:
        raise ParameterError(f"need lambda > 0, got {lam}")
    times = np.asarray(times, dtype=float)
    weights = np.zeros(times.size)
    if times.size > 1:
        left, right = _interval_weights(times, lam)
        weights[:-1] += left
        weights[1:] += right
    return weights


def _discounted(values: np.ndarray, times: np.ndarray, lam: float) -> np.ndarray:
    """Per-path ∫_0^T e^{-λt} h dt plus the tail e^{-λT}/λ·h(T); values has shape (N, n_t)."""
    tail = math.exp(-lam * times[-1]) / lam
    return values @ resolvent_weights(times, lam) + tail * values[:, -1]


def _tail_guard(lam: float, horizon: float, sup: float, tolerance: Optional[float]) -> float:
    tol = config.resolvent_tail_tolerance if tolerance is None else tolerance
    bound = math.exp(-lam * horizon) * sup / lam
    if bound > tol:
        need = math.log(max(sup, 1e-300) / (lam * tol)) / lam
        raise PreconditionError(f"horizon T={horizon:g} is too short: truncation bound {bound:.3g} exceeds {tol:.3g} "
                                f"(need T >= {need:.4g})")
    return bound


def _starts(ens: SolutionEnsemble) -> Tuple[np.ndarray, np.ndarray]:
    return np.unique(ens.states[:, 0], axis=0, return_inverse=True)


@dataclass(frozen=True)
class ResolventEstimate:
    """E^x ∫_0^∞ e^{-λt} f(X_t) dt for every distinct initial point x of an ensemble."""
    points: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    counts: np.ndarray
    lam: float
    horizon: float
    tail_bound: float

    @property
    def value(self) -> float:
        """The estimate of an ensemble with a single initial point."""
        if self.values.size != 1:
            raise PreconditionError(f"the ensemble has {self.values.size} initial points")
        return float(self.values[0])

    @property
    def std_error(self) -> float:
        if self.std_errors.size != 1:
            raise PreconditionError(f"the ensemble has {self.std_errors.size} initial points")
        return float(self.std_errors[0])

    def to_frame(self) -> pd.DataFrame:
        records = [{"point": p[0] if p.size == 1 else p.tolist(), "estimate": v, "std_error": s, "paths": int(c)}
                   for p, v, s, c in zip(self.points, self.values, self.std_errors, self.counts)]
        return records_frame(records, ["point", "estimate", "std_error", "paths"])

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"points": self.points, "values": self.values, "std_errors": self.std_errors,
                               "counts": self.counts, "lam": self.lam, "horizon": self.horizon,
                               "tail_bound": self.tail_bound})


def _path_values(ens: SolutionEnsemble, fn: Any) -> np.ndarray:
    return evaluate_on_points(fn, ens.states.reshape(-1, ens.dimension)).reshape(ens.states.shape[:2])


def resolvent_mc(ens: SolutionEnsemble, f: Any, lam: float, f_bound: Optional[float] = None,
                 tail_tolerance: Optional[float] = None) -> ResolventEstimate:
    """Monte Carlo estimate of E^x ∫_0^∞ e^{-λt} f(X_t) dt, grouped by initial point.

    Args:
        ens: The ensemble
        f: Bounded continuous f ≥ 0 (vectorized callable or test function)
        lam: λ > 0
        f_bound: ‖f‖_∞; taken from ``f.sup_norm`` when available, else from the sampled values
        tail_tolerance: Largest accepted e^{-λT}‖f‖_∞/λ, config.resolvent_tail_tolerance if None

    Raises:
        PreconditionError: when the horizon is too short for the tolerance
    """
    values = _path_values(ens, f)
    sup = f_bound if f_bound is not None else getattr(f, "sup_norm", None)
    sup = float(np.max(np.abs(values))) if sup is None else float(sup)
    tail = _tail_guard(lam, ens.horizon, sup, tail_tolerance)
    per_path = _discounted(values, ens.times, lam)
    points, owner = _starts(ens)
    stats = [mean_and_error(per_path[owner == j]) for j in range(points.shape[0])]
    counts = np.bincount(owner, minlength=points.shape[0])
    return ResolventEstimate(points, np.array([s[0] for s in stats]), np.array([s[1] for s in stats]), counts,
                             float(lam), ens.horizon, tail)


def resolvent_fourier(psi: Union[LevyExponent, Dict[str, Any], Callable], f: TestFunction, lam: float,
                      x: float) -> float:
    """u(x) = ∫ e^{ixξ} f̂(ξ)/(λ + ψ(ξ)) dξ, the resolvent of a Lévy process with exponent ψ.

    Raises:
        QuadratureError: when the frequency integral does not converge or has an imaginary residual
    """
    if not lam > 0:
        raise ParameterError(f"need lambda > 0, got {lam}")
    psi = psi if callable(psi) and not isinstance(psi, dict) else make_exponent(psi)
    value = fourier_integral(f, float(x), lambda eta: 1.0 / (lam + np.asarray(psi(eta), dtype=complex)))
    if abs(value.imag) > 1e-6 * (1 + abs(value.real)):
        raise QuadratureError(f"resolvent of {f.name} at x={x} has imaginary residual {value.imag:.3g}",
                              {"real": value.real, "imag": value.imag})
    return float(value.real)


@dataclass(frozen=True)
class SupResolvent:
    """max over an explicit family of solutions of the resolvent at x."""
    value: float
    std_error: float
    argmax: int
    values: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    point: np.ndarray
    lam: float
    label: str = SELECTION_LABEL

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"value": self.value, "std_error": self.std_error, "argmax": self.argmax,
                               "values": self.values, "std_errors": self.std_errors, "point": self.point,
                               "lam": self.lam, "label": self.label})


def sup_resolvent(ensembles: Sequence[SolutionEnsemble], f: Any, lam: float, f_bound: Optional[float] = None,
                  tail_tolerance: Optional[float] = None) -> SupResolvent:
    """The largest resolvent over a finite family of solutions started at the same point.

    The family is a finite surrogate for the set of all solutions, so the result is a lower bound for the sup
    over all Markovian selections.

    Raises:
        ParameterError: when the family is empty
        PreconditionError: when the ensembles do not share a single initial point
    """
    family = list(ensembles)
    if not family:
        raise ParameterError("sup_resolvent needs at least one ensemble")
    estimates = [resolvent_mc(ens, f, lam, f_bound, tail_tolerance) for ens in family]
    points = [e.points for e in estimates]
    if any(p.shape[0] != 1 for p in points) or any(not np.allclose(p, points[0]) for p in points):
        raise PreconditionError("all ensembles must start from the same single point")
    values = tuple(e.value for e in estimates)
    best = int(np.argmax(values))
    logger.info("selection sup at x=%s over %d solutions: %.6g (%s)", points[0][0], len(family), values[best],
                SELECTION_LABEL)
    return SupResolvent(values[best], estimates[best].std_error, best, values,
                        tuple(e.std_error for e in estimates), points[0][0], float(lam))


def _dirac_start(ens: SolutionEnsemble, x: Any) -> np.ndarray:
    point = as_point(x, ens.dimension)
    if not np.allclose(ens.states[:, 0], point[None, :]):
        raise PreconditionError(f"the ensemble is not started at x={point.tolist()}")
    return point


def resolvent_identity_check(ens: SolutionEnsemble, sym: SymbolField, phi: TestFunction, lam: float, x: Any,
                             multiplier_lambda: Optional[float] = None, tail_tolerance: Optional[float] = None,
                             check_id: str = "resolvent_identity") -> CheckResult:
    """φ(x) = ∫_0^∞ e^{-λt} E^x(λ'φ - Aφ)(X_t) dt with λ' = λ unless ``multiplier_lambda`` is given.

    The budget is config.martingale_budget_factor·‖φ‖_(2)·dt plus the truncation bound.

    Raises:
        PreconditionError: when the ensemble is not started at x or the horizon is too short
    """
    point = _dirac_start(ens, x)
    lam_prime = lam if multiplier_lambda is None else float(multiplier_lambda)
    flat = ens.states.reshape(-1, ens.dimension)
    af = operator_interpolant(sym, phi, flat)(flat).reshape(ens.states.shape[:2])
    values = lam_prime * _path_values(ens, phi) - af
    sup = lam_prime * phi.sup_norm + float(np.max(np.abs(af)))
    tail = _tail_guard(lam, ens.horizon, sup, tail_tolerance)
    mean, se = mean_and_error(_discounted(values, ens.times, lam))
    target = float(phi.value(point if ens.dimension > 1 else point[0]))
    budget = config.martingale_budget_factor * phi.norm_2 * ens.dt + tail
    meta = {"inputs": inputs_hash(ensemble=ens.digest(), symbol=sym, phi=phi.params, lam=lam, lam_prime=lam_prime),
            "lam": lam, "multiplier_lambda": lam_prime, "x": point, "tail_bound": tail}
    return judge(check_id, mean, target, se, "equality", budget, meta)


def exit_decomposition(ens: SolutionEnsemble, sym: SymbolField, phi: TestFunction, lam: float, r: float,
                       check_id: str = "exit_decomposition") -> CheckResult:
    """E∫_0^τ e^{-λt}(λφ - Aφ)(X_t) dt + E e^{-λτ}φ(X_τ) = φ(x).

    τ is the first grid exit from B(x, r), capped at time r.

    Raises:
        PreconditionError: when the ensemble does not start at a single point or its horizon is shorter than r
    """
    if not r > 0:
        raise ParameterError(f"need r > 0, got {r}")
    points, _ = _starts(ens)
    if points.shape[0] != 1:
        raise PreconditionError("the stopped decomposition needs an ensemble started at one point")
    x = points[0]
    if r > ens.horizon * (1 + 1e-12):
        raise PreconditionError(f"horizon {ens.horizon:g} is shorter than the time cap r={r:g}")
    # last grid time not after r
    cap = min(int(math.floor(r / ens.dt + 1e-9)), ens.times.size - 1)
    window = ens.states[:, :cap + 1]
    outside = np.linalg.norm(window - x[None, None, :], axis=2) >= r
    stop = np.where(outside.any(axis=1), outside.argmax(axis=1), cap)
    flat = window.reshape(-1, ens.dimension)
    af = operator_interpolant(sym, phi, flat)(flat).reshape(window.shape[:2])
    phi_values = evaluate_on_points(phi, flat).reshape(window.shape[:2])
    values = lam * phi_values - af
    left, right = _interval_weights(ens.times[:cap + 1], lam)
    steps = np.arange(cap)[None, :] < stop[:, None]
    running = np.sum(steps * (left[None, :] * values[:, :-1] + right[None, :] * values[:, 1:]), axis=1)
    rows = np.arange(ens.n_paths)
    stopped = np.exp(-lam * ens.times[stop]) * phi_values[rows, stop]
    mean, se = mean_and_error(running + stopped)
    budget = config.martingale_budget_factor * phi.norm_2 * ens.dt
    target = float(evaluate_on_points(phi, x[None, :])[0])
    meta = {"inputs": inputs_hash(ensemble=ens.digest(), symbol=sym, phi=phi.params, lam=lam, r=r),
            "exit_fraction": float(np.mean(outside.any(axis=1))), "r": r, "lam": lam}
    return judge(check_id, mean, target, se, "equality", budget, meta)


@dataclass(frozen=True)
class ViscosityResult:
    """λu(x₀) - Aφ(x₀) - f(x₀) at a point where u - φ is extremal."""
    residual: float
    mode: str
    x0: float
    operator_value: float
    extremum_gap: float
    tolerance: float
    verdict: Verdict

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize(self.__dict__)


def viscosity_residual(u_hat: Any, phi: TestFunction, x0: float, lam: float, f: Any, sym: SymbolField,
                       mode: str = "sub", lattice: Optional[Sequence[float]] = None,
                       tolerance: float = 1e-6) -> ViscosityResult:
    """Signed viscosity residual λu(x₀) - Aφ(x₀) - f(x₀) on the line.

    ``mode`` "sub" needs x₀ to be a lattice maximum of u - φ and expects a residual ≤ tolerance; "super" needs a
    minimum and expects ≥ -tolerance.  The default lattice spans x₀ ± 2 with 401 points.

    Raises:
        PreconditionError: when x₀ is not a lattice extremum of u - φ within the tolerance
    """
    if mode not in ("sub", "super"):
        raise ParameterError(f"mode must be 'sub' or 'super', got '{mode}'")
    if sym.dimension != 1:
        raise PreconditionError("viscosity residuals are evaluated on the real line")
    x0 = float(x0)
    xs = odd_linspace(x0 - 2.0, x0 + 2.0, 401) if lattice is None else np.asarray(lattice, dtype=float)
    xs = np.unique(np.append(xs, x0))
    diff = evaluate_on_points(u_hat, xs[:, None]) - evaluate_on_points(phi, xs[:, None])
    at = float(diff[np.searchsorted(xs, x0)])
    gap = float(np.max(diff) - at) if mode == "sub" else float(at - np.min(diff))
    if gap > tolerance:
        kind = "maximum" if mode == "sub" else "minimum"
        raise PreconditionError(f"x0={x0:g} is not a lattice {kind} of u - phi (gap {gap:.3g})")
    operator = apply_integro(sym, phi, x0)
    u0 = float(evaluate_on_points(u_hat, np.array([[x0]]))[0])
    f0 = float(evaluate_on_points(f, np.array([[x0]]))[0])
    residual = lam * u0 - operator - f0
    ok = residual <= tolerance if mode == "sub" else residual >= -tolerance
    verdict = Verdict.PASS if ok else Verdict.FAIL
    logger.info("viscosity %s-solution residual at x0=%g: %.6g -> %s", mode, x0, residual, verdict.value)
    return ViscosityResult(float(residual), mode, x0, float(operator), gap, tolerance, verdict)


@dataclass(frozen=True)
class HarmonicEstimate:
    """u(x) = E^x g(X_{τ_D}) for a ball D, with exit statistics."""
    value: float
    std_error: float
    point: np.ndarray
    exit_fraction: float
    mean_exit_time: float
    verdict: Verdict

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize(self.__dict__)


def harmonic_mc(scheme: Union[Scheme, Dict[str, Any]], x: Any, center: Any, radius: float, g: Any, n_paths: int,
                T_max: float, dt: float, master_seed: int, bridge: Optional[bool] = None,
                max_workers: Optional[int] = None) -> HarmonicEstimate:
    """Estimate u(x) = E^x g(X_{τ_D}) for D = B(center, radius).

    g is evaluated at the first grid state outside D, so jump processes keep their overshoot.  Paths that have not
    left D by T_max make the estimate inconclusive.
    """
    sample = simulate_until_exit(scheme, x, center, radius, n_paths, T_max, dt, master_seed, bridge, max_workers)
    values = evaluate_on_points(g, sample.positions)
    mean, se = mean_and_error(values)
    verdict = Verdict.PASS if sample.exit_fraction == 1.0 else Verdict.INCONCLUSIVE
    if verdict == Verdict.INCONCLUSIVE:
        logger.warning("%.4f of the paths from %s did not exit by T=%g", 1 - sample.exit_fraction, sample.start,
                       T_max)
    mean_exit = float(np.mean(sample.times[sample.exited])) if np.any(sample.exited) else math.inf
    return HarmonicEstimate(mean, se, sample.start, sample.exit_fraction, mean_exit, verdict)


@dataclass(frozen=True)
class HarnackReport:
    """max/min of u = E·g(X_{τ_{B(x₀, 2r)}}) over probe points in B(x₀, r)."""
    ratio: float
    argmax: np.ndarray
    argmin: np.ndarray
    interval: Tuple[float, float]
    points: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    verdict: Verdict

    def to_frame(self) -> pd.DataFrame:
        records = [{"point": p[0] if p.size == 1 else p.tolist(), "estimate": v, "std_error": s}
                   for p, v, s in zip(self.points, self.values, self.std_errors)]
        return records_frame(records, ["point", "estimate", "std_error"])

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize(self.__dict__)


def _child_seeds(master_seed: int, count: int) -> List[int]:
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def harnack_ratio(scheme: Union[Scheme, Dict[str, Any]], x0: Any, r: float, g: Any, n_paths: int, T_max: float,
                  dt: float, master_seed: int, probes: Optional[Sequence[Any]] = None,
                  max_workers: Optional[int] = None) -> HarnackReport:
    """Empirical Harnack ratio of the harmonic function u = E·g(X_{τ_{B(x₀, 2r)}}) over B(x₀, r).

    Probe points default to 9 equally spaced points of [x₀ - r, x₀ + r] on the line.  Each probe gets its own
    child seed of ``master_seed`` and the probes run in parallel.  The verdict is inconclusive when the minimum is
    not separated from 0 by config.mc_sigmas standard errors.
    """
    scheme = make_scheme(scheme)
    center = as_point(x0, scheme.dimension)
    if probes is None:
        if scheme.dimension != 1:
            raise ParameterError("probe points are required in higher dimensions")
        probes = odd_linspace(center[0] - r, center[0] + r, 9)
    pts = np.array([as_point(p, scheme.dimension) for p in probes])
    if np.any(np.linalg.norm(pts - center, axis=1) > r * (1 + 1e-12)):
        raise ParameterError(f"probe points must lie in the ball of radius {r}")
    seeds = _child_seeds(master_seed, len(pts))

    def run(job: Tuple[np.ndarray, int]) -> HarmonicEstimate:
        return harmonic_mc(scheme, job[0], center, 2 * r, g, n_paths, T_max, dt, job[1], max_workers=1)

    with ThreadPoolExecutor(max_workers=max_workers or config.threads) as executor:
        estimates = list(executor.map(run, zip(pts, seeds)))
    values = np.array([e.value for e in estimates])
    errors = np.array([e.std_error for e in estimates])
    hi, lo = int(np.argmax(values)), int(np.argmin(values))
    k = config.mc_sigmas
    ratio = values[hi] / values[lo] if values[lo] > 0 else math.inf
    lower = max(values[hi] - k * errors[hi], 0.0) / (values[lo] + k * errors[lo]) if values[lo] > 0 else math.inf
    denominator = values[lo] - k * errors[lo]
    upper = (values[hi] + k * errors[hi]) / denominator if denominator > 0 else math.inf
    conclusive = denominator > 0 and all(e.verdict == Verdict.PASS for e in estimates)
    verdict = Verdict.PASS if conclusive else Verdict.INCONCLUSIVE
    if not conclusive:
        logger.warning("Harnack ratio at x0=%s is inconclusive (min %.4g, SE %.3g)", center, values[lo], errors[lo])
    return HarnackReport(float(ratio), pts[hi], pts[lo], (float(lower), float(upper)), pts, values, errors, verdict)


@dataclass(frozen=True)
class HarnackKernelReport:
    """Sampled kernel conditions H1-H3 and the gap flag β - α < 1."""
    h1: ConditionReport
    h2: ConditionReport
    h3: ConditionReport
    gap_ok: bool
    verdict: Verdict
    extras: Dict[str, Any] = field(default_factory=dict)

    def reports(self) -> List[ConditionReport]:
        return [self.h1, self.h2, self.h3]

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"h1": self.h1.to_dict(), "h2": self.h2.to_dict(), "h3": self.h3.to_dict(),
                               "gap_ok": self.gap_ok, "verdict": self.verdict, "extras": self.extras})


def _signed_log_uniform(rng: np.random.Generator, low: float, high: float, size: int) -> np.ndarray:
    magnitude = np.exp(rng.uniform(math.log(low), math.log(high), size))
    return np.where(rng.uniform(size=size) < 0.5, -magnitude, magnitude)


def _kernel_report(which: ConditionId, ratio: np.ndarray, samples: Dict[str, np.ndarray], tol: float,
                   spec: Dict[str, Any]) -> ConditionReport:
    """The worst sampled ratio (≤ 1 means the inequality holds) and where it occurred."""
    worst = int(np.argmax(ratio))
    value = float(ratio[worst])
    verdict = Verdict.PASS if value <= 1.0 + tol else Verdict.FAIL
    where = {k: float(v[worst]) for k, v in samples.items()}
    return ConditionReport(which, spec, [(0.0, value)], verdict, tol, {"worst": where, "margin": 1.0 - value})


def check_harnack_kernel(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], c1: float, c2: float, c3: float,
                         c4: float, alpha: float, beta: float, tail_exponent: float, n_samples: int = 4096,
                         seed: int = 0, tolerance: Optional[float] = None) -> HarnackKernelReport:
    """Check the jump-kernel conditions of the Harnack inequality on random samples (d = 1).

    * H1: κ(x, y) ≤ c₁|y|^{-1-tail_exponent} for |y| > 2
    * H2: c₂|y|^{-1-α} ≤ κ(x, y) ≤ c₃|y|^{-1-β} for 0 < |y| ≤ 2
    * H3: κ(x, x - z) ≤ c₄ κ(y, y - z) for |x - y| ≤ 1, |x - z| ≥ 1, |y - z| ≥ 1

    The exponent of H1 is called ``tail_exponent`` to keep it apart from the kernel κ.  Base points are uniform in
    [-config.harnack_window, config.harnack_window]; H3 samples all three points there.

    Args:
        kernel: Vectorized κ(x, y) > 0
        c1, c2, c3, c4: The constants
        alpha, beta: The exponents of H2
        tail_exponent: The exponent of H1
        n_samples: Samples per condition
        seed: Seed of the sampling stream
        tolerance: Relative slack, config.condition_tolerance if None
    """
    tol = config.condition_tolerance if tolerance is None else tolerance
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    w = config.harnack_window
    spec = {"n_samples": n_samples, "window": w, "seed": seed}

    x = rng.uniform(-w, w, n_samples)
    y = _signed_log_uniform(rng, 2.0 * (1 + 1e-12), 2.0 ** 20, n_samples)
    k = np.asarray(kernel(x, y), dtype=float)
    h1 = _kernel_report(ConditionId.HARNACK_H1, k / (c1 * np.abs(y) ** (-1 - tail_exponent)), {"x": x, "y": y}, tol,
                        {**spec, "range": "|y| > 2", "c1": c1, "tail_exponent": tail_exponent})

    x = rng.uniform(-w, w, n_samples)
    y = _signed_log_uniform(rng, 2.0 ** -20, 2.0, n_samples)
    k = np.asarray(kernel(x, y), dtype=float)
    lower = c2 * np.abs(y) ** (-1 - alpha) / k
    upper = k / (c3 * np.abs(y) ** (-1 - beta))
    h2 = _kernel_report(ConditionId.HARNACK_H2, np.maximum(lower, upper), {"x": x, "y": y}, tol,
                        {**spec, "range": "0 < |y| <= 2", "c2": c2, "c3": c3, "alpha": alpha, "beta": beta})

    xs, ys, zs = [], [], []
    while sum(len(a) for a in xs) < n_samples:
        x = rng.uniform(-w, w, n_samples)
        y = np.clip(x + rng.uniform(-1.0, 1.0, n_samples), -w, w)
        z = rng.uniform(-w, w, n_samples)
        keep = (np.abs(x - y) <= 1) & (np.abs(x - z) >= 1) & (np.abs(y - z) >= 1)
        xs.append(x[keep])
        ys.append(y[keep])
        zs.append(z[keep])
    x, y, z = (np.concatenate(a)[:n_samples] for a in (xs, ys, zs))
    ratio = np.asarray(kernel(x, x - z), dtype=float) / (c4 * np.asarray(kernel(y, y - z), dtype=float))
    h3 = _kernel_report(ConditionId.HARNACK_H3, ratio, {"x": x, "y": y, "z": z}, tol,
                        {**spec, "range": "|x-y| <= 1, |x-z| >= 1, |y-z| >= 1", "c4": c4})

    gap_ok = beta - alpha < 1
    passed = all(r.verdict == Verdict.PASS for r in (h1, h2, h3)) and gap_ok
    verdict = Verdict.PASS if passed else Verdict.FAIL
    logger.info("Harnack kernel conditions: H1 %s, H2 %s, H3 %s, beta - alpha = %g", h1.verdict.value,
                h2.verdict.value, h3.verdict.value, beta - alpha)
    return HarnackKernelReport(h1, h2, h3, gap_ok, verdict, {"beta_minus_alpha": beta - alpha})
