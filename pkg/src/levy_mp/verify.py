"""Monte Carlo checks of martingale-problem solutions.

A simulated SolutionEnsemble is the empirical surrogate of a solution to the
martingale problem for a symbol q(x, ξ).  This module turns the estimates that
a solution has to satisfy into checks with explicit statistics, bounds and
standard errors:

    * the martingale residual E[∏ g_i(X_{t_i}) (f(X_t) - f(X_s) - ∫_s^t Af(X_r) dr)] = 0
    * the maximal inequality P(sup_{s≤t}|X_s| ≥ R, |X_0| ≤ r) ≤ c·t·sup_{|y|≤R, |ξ|≤1/R}|q(y, ξ)|
    * the compact containment profile R ↦ sup over a family of P(sup_{t≤T}|X_t| ≥ R)
    * the Krylov estimate E∫_0^T u(X_s) ds ≤ c‖u‖_{L^p(m)}
    * the majorants Q and S of stable-like transition densities
    * the generator gap max_n ‖A_n f - g‖_{L^p(m)} + ‖Lf - g‖_{L^p(m)}

Every check returns a CheckResult.  A bound check passes when the statistic is at
most bound + k·SE + budget, an equality check when |statistic - target| is at most
k·SE + budget, where k is config.mc_sigmas and the budget is the discretization
allowance of the check.

Classes:
    CheckResult: Statistic, bound or target, standard error and verdict.
    ContainmentProfile: Exceedance profile of an ensemble family.
    ReferenceMeasure: A measure with a density on the line.

Example::

    >>> from levy_mp.simulate import SDEScheme, Dirac, simulate_ensemble
    >>> from levy_mp.generator import make_bump
    >>> from levy_mp.verify import martingale_residual
    >>> scheme = SDEScheme(drift=0.0, sigma=1.0, driver={"kind": "stable", "alpha": 1.5})
    >>> ens = simulate_ensemble(scheme, Dirac(0.0), n_paths=20000, T=1.0, dt=1/64, master_seed=3)
    >>> result = martingale_residual(ens, scheme.symbol(), make_bump(1.0), 0.25, 1.0, [])
    >>> result.verdict.value
    'pass'

See Also:
    levy_mp.simulate: Ensembles
    levy_mp.generator: Test functions and the operator A
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate

from levy_mp.config import config
from levy_mp.exceptions import ParameterError, PreconditionError, QuadratureError
from levy_mp.generator import TestFunction, operator_interpolant, standard_bump_constant, tabulate_operator
from levy_mp.levy_core import ConditionId, SymbolField, Verdict, check_conditions
from levy_mp.simulate import InitialLaw, SolutionEnsemble, make_initial_law
from levy_mp.utils import evaluate_on_points, inputs_hash, json_normalize, mean_and_error, records_frame

__all__ = ["CheckResult", "judge", "martingale_residual", "maximal_inequality_check", "ContainmentProfile",
           "compact_containment_profile", "ReferenceMeasure", "krylov_measure", "krylov_check", "q_majorant",
           "s_majorant", "integrated_s_majorant", "sde_exponents", "generator_gap", "scoreboard"]

logger = logging.getLogger(__name__)

SCOREBOARD_COLUMNS = ["check_id", "statistic", "bound", "std_error", "verdict"]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check.

    ``kind`` is "bound" (statistic ≤ bound) or "equality" (statistic = target); ``budget`` is the discretization
    allowance added to the k·SE margin.
    """
    check_id: str
    statistic: float
    bound_or_target: float
    std_error: float
    verdict: Verdict
    kind: str = "bound"
    budget: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_error >= 0 and not math.isnan(self.std_error):
            raise ParameterError(f"standard error must be nonnegative, got {self.std_error}")

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"check_id": self.check_id, "statistic": self.statistic,
                               "bound_or_target": self.bound_or_target, "std_error": self.std_error,
                               "verdict": self.verdict, "kind": self.kind, "budget": self.budget,
                               "metadata": self.metadata})


def judge(check_id: str, statistic: float, bound_or_target: float, std_error: float, kind: str = "bound",
          budget: float = 0.0, metadata: Optional[Dict[str, Any]] = None,
          sigmas: Optional[float] = None) -> CheckResult:
    """Apply the verdict rule and log the outcome.

    A non-finite statistic is inconclusive; an infinite bound is passed automatically.
    """
    if kind not in ("bound", "equality"):
        raise ParameterError(f"Unknown check kind '{kind}'")
    k = config.mc_sigmas if sigmas is None else sigmas
    margin = k * std_error + budget
    if not np.isfinite(statistic):
        verdict = Verdict.INCONCLUSIVE
    elif kind == "bound":
        verdict = Verdict.PASS if (bound_or_target == math.inf or statistic <= bound_or_target + margin) \
            else Verdict.FAIL
    else:
        verdict = Verdict.PASS if abs(statistic - bound_or_target) <= margin else Verdict.FAIL
    result = CheckResult(check_id, float(statistic), float(bound_or_target), float(std_error), verdict, kind,
                         float(budget), dict(metadata or {}))
    level = logging.WARNING if verdict == Verdict.INCONCLUSIVE else logging.INFO
    logger.log(level, "%s: statistic %.6g vs %s %.6g (SE %.3g, budget %.3g) -> %s", check_id, statistic,
               "bound" if kind == "bound" else "target", bound_or_target, std_error, budget, verdict.value)
    return result


def _probe_weights(ens: SolutionEnsemble, probes: Sequence[Tuple[float, Any]], s: float) -> np.ndarray:
    weights = np.ones(ens.n_paths)
    for t_i, g in probes:
        if t_i > s:
            raise PreconditionError(f"probe time {t_i} is after s={s}")
        values = evaluate_on_points(g, ens.states[:, ens.index_of(t_i)])
        if np.any(values < 0) or np.any(values > 1):
            raise PreconditionError(f"probe function at t={t_i} leaves [0, 1]")
        weights = weights * values
    return weights


def martingale_residual(ens: SolutionEnsemble, sym: SymbolField, f: TestFunction, s: float, t: float,
                        probes: Sequence[Tuple[float, Any]] = (), check_id: str = "martingale") -> CheckResult:
    """Monte Carlo residual of the martingale property of f(X_t) - f(X_0) - ∫_0^t Af(X_r) dr.

    The statistic is the mean over paths of ∏ g_i(X_{t_i})(f(X_t) - f(X_s) - ∫_s^t Af(X_r) dr), with the time
    integral by the trapezoid rule on the grid and Af interpolated from a lattice table.  The target is 0 and the
    budget config.martingale_budget_factor·‖f‖_(2)·dt accounts for the time discretization.

    Args:
        ens: The ensemble
        sym: The symbol the ensemble is claimed to solve
        f: A test function
        s: Start time (a grid time)
        t: End time (a grid time, s ≤ t)
        probes: Pairs (t_i, g_i) with t_i ≤ s and 0 ≤ g_i ≤ 1
        check_id: Name used in reports

    Raises:
        PreconditionError: when a time is off the grid or out of order, or a probe leaves [0, 1]
    """
    if s > t:
        raise PreconditionError(f"need s <= t, got s={s}, t={t}")
    ks, kt = ens.index_of(s), ens.index_of(t)
    weights = _probe_weights(ens, probes, s)
    window = ens.states[:, ks:kt + 1]
    af = operator_interpolant(sym, f, window.reshape(-1, ens.dimension))
    values = af(window.reshape(-1, ens.dimension)).reshape(window.shape[:2])
    drift = integrate.trapezoid(values, ens.times[ks:kt + 1], axis=1) if kt > ks else np.zeros(ens.n_paths)
    increment = evaluate_on_points(f, ens.states[:, kt]) - evaluate_on_points(f, ens.states[:, ks])
    samples = weights * (increment - drift)
    mean, se = mean_and_error(samples)
    budget = config.martingale_budget_factor * f.norm_2 * ens.dt
    meta = {"inputs": inputs_hash(ensemble=ens.digest(), symbol=sym, f=f.params, s=s, t=t,
                                  probes=[list(p) for p in probes]),
            "n_paths": ens.n_paths, "s": s, "t": t, "f": f.name, "symbol": sym.name}
    return judge(check_id, mean, 0.0, se, "equality", budget, meta)


def maximal_inequality_check(ens: SolutionEnsemble, sym: SymbolField, r: float, R: float, t: float,
                             check_id: str = "maximal") -> CheckResult:
    """P(sup_{s≤t}|X_s| ≥ R, |X_0| ≤ r) against c·t·sup_{|y|≤R, |ξ|≤1/R}|q(y, ξ)|.

    c is the bump constant of the standard bump and the sup is the CONT_AT_ZERO lattice sup at radius R.

    Raises:
        ParameterError: unless R ≥ 2r > 0
        PreconditionError: when t is not a grid time
    """
    if not (r > 0 and R >= 2 * r):
        raise ParameterError(f"need R >= 2r > 0, got r={r}, R={R}")
    k = ens.index_of(t)
    norms = np.linalg.norm(ens.states[:, :k + 1], axis=2)
    hits = (norms.max(axis=1) >= R) & (norms[:, 0] <= r)
    p, se = mean_and_error(hits.astype(float))
    sup = check_conditions(sym, ConditionId.CONT_AT_ZERO, [R]).sup_values[0][1]
    c = standard_bump_constant()
    bound = c * t * sup
    meta = {"inputs": inputs_hash(ensemble=ens.digest(), symbol=sym, r=r, R=R, t=t), "c": c, "symbol_sup": sup,
            "r": r, "R": R, "t": t, "n_paths": ens.n_paths}
    return judge(check_id, p, bound, se, "bound", 0.0, meta)


@dataclass(frozen=True)
class ContainmentProfile:
    """Exceedance profile R ↦ sup over the family of P(sup_{t≤T}|X_t| ≥ R)."""
    radii: Tuple[float, ...]
    values: Tuple[float, ...]
    per_ensemble: Tuple[Tuple[float, ...], ...]
    horizon: float
    epsilon: float
    verdict: Verdict

    def to_frame(self) -> pd.DataFrame:
        records = [{"R": r, "exceedance": v, **{f"ensemble_{j}": row[i] for j, row in enumerate(self.per_ensemble)}}
                   for i, (r, v) in enumerate(zip(self.radii, self.values))]
        return records_frame(records, ["R", "exceedance"] + [f"ensemble_{j}" for j in range(len(self.per_ensemble))])

    def to_check(self, check_id: str = "containment") -> CheckResult:
        """The profile as a bound check of the last exceedance against epsilon."""
        last = self.values[-1] if self.values else 0.0
        return CheckResult(check_id, last, self.epsilon, 0.0, self.verdict, "bound", 0.0,
                           {"radii": list(self.radii), "profile": list(self.values), "horizon": self.horizon})

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"radii": self.radii, "values": self.values, "per_ensemble": self.per_ensemble,
                               "horizon": self.horizon, "epsilon": self.epsilon, "verdict": self.verdict})


def compact_containment_profile(ensembles: Union[SolutionEnsemble, Sequence[SolutionEnsemble]], T: float,
                                R_grid: Sequence[float], epsilon: Optional[float] = None) -> ContainmentProfile:
    """Empirical compact containment profile of a family of ensembles.

    The profile is nonincreasing in R.  It passes when its value at the largest radius is at most epsilon
    (config.containment_epsilon if None).

    Raises:
        PreconditionError: when T is not a grid time of every ensemble
    """
    family = [ensembles] if isinstance(ensembles, SolutionEnsemble) else list(ensembles)
    if not family:
        raise ParameterError("empty ensemble family")
    radii = np.sort(np.asarray(R_grid, dtype=float))
    eps = config.containment_epsilon if epsilon is None else epsilon
    rows = []
    for ens in family:
        k = ens.index_of(T)
        peaks = np.linalg.norm(ens.states[:, :k + 1], axis=2).max(axis=1)
        rows.append(tuple(float(np.mean(peaks >= R)) for R in radii))
    values = tuple(float(max(col)) for col in zip(*rows)) if radii.size else ()
    verdict = Verdict.PASS if (not values or values[-1] <= eps) else Verdict.FAIL
    logger.info("containment profile over %d ensembles: %s -> %s", len(family),
                ", ".join(f"{r:g}:{v:.4f}" for r, v in zip(radii, values)), verdict.value)
    return ContainmentProfile(tuple(float(r) for r in radii), values, tuple(rows), float(T), float(eps), verdict)


class ReferenceMeasure:
    """A measure m(dy) = density(y) dy on the line.

    Args:
        density: Vectorized nonnegative density
        support: Interval carrying the density, possibly infinite
        singular_points: Points where the density may be singular; quadrature is split there
        name: Label used in reports
    """

    def __init__(self, density: Callable[[np.ndarray], np.ndarray],
                 support: Tuple[float, float] = (-math.inf, math.inf), singular_points: Sequence[float] = (),
                 name: str = "m"):
        self.density = density
        self.support = (float(support[0]), float(support[1]))
        self.singular_points = tuple(sorted(float(p) for p in singular_points))
        self.name = name

    def __call__(self, y: Any) -> np.ndarray:
        return np.asarray(self.density(np.asarray(y, dtype=float)), dtype=float)

    def _pieces(self, breakpoints: Sequence[float] = ()) -> List[Tuple[float, float]]:
        lo, hi = self.support
        inner = [p for p in (*self.singular_points, *breakpoints) if lo < p < hi]
        edges = sorted(set([lo, *inner, hi]))
        return list(zip(edges[:-1], edges[1:]))

    def integrate(self, fn: Callable[[float], float], breakpoints: Sequence[float] = ()) -> float:
        """∫ fn(y) m(dy) by adaptive quadrature on the pieces between singular points.

        Returns inf when the integral diverges.

        Raises:
            QuadratureError: when a piece does not converge to config.quad_error_limit
        """
        total = 0.0
        for a, b in self._pieces(breakpoints):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                value, error = integrate.quad(lambda y: fn(y) * float(self.density(np.array([y]))[0]), a, b,
                                              limit=200, epsabs=config.quad_tolerance)
            if not np.isfinite(value) or value > 1e300:
                return math.inf
            if error > config.quad_error_limit * max(1.0, abs(value)):
                raise QuadratureError(f"integral against {self.name} on [{a:g}, {b:g}] did not converge",
                                      {"value": value, "error": error, "piece": (a, b)})
            total += value
        return total

    def total_mass(self) -> float:
        return self.integrate(lambda y: 1.0)

    def lp_norm(self, u: Any, p: float = 1.0, breakpoints: Sequence[float] = ()) -> float:
        """‖u‖_{L^p(m)}; inf when the integral diverges."""
        if p < 1:
            raise ParameterError(f"need p >= 1, got {p}")

        def fn(y: float) -> float:
            return abs(float(evaluate_on_points(u, np.array([[y]]))[0])) ** p

        value = self.integrate(fn, breakpoints)
        return math.inf if value == math.inf else value ** (1.0 / p)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "support": list(self.support), "singular_points": list(self.singular_points)}


def _exponent(value: Union[float, Callable[[float], float]], kappa: Optional[float]) -> float:
    if callable(value):
        if kappa is None:
            raise ParameterError("kappa-indexed exponents need a value of kappa")
        return float(value(kappa))
    return float(value)


def _norms(z: Any, dimension: int) -> Tuple[np.ndarray, bool]:
    z = np.asarray(z, dtype=float)
    if dimension == 1:
        return np.abs(np.atleast_1d(z)).ravel(), z.ndim == 0
    arr = np.atleast_2d(z)
    return np.linalg.norm(arr, axis=1), z.ndim == 1


def q_majorant(z: Any, gamma0: float, gamma_inf: float, dimension: int = 1) -> Union[float, np.ndarray]:
    """Q(z) = |z|^{-d-γ₀∧γ∞} for |z| ≥ 1, 1 + |log|z|| + |z|^{-d+γ∞} for 0 < |z| < 1, and 1 at z = 0."""
    for g in (gamma0, gamma_inf):
        if not 0 < g <= 2:
            raise ParameterError(f"exponents must lie in (0, 2], got {g}")
    d = int(dimension)
    r, single = _norms(z, d)
    rs = np.where(r > 0, r, 1.0)
    far = rs ** (-d - min(gamma0, gamma_inf))
    near = 1.0 + np.abs(np.log(rs)) + rs ** (-d + gamma_inf)
    out = np.where(r >= 1, far, np.where(r > 0, near, 1.0))
    return float(out[0]) if single else out


def s_majorant(z: Any, gamma_inf: Union[float, Callable], gamma0: Union[float, Callable], t: float,
               dimension: int = 1, kappa: Optional[float] = None) -> Union[float, np.ndarray]:
    """The heat-kernel majorant S(z, t) with exponents that may depend on a parameter κ.

    S = t^{-d/γ∞} for |z| ≤ t^{1/γ∞}∧1, t/|z|^{d+γ∞} for t^{1/γ∞} < |z| ≤ 1,
    and t/|z|^{d+γ∞∧γ₀} for |z| > 1.
    """
    if not t > 0:
        raise ParameterError(f"need t > 0, got {t}")
    g_inf, g0 = _exponent(gamma_inf, kappa), _exponent(gamma0, kappa)
    d = int(dimension)
    r, single = _norms(z, d)
    rs = np.where(r > 0, r, 1.0)
    cut = min(t ** (1.0 / g_inf), 1.0)
    out = np.where(r <= cut, t ** (-d / g_inf),
                   np.where(r <= 1, t / rs ** (d + g_inf), t / rs ** (d + min(g_inf, g0))))
    return float(out[0]) if single else out


def integrated_s_majorant(z: Any, gamma_inf: float, gamma0: float, T: float,
                          dimension: int = 1) -> Union[float, np.ndarray]:
    """∫_0^T S(z, t) dt in closed form (inf at z = 0 when d ≥ γ∞).

    Up to a constant depending on the exponents this is bounded by Q(z) for T ≤ 1.
    """
    if not T > 0:
        raise ParameterError(f"need T > 0, got {T}")
    d = int(dimension)
    r, single = _norms(z, d)
    e = d / gamma_inf

    def power(a: np.ndarray, b: float) -> np.ndarray:
        # ∫_a^b t^{-e} dt for 0 ≤ a ≤ b
        if e == 1.0:
            with np.errstate(divide="ignore"):
                return np.log(b) - np.log(a)
        with np.errstate(divide="ignore"):
            return (b ** (1 - e) - a ** (1 - e)) / (1 - e)

    out = np.empty(r.shape)
    far = r > 1
    out[far] = 0.5 * T ** 2 / r[far] ** (d + min(gamma_inf, gamma0))
    near = ~far
    rn = r[near]
    switch = np.minimum(rn ** gamma_inf, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        linear = np.where(rn > 0, 0.5 * switch ** 2 / np.where(rn > 0, rn, 1.0) ** (d + gamma_inf), 0.0)
    heavy = np.where(switch < T, power(switch, T), 0.0)
    if e >= 1:
        heavy = np.where(switch == 0, math.inf, heavy)
    out[near] = linear + heavy
    return float(out[0]) if single else out


def sde_exponents(alpha: float, beta: float, drift_is_zero: bool) -> Tuple[float, float]:
    """(γ₀, γ∞) for a stable-driven SDE: (α, β) without drift, (α∧1, β∨1) with a drift."""
    if drift_is_zero:
        return float(alpha), float(beta)
    return float(min(1.0, alpha)), float(max(1.0, beta))


def krylov_measure(initial_law: Union[InitialLaw, Any], gamma0: float, gamma_inf: float, dimension: int = 1,
                   nodes: int = 32) -> ReferenceMeasure:
    """m(dy) = (∫ Q(x - y) μ(dx)) dy, with μ integrated by the quadrature nodes of the initial law."""
    if dimension != 1:
        raise PreconditionError("reference measures are built on the real line")
    law = make_initial_law(initial_law)
    xs, ws = law.quadrature_nodes(nodes)
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ws = np.asarray(ws, dtype=float)

    def density(y: np.ndarray) -> np.ndarray:
        y = np.atleast_1d(y)
        return np.asarray(q_majorant((xs[None, :] - y[:, None]).ravel(), gamma0, gamma_inf),
                          dtype=float).reshape(y.size, xs.size) @ ws

    return ReferenceMeasure(density, (-math.inf, math.inf), xs.tolist(),
                            f"krylov(gamma0={gamma0:g}, gamma_inf={gamma_inf:g})")


def krylov_check(ens: SolutionEnsemble, u: Any, m: ReferenceMeasure, p: float, c: float, T: float,
                 breakpoints: Sequence[float] = (), check_id: str = "krylov") -> CheckResult:
    """E∫_0^T u(X_s) ds against c‖u‖_{L^p(m)}.

    An infinite norm passes automatically.

    Raises:
        PreconditionError: when T is off the grid or u takes negative values on the ensemble
    """
    k = ens.index_of(T)
    window = ens.states[:, :k + 1]
    values = evaluate_on_points(u, window.reshape(-1, ens.dimension)).reshape(window.shape[:2])
    if np.any(values < 0):
        raise PreconditionError("the Krylov estimate needs u >= 0")
    occupation = integrate.trapezoid(values, ens.times[:k + 1], axis=1) if k > 0 else np.zeros(ens.n_paths)
    mean, se = mean_and_error(occupation)
    norm = m.lp_norm(u, p, breakpoints)
    bound = c * norm if norm != math.inf else math.inf
    meta = {"inputs": inputs_hash(ensemble=ens.digest(), u=u, m=m, p=p, c=c, T=T), "norm": norm, "p": p, "c": c,
            "T": T, "measure": m.name}
    return judge(check_id, mean, bound, se, "bound", 0.0, meta)


def _lattice(m: ReferenceMeasure) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = m.support
    w = config.generator_gap_window
    lo, hi = (lo if np.isfinite(lo) else -w), (hi if np.isfinite(hi) else w)
    xs = np.linspace(lo, hi, config.generator_gap_points)
    weights = np.full(xs.size, xs[1] - xs[0])
    weights[[0, -1]] *= 0.5
    return xs, weights * m(xs)


def _lp_distance(values: np.ndarray, target: np.ndarray, weights: np.ndarray, p: float) -> float:
    return float(np.sum(weights * np.abs(values - target) ** p) ** (1.0 / p))


def generator_gap(approximations: Sequence[SymbolField], limit: SymbolField, f: TestFunction, m: ReferenceMeasure,
                  p: float, candidate: Any, max_workers: Optional[int] = None) -> float:
    """max_n ‖A_n f - g‖_{L^p(m)} + ‖Lf - g‖_{L^p(m)} by the trapezoid rule on a lattice over the support of m.

    Unbounded supports are cut to ±config.generator_gap_window.

    Raises:
        QuadratureError: when Af cannot be evaluated on the lattice
    """
    if p < 1:
        raise ParameterError(f"need p >= 1, got {p}")
    xs, weights = _lattice(m)
    g = evaluate_on_points(candidate, xs[:, None])

    def values(sym: SymbolField) -> np.ndarray:
        return tabulate_operator(sym, f, xs, "integro", max_workers)["Af"].to_numpy()

    gaps = [_lp_distance(values(a), g, weights, p) for a in approximations]
    limit_gap = _lp_distance(values(limit), g, weights, p)
    logger.debug("generator gaps %s, limit gap %.6g", [f"{v:.4g}" for v in gaps], limit_gap)
    return float((max(gaps) if gaps else 0.0) + limit_gap)


def scoreboard(results: Union[Mapping[str, CheckResult], Sequence[CheckResult]]) -> pd.DataFrame:
    """One row per check: check_id, statistic, bound, std_error, verdict."""
    items = list(results.values()) if isinstance(results, Mapping) else list(results)
    records = [{"check_id": r.check_id, "statistic": r.statistic, "bound": r.bound_or_target,
                "std_error": r.std_error, "verdict": r.verdict.value} for r in items]
    return records_frame(records, SCOREBOARD_COLUMNS)
