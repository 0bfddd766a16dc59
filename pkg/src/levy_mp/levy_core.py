"""Lévy triplets, state-dependent symbols and the conditions placed on them.

A Lévy-type operator is described either by its symbol q(x, ξ) or by the Lévy
triplet (b(x), Q(x), ν(x, dy)) at every point, related by the Lévy-Khintchine
formula

    q(x, ξ) = -i b(x)·ξ + ½ ξ·Q(x)ξ + ∫ (1 - e^{iy·ξ} + iy·ξ 1_{(0,1)}(|y|)) ν(x, dy).

This module holds the immutable data types for both descriptions, evaluates
symbols (closed form when available, quadrature over the triplet otherwise) and
samples the boundedness, continuity and growth conditions on explicit lattices.

Key Features:
    * LevyTriplet with density, atomic or zero jump measures
    * SymbolField pairing a triplet map with an optional closed form
    * Lévy-Khintchine quadrature split at |y| = 1 with dyadic panels toward 0
    * ConditionReport for local boundedness, continuity at zero, linear growth and
      the family conditions (equiboundedness, equicontinuity)
    * The three forms of the sup bound of ‖Af‖_∞ for compactly supported f

Classes:
    Verdict: pass / fail / inconclusive.
    ConditionId: The sampled conditions.
    JumpDensity: Density kernel on the real line with declared exponents.
    AtomicJumps: Finite list of (location, mass) atoms.
    LevyTriplet: Drift, diffusion and jump measure at one point.
    CoefficientFlags: Continuity and boundedness of the coefficients.
    SymbolField: The state-dependent symbol.
    ConditionReport: Result of a sampled condition.

Example::

    >>> import numpy as np
    >>> from levy_mp.levy_core import LevyTriplet, constant_symbol, eval_symbol
    >>> sym = constant_symbol(LevyTriplet(drift=np.zeros(2), diffusion=np.eye(2)))
    >>> eval_symbol(sym, np.zeros(2), np.array([1.0, 1.0]))
    (1+0j)

See Also:
    levy_mp.catalog: Ready-made symbols
    levy_mp.generator: The operator applied to test functions
"""
from __future__ import annotations

import enum
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from levy_mp import quadrature
from levy_mp.config import config
from levy_mp.exceptions import ParameterError, PreconditionError, QuadratureError
from levy_mp.utils import as_point, ball_lattice, json_normalize, sphere_lattice

__all__ = ["Verdict", "ConditionId", "SupBoundMode", "JumpDensity", "AtomicJumps", "LevyTriplet",
           "CoefficientFlags", "SymbolField", "ConditionReport", "stable_constant", "constant_symbol",
           "eval_symbol", "small_jump_moment", "nu_ball_mass", "check_conditions", "operator_sup_bound",
           "subadditivity_defect", "tail_mass"]

logger = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    """Outcome of a sampled condition or Monte Carlo check."""
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class ConditionId(str, enum.Enum):
    """Conditions that can be sampled on lattices."""
    LOCAL_BOUNDED = "LOCAL_BOUNDED"
    CONT_AT_ZERO = "CONT_AT_ZERO"
    LINEAR_GROWTH = "LINEAR_GROWTH"
    C1_EQUIBOUNDED = "C1_EQUIBOUNDED"
    C2_EQUICONTINUOUS = "C2_EQUICONTINUOUS"
    HARNACK_H1 = "HARNACK_H1"
    HARNACK_H2 = "HARNACK_H2"
    HARNACK_H3 = "HARNACK_H3"


class SupBoundMode(str, enum.Enum):
    """Forms of the sup bound of ‖Af‖_∞.

    INTEGRAL bounds the outer part by the jump mass ν(x, B̄(-x, R)); SYMBOL_REAL replaces that mass by
    C2 sup |Re q(x, ξ)| over |ξ| ≤ 1/|x|; SYMBOL additionally replaces the triplet sup inside the support by
    C1 sup |q(x, ξ)| over |ξ| ≤ 1.
    """
    INTEGRAL = "integral"
    SYMBOL_REAL = "symbol_real"
    SYMBOL = "symbol"


def stable_constant(alpha: float, dimension: int = 1) -> float:
    """The constant c with |ξ|^α = c ∫ (1 - cos y·ξ) |y|^{-d-α} dy, for α in (0, 2)."""
    if not 0 < alpha < 2:
        raise ParameterError(f"stable index must lie in (0, 2), got {alpha}")
    d = dimension
    return float(alpha * 2.0 ** (alpha - 1) * gamma_fn((d + alpha) / 2)
                 / (np.pi ** (d / 2) * gamma_fn(1 - alpha / 2)))


@dataclass(frozen=True)
class JumpDensity:
    """A jump density κ on the real line minus the origin.

    ``kernel`` must be vectorized over y.  The declared exponents promise κ(y) = O(|y|^{-1-s}) at 0 and
    κ(y) = O(|y|^{-1-δ}) at infinity; they drive the quadrature remainders.
    """
    kernel: Callable[[np.ndarray], np.ndarray]
    singularity_exponent: float
    decay_exponent: float
    symmetric: bool = False
    inner_moment: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        if not 0 <= self.singularity_exponent < 2:
            raise ParameterError(f"singularity exponent must lie in [0, 2), got {self.singularity_exponent}")
        if self.decay_exponent <= 0:
            raise ParameterError(f"decay exponent must be positive, got {self.decay_exponent}")

    def moment_below(self, delta: float, side: float) -> float:
        """∫_0^δ y² κ(side·y) dy, exact when ``inner_moment`` is given, else from the declared power law."""
        if self.inner_moment is not None:
            return float(self.inner_moment(delta, side))
        return float(self(side * delta)) * delta ** 3 / (2 - self.singularity_exponent)

    def __call__(self, y: Any) -> np.ndarray:
        return np.asarray(self.kernel(np.asarray(y, dtype=float)), dtype=float)


@dataclass(frozen=True)
class AtomicJumps:
    """A finite jump measure given by atoms (location, mass)."""
    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        locations = np.atleast_2d(np.asarray(self.locations, dtype=float))
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if locations.shape[0] != masses.shape[0]:
            raise ParameterError("atoms need one mass per location")
        if np.any(masses < 0):
            raise ParameterError("atom masses must be nonnegative")
        if np.any(np.linalg.norm(locations, axis=1) == 0):
            raise ParameterError("jump measures do not charge the origin")
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "masses", masses)


JumpMeasure = Union[JumpDensity, AtomicJumps, None]


@dataclass(frozen=True)
class LevyTriplet:
    """Drift vector, diffusion matrix and jump measure at one spatial point."""
    drift: np.ndarray
    diffusion: np.ndarray
    jump_measure: JumpMeasure = None

    def __post_init__(self):
        drift = np.atleast_1d(np.asarray(self.drift, dtype=float))
        d = drift.shape[0]
        diffusion = np.asarray(self.diffusion, dtype=float).reshape(d, d)
        if not np.allclose(diffusion, diffusion.T, atol=1e-12):
            raise ParameterError("diffusion matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(diffusion)) < -1e-12:
            raise ParameterError("diffusion matrix must be positive semidefinite")
        if isinstance(self.jump_measure, JumpDensity) and d != 1:
            raise ParameterError("jump densities are supported on the real line only")
        if isinstance(self.jump_measure, AtomicJumps) and self.jump_measure.locations.shape[1] != d:
            raise ParameterError("atom locations must match the drift dimension")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "diffusion", diffusion)

    @property
    def dimension(self) -> int:
        return self.drift.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        measure = self.jump_measure
        if isinstance(measure, JumpDensity):
            jumps = {"type": "density", "singularity_exponent": measure.singularity_exponent,
                     "decay_exponent": measure.decay_exponent, "symmetric": measure.symmetric}
        elif isinstance(measure, AtomicJumps):
            jumps = {"type": "atoms", "locations": measure.locations, "masses": measure.masses}
        else:
            jumps = {"type": "zero"}
        return json_normalize({"drift": self.drift, "diffusion": self.diffusion, "jump_measure": jumps})


@dataclass(frozen=True)
class CoefficientFlags:
    """What is known about the x-dependence of a symbol."""
    continuous_in_x: bool = True
    bounded: bool = True


@dataclass(frozen=True)
class SymbolField:
    """A state-dependent symbol q(x, ξ).

    ``direct_eval(x, xi)`` receives a point of shape (d,) and frequencies of shape (n, d) and returns n complex
    values.  ``triplet_at(x)`` returns the Lévy triplet at the point.  Instances are immutable and safe to share
    across threads.
    """
    name: str
    dimension: int
    triplet_at: Callable[[np.ndarray], LevyTriplet]
    direct_eval: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    coefficient_flags: CoefficientFlags = CoefficientFlags()
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ParameterError(f"dimension must be positive, got {self.dimension}")

    def __call__(self, x: Any, xi: Any) -> Union[complex, np.ndarray]:
        return eval_symbol(self, x, xi)

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"name": self.name, "dimension": self.dimension,
                               "has_direct_eval": self.direct_eval is not None,
                               "coefficient_flags": {"continuous_in_x": self.coefficient_flags.continuous_in_x,
                                                     "bounded": self.coefficient_flags.bounded},
                               "params": {k: v for k, v in self.params.items() if not callable(v)}})


def constant_symbol(triplet: LevyTriplet, name: str = "levy") -> SymbolField:
    """The symbol of a Lévy process, i.e. a triplet that does not depend on x."""
    return SymbolField(name=name, dimension=triplet.dimension, triplet_at=lambda x: triplet,
                       params={"triplet": triplet.to_dict()})


def _z_minus_sin(z: np.ndarray) -> np.ndarray:
    """z - sin z without cancellation for small z."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, z, 0.0)
    return np.where(small, zs ** 3 / 6 - zs ** 5 / 120, z - np.sin(z))


def _check_quad(name: str, value: float, error: float, partial: Dict[str, Any]) -> None:
    if not np.isfinite(value) or error > config.quad_error_limit * max(1.0, abs(value)):
        partial = dict(partial)
        partial[name] = value
        partial[f"{name}_error"] = error
        raise QuadratureError(f"Quadrature of '{name}' did not converge (error estimate {error:.3g})", partial)


def tail_mass(density: JumpDensity, side: float) -> float:
    """∫_1^∞ κ(side·u) du by dyadic panels plus a power-law tail estimate."""
    u, w, top = quadrature.dyadic_outer_rule(1.0)
    tail = float(density(side * top)) * top / density.decay_exponent
    return float(np.sum(w * density(side * u))) + tail


def _fourier_tail(density: JumpDensity, side: float, frequency: float, weight: str,
                  partial: Dict[str, Any]) -> float:
    """∫_1^∞ κ(side·u) cos(frequency u) du (or sin) by QUADPACK's Fourier routine."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(lambda u: float(density(side * u)), 1.0, np.inf, weight=weight,
                                      wvar=frequency, limlst=100)
    _check_quad(f"{weight}_tail_{'right' if side > 0 else 'left'}", value, error, partial)
    return value


def _density_symbol(density: JumpDensity, xi: float) -> complex:
    """∫ (1 - e^{iyξ} + iyξ 1_{|y|<1}) κ(y) dy on the real line."""
    if xi == 0:
        return 0j
    y, w, delta = quadrature.oscillatory_inner_rule(xi)
    re_inner = 0.0
    im_inner = 0.0
    for side in (1.0, -1.0):
        ys = side * y
        k = density(ys)
        z = ys * xi
        re_inner += float(np.sum(w * 2.0 * np.sin(0.5 * z) ** 2 * k))
        im_inner += float(np.sum(w * _z_minus_sin(z) * k))
        # below delta, 1 - cos(yξ) = (yξ)²/2 up to higher order
        re_inner += 0.5 * xi ** 2 * density.moment_below(delta, side)
    partial: Dict[str, Any] = {"inner_real": re_inner, "inner_imag": im_inner}

    frequency = abs(xi)
    re_outer = 0.0
    im_outer = 0.0
    for side in (1.0, -1.0):
        mass = tail_mass(density, side)
        partial[f"mass_{'right' if side > 0 else 'left'}"] = mass
        re_outer += mass - _fourier_tail(density, side, frequency, "cos", partial)
        if not density.symmetric:
            # sin(side·u·ξ) = side·sgn(ξ)·sin(u|ξ|)
            im_outer -= side * np.sign(xi) * _fourier_tail(density, side, frequency, "sin", partial)
    return complex(re_inner + re_outer, im_inner + im_outer)


def _atomic_symbol(atoms: AtomicJumps, xi: np.ndarray) -> np.ndarray:
    phase = xi @ atoms.locations.T
    small = (np.linalg.norm(atoms.locations, axis=1) < 1.0).astype(float)
    terms = 1.0 - np.exp(1j * phase) + 1j * phase * small[None, :]
    return terms @ atoms.masses


def _quadrature_symbol(triplet: LevyTriplet, xi: np.ndarray) -> np.ndarray:
    """Lévy-Khintchine formula for frequencies of shape (n, d)."""
    values = -1j * (xi @ triplet.drift) + 0.5 * np.einsum("ni,ij,nj->n", xi, triplet.diffusion, xi)
    measure = triplet.jump_measure
    if isinstance(measure, JumpDensity):
        values = values + np.array([_density_symbol(measure, float(v)) for v in xi[:, 0]], dtype=complex)
    elif isinstance(measure, AtomicJumps):
        values = values + _atomic_symbol(measure, xi)
    return values


def _as_frequencies(xi: Any, dimension: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(xi, dtype=float)
    if dimension == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1), True
        return arr.reshape(-1, 1), False
    if arr.ndim == 1:
        return arr.reshape(1, dimension), True
    return arr.reshape(-1, dimension), False


def eval_symbol(sym: SymbolField, x: Any, xi: Any, method: str = "auto") -> Union[complex, np.ndarray]:
    """Evaluate q(x, ξ).

    Args:
        sym: The symbol
        x: A point of dimension d (a scalar when d = 1)
        xi: One frequency of dimension d, or an (n, d) array of frequencies (a 1-d array when d = 1)
        method: "auto" uses the closed form when present, "direct" requires it, "quadrature" always integrates
                over the triplet

    Returns:
        A complex scalar for a single frequency, otherwise an array of n complex values

    Raises:
        QuadratureError: when the jump quadrature does not converge
        ParameterError: when method is "direct" and the symbol has no closed form
    """
    point = as_point(x, sym.dimension)
    freqs, single = _as_frequencies(xi, sym.dimension)
    if not np.all(np.isfinite(freqs)):
        raise ParameterError("frequencies must be finite")
    if method not in ("auto", "direct", "quadrature"):
        raise ParameterError(f"Unknown evaluation method '{method}'")
    if method == "direct" and sym.direct_eval is None:
        raise ParameterError(f"symbol '{sym.name}' has no closed form")

    if sym.direct_eval is not None and method != "quadrature":
        values = np.asarray(sym.direct_eval(point, freqs), dtype=complex).reshape(-1)
    else:
        values = _quadrature_symbol(sym.triplet_at(point), freqs)
    return complex(values[0]) if single else values


def small_jump_moment(triplet: LevyTriplet) -> float:
    """∫ min(|y|², 1) ν(dy); finite for every Lévy triplet.

    Raises:
        QuadratureError: when the computed value is not finite
    """
    measure = triplet.jump_measure
    if measure is None:
        return 0.0
    if isinstance(measure, AtomicJumps):
        sizes = np.linalg.norm(measure.locations, axis=1)
        return float(np.sum(measure.masses * np.minimum(sizes ** 2, 1.0)))
    y, w, delta = quadrature.dyadic_inner_rule(1.0)
    total = 0.0
    for side in (1.0, -1.0):
        total += float(np.sum(w * y ** 2 * measure(side * y)))
        total += measure.moment_below(delta, side)
        total += tail_mass(measure, side)
    if not np.isfinite(total):
        raise QuadratureError("∫ min(|y|², 1) ν(dy) is not finite", {"moment": total})
    return total


def nu_ball_mass(triplet: LevyTriplet, center: Any, radius: float) -> float:
    """ν(B̄(center, radius)) for a closed ball that stays away from the origin.

    Raises:
        PreconditionError: when a density is asked for a ball containing the origin
        QuadratureError: when the integral does not converge
    """
    center = as_point(center, triplet.dimension)
    measure = triplet.jump_measure
    if measure is None:
        return 0.0
    if isinstance(measure, AtomicJumps):
        inside = np.linalg.norm(measure.locations - center[None, :], axis=1) <= radius
        return float(np.sum(measure.masses[inside]))
    low, high = center[0] - radius, center[0] + radius
    if low <= 0 <= high:
        raise PreconditionError("the ball contains the origin, where the jump density is not integrable")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(lambda u: float(measure(u)), low, high, limit=200,
                                      epsabs=config.quad_tolerance)
    _check_quad("ball_mass", value, error, {"low": low, "high": high})
    return float(value)


@dataclass(frozen=True)
class ConditionReport:
    """Result of sampling one condition over a radius grid."""
    condition_id: ConditionId
    grid_spec: Dict[str, Any]
    sup_values: List[Tuple[float, float]]
    verdict: Verdict
    tolerance: float
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"condition_id": self.condition_id, "grid_spec": self.grid_spec,
                               "sup_values": [list(p) for p in self.sup_values], "verdict": self.verdict,
                               "tolerance": self.tolerance, "extras": self.extras})


_FAMILY_CONDITIONS = (ConditionId.C1_EQUIBOUNDED, ConditionId.C2_EQUICONTINUOUS)
_DECAY_CONDITIONS = (ConditionId.CONT_AT_ZERO, ConditionId.C2_EQUICONTINUOUS)


def _lattice_sup(family: Sequence[SymbolField], xs: np.ndarray, xis: np.ndarray, max_workers: int,
                 weight: Optional[np.ndarray] = None, real_part: bool = False) -> float:
    """max over the family and the (x, ξ) lattice of |q(x, ξ)| (optionally weighted, optionally Re q)."""
    def _one(job: Tuple[int, int]) -> float:
        sym, x = family[job[0]], xs[job[1]]
        q = eval_symbol(sym, x if sym.dimension > 1 else x[0], xis if sym.dimension > 1 else xis[:, 0])
        q = np.atleast_1d(q)
        values = np.abs(q.real) if real_part else np.abs(q)
        if weight is not None:
            values = values * weight
        return float(np.max(values)) if values.size else 0.0

    jobs = [(i, j) for i in range(len(family)) for j in range(len(xs))]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        # map keeps submission order, so the reduction below is deterministic
        sups = list(executor.map(_one, jobs))
    sups = np.asarray(sups)
    if np.any(~np.isfinite(sups)):
        return float("inf")
    return float(np.max(sups)) if sups.size else 0.0


def _verdict(which: ConditionId, values: List[float], tol: float) -> Verdict:
    if not all(np.isfinite(v) for v in values):
        return Verdict.FAIL
    if which in _DECAY_CONDITIONS:
        if len(values) == 1:
            return Verdict.PASS if values[0] <= tol else Verdict.INCONCLUSIVE
        if any(v1 > v0 + tol * (1 + v0) for v0, v1 in zip(values, values[1:])):
            return Verdict.FAIL
        if values[0] <= tol or values[-1] < values[0] - tol:
            return Verdict.PASS
        return Verdict.INCONCLUSIVE
    if which == ConditionId.LINEAR_GROWTH and len(values) > 1:
        if values[-1] > max(values[:-1]) * (1 + tol) + tol:
            return Verdict.INCONCLUSIVE
    return Verdict.PASS


def check_conditions(sym: Union[SymbolField, Sequence[SymbolField]], which: Union[ConditionId, str],
                     R_grid: Sequence[float], xi_grid_density: int = 21, tolerance: Optional[float] = None,
                     max_workers: Optional[int] = None) -> ConditionReport:
    """Sample a boundedness, continuity or growth condition on explicit lattices.

    For each radius R the relevant supremum is taken over a product lattice with ``xi_grid_density`` points per
    axis (forced odd so that 0 and the endpoints are sampled):

    * LOCAL_BOUNDED: sup |q(x, ξ)| over |x| ≤ R, |ξ| ≤ 1
    * CONT_AT_ZERO: sup |q(y, ξ)| over |y| ≤ R, |ξ| ≤ 1/R
    * LINEAR_GROWTH: sup |q(x, ξ)| over |x| = R, |ξ| ≤ 1/|x|
    * C1_EQUIBOUNDED / C2_EQUICONTINUOUS: the LOCAL_BOUNDED / CONT_AT_ZERO sup taken over a family

    Args:
        sym: A symbol, or a family of symbols for the C1/C2 conditions
        which: The condition
        R_grid: Strictly increasing positive radii
        xi_grid_density: Lattice points per axis
        tolerance: Trend tolerance, config.condition_tolerance if None
        max_workers: Threads used for lattice evaluation, config.threads if None

    Returns:
        A ConditionReport.  Unbounded sampled values produce a fail verdict, not an exception.

    Raises:
        ParameterError: when the grid is empty or not strictly increasing
    """
    which = ConditionId(which)
    if which not in (ConditionId.LOCAL_BOUNDED, ConditionId.CONT_AT_ZERO, ConditionId.LINEAR_GROWTH,
                     *_FAMILY_CONDITIONS):
        raise ParameterError(f"{which.value} is not a symbol condition")
    family = list(sym) if isinstance(sym, (list, tuple)) else [sym]
    if not family:
        raise ParameterError("empty symbol family")
    if which not in _FAMILY_CONDITIONS and len(family) > 1:
        raise ParameterError(f"{which.value} takes a single symbol")
    radii = [float(r) for r in R_grid]
    if not radii:
        raise ParameterError("empty radius grid")
    if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radius grid must be positive and strictly increasing")
    tol = config.condition_tolerance if tolerance is None else tolerance
    workers = max_workers or config.threads
    d = family[0].dimension

    sups: List[Tuple[float, float]] = []
    c_r: List[Tuple[float, float]] = []
    for R in radii:
        if which in (ConditionId.LOCAL_BOUNDED, ConditionId.C1_EQUIBOUNDED):
            xs, xis = ball_lattice(R, xi_grid_density, d), ball_lattice(1.0, xi_grid_density, d)
        elif which == ConditionId.LINEAR_GROWTH:
            xs, xis = sphere_lattice(R, xi_grid_density, d), ball_lattice(1.0 / R, xi_grid_density, d)
        else:
            xs, xis = ball_lattice(R, xi_grid_density, d), ball_lattice(1.0 / R, xi_grid_density, d)
        sups.append((R, _lattice_sup(family, xs, xis, workers)))
        if which in (ConditionId.LOCAL_BOUNDED, ConditionId.C1_EQUIBOUNDED):
            wide = ball_lattice(config.c_r_frequency_radius, max(xi_grid_density, 41), d)
            weight = 1.0 / (1.0 + np.sum(wide ** 2, axis=1))
            c_r.append((R, _lattice_sup(family, xs, wide, workers, weight=weight)))
        logger.debug("%s R=%g sup=%g (%d x-points, %d xi-points)", which.value, R, sups[-1][1], len(xs), len(xis))

    verdict = _verdict(which, [v for _, v in sups], tol)
    if verdict != Verdict.PASS:
        logger.warning("%s verdict %s for %s", which.value, verdict.value, [s.name for s in family])
    grid_spec = {"R_grid": radii, "xi_grid_density": xi_grid_density, "dimension": d,
                 "family": [s.name for s in family], "lattice": "product lattice, odd points per axis"}
    extras = {"c_R": [list(p) for p in c_r]} if c_r else {}
    return ConditionReport(which, grid_spec, sups, verdict, tol, extras)


def _shell_radii(R: float) -> np.ndarray:
    near = R * (1.0 + 2.0 ** -np.arange(1, 11, dtype=float))
    far = np.linspace(R, config.shell_factor * R, config.shell_points + 1)[1:]
    return np.unique(np.concatenate([near, far]))


def _shell_points(R: float, d: int) -> np.ndarray:
    return np.concatenate([sphere_lattice(r, 16, d) for r in _shell_radii(R)])


def operator_sup_bound(sym: SymbolField, f: Any, mode: Union[SupBoundMode, str] = SupBoundMode.INTEGRAL,
                       c1: Optional[float] = None, c2: Optional[float] = None, lattice_density: int = 201) -> float:
    """Upper bound for ‖Af‖_∞ when f is supported in the closed ball B̄(0, R).

    INTEGRAL mode returns
    2‖f‖_(2) sup_{|x|≤R}(|b| + |Q| + ∫min(|y|², 1)ν(x, dy)) + ‖f‖_∞ sup_{|x|>R} ν(x, B̄(-x, R)),
    with |Q| the spectral norm and the second sup sampled on a shell of radii accumulating at R.  SYMBOL_REAL
    replaces the jump mass by C2 sup_{|ξ|≤1/|x|} |Re q(x, ξ)|, SYMBOL also replaces the first sup by
    C1 sup_{|x|≤R, |ξ|≤1} |q(x, ξ)|.

    Args:
        sym: The symbol
        f: A TestFunction with finite support radius
        mode: Which form of the bound
        c1: Constant C1 (config.sup_bound_c1, else the standard bump constant)
        c2: Constant C2 (config.sup_bound_c2)
        lattice_density: Lattice points per axis inside the support

    Raises:
        PreconditionError: when f has unbounded support
        QuadratureError: when a jump-mass quadrature fails
    """
    mode = SupBoundMode(mode)
    R = float(f.support_radius)
    if not np.isfinite(R):
        raise PreconditionError("the sup bound needs a test function with bounded support")
    if f.sup_norm == 0 and f.norm_2 == 0:
        return 0.0
    d = sym.dimension
    workers = config.threads
    inside = ball_lattice(R, lattice_density, d)
    shell = _shell_points(R, d)

    if mode == SupBoundMode.SYMBOL:
        if c1 is None:
            c1 = config.sup_bound_c1
        if c1 is None:
            from levy_mp.generator import standard_bump_constant
            c1 = standard_bump_constant()
        first = c1 * f.norm_2 * _lattice_sup([sym], inside, ball_lattice(1.0, 41, d), workers)
    else:
        def _local(x: np.ndarray) -> float:
            t = sym.triplet_at(x)
            return float(np.linalg.norm(t.drift) + np.linalg.norm(t.diffusion, 2) + small_jump_moment(t))

        with ThreadPoolExecutor(max_workers=workers) as executor:
            first = 2.0 * f.norm_2 * max(executor.map(_local, inside))

    if mode == SupBoundMode.INTEGRAL:
        def _mass(x: np.ndarray) -> float:
            return nu_ball_mass(sym.triplet_at(x), -x, R)

        with ThreadPoolExecutor(max_workers=workers) as executor:
            second = f.sup_norm * max(executor.map(_mass, shell))
    else:
        c2 = config.sup_bound_c2 if c2 is None else c2

        def _re_sup(x: np.ndarray) -> float:
            xis = ball_lattice(1.0 / np.linalg.norm(x), 41, d)
            return _lattice_sup([sym], x[None, :], xis, 1, real_part=True)

        with ThreadPoolExecutor(max_workers=workers) as executor:
            second = c2 * f.sup_norm * max(executor.map(_re_sup, shell))

    logger.debug("sup bound (%s): inner term %g, outer term %g", mode.value, first, second)
    return float(first + second)


def subadditivity_defect(sym: SymbolField, x: Any, xi: Any, eta: Any) -> float:
    """√|q(x, ξ+η)| - √|q(x, ξ)| - √|q(x, η)|, which is ≤ 0 for negative definite symbols."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    q = lambda v: abs(eval_symbol(sym, x, v))  # noqa: E731
    return float(np.sqrt(q(xi + eta)) - np.sqrt(q(xi)) - np.sqrt(q(eta)))
