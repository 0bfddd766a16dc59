"""Path simulation for Lévy processes, Lévy-driven SDEs and stable-like processes.

Paths are generated by the Euler scheme X_{k+1} = X_k + b(X_k)dt + σ(X_k)ΔL_k,
with coefficients evaluated at the left limit, on a uniform grid.  Increments of
the driver L come from exact samplers where they exist (symmetric stable laws
by the Chambers-Mallows-Stuck transform, Gaussians) and otherwise from a
compound-Poisson approximation of the jumps above config.small_jump_cutoff
with a Gaussian substitute for the small jumps.

Randomness is organised in blocks of config.block_size paths; block b of an
ensemble with master seed s owns the counter-based stream
Philox(SeedSequence(s, spawn_key=(b,))).  Blocks are simulated in parallel and
reassembled in order, so ensembles depend only on (scheme, seed, N, grid).

Key Features:
    * sample_levy_increment for stable, Gaussian, relativistic and composite drivers
    * SDEScheme and StableLikeScheme holders
    * Dirac, uniform and Gaussian initial laws with quadrature nodes
    * The two closed-form selections of the ODE dX = 2 sgn(X)√|X| dt
    * SolutionEnsemble with binary, CSV and digest exports
    * First exit from a ball with optional Brownian-bridge correction

Example::

    >>> from levy_mp.simulate import SDEScheme, Dirac, simulate_ensemble
    >>> scheme = SDEScheme(drift=0.0, sigma=1.0, driver={"kind": "stable", "alpha": 1.5})
    >>> ens = simulate_ensemble(scheme, Dirac(0.0), n_paths=1000, T=1.0, dt=1/64, master_seed=7)
    >>> ens.states.shape
    (1000, 65, 1)
"""
import enum
import hashlib
import json
import logging
import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid, trapezoid

from levy_mp import quadrature
from levy_mp.coefficients import make_coefficient
from levy_mp.config import config
from levy_mp.exceptions import ParameterError, PreconditionError, SimulationBlowUp
from levy_mp.exponents import (CompositeExponent, GaussianExponent, LevyExponent, StableExponent, ZeroExponent,
                               make_exponent)
from levy_mp.levy_core import JumpDensity, SymbolField
from levy_mp.utils import as_point, json_normalize

__all__ = ["path_stream", "sample_levy_increment", "IncrementSampler", "make_sampler", "sample_symmetric_stable",
           "Scheme", "SDEScheme", "StableLikeScheme", "make_scheme", "InitialLaw", "Dirac", "UniformLaw",
           "GaussianLaw", "make_initial_law", "PathSkeleton", "SolutionEnsemble", "time_grid",
           "simulate_sde_path", "simulate_ensemble", "Selection", "ode_selection_path", "ode_selection_ensemble",
           "ExitSample",
           "simulate_until_exit"]

logger = logging.getLogger(__name__)

_MAGIC = b"LVMP"
_BINARY_VERSION = 1


def path_stream(master_seed: int, block: int) -> np.random.Generator:
    """The counter-based random stream owned by a block of paths."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(master_seed), spawn_key=(int(block),))))


def sample_symmetric_stable(alpha: Union[float, np.ndarray], rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard symmetric α-stable variates (E e^{iξX} = e^{-|ξ|^α}), α ∈ (0, 2], α may vary per sample."""
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (size,))
    phi = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    w = rng.standard_exponential(size)
    a = alpha
    x = np.sin(a * phi) / np.cos(phi) ** (1.0 / a) * (np.cos((1.0 - a) * phi) / w) ** ((1.0 - a) / a)
    # at α = 2 the transform returns N(0, 2) already
    return x


def _positive_stable(a: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Positive a-stable variates with E e^{-sA} = e^{-s^a}, a ∈ (0, 1)."""
    u = rng.uniform(0.0, np.pi, size)
    e = rng.standard_exponential(size)
    return (np.sin(a * u) / np.sin(u) ** (1.0 / a)) * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)


class IncrementSampler:
    """Draws increments L_{t+dt} - L_t of one driver law."""

    def __init__(self, exponent: LevyExponent):
        self.exponent = exponent
        self.dimension = exponent.dimension

    @property
    def continuous(self) -> bool:
        return False

    def variance_rate(self) -> float:
        """Per-coordinate variance of a unit-time increment of the Gaussian part."""
        return 0.0

    def sample(self, rng: np.random.Generator, size: int, dt: float) -> np.ndarray:
        raise NotImplementedError("Must be implemented by a subclass")


class _ZeroSampler(IncrementSampler):

    @property
    def continuous(self) -> bool:
        return True

    def sample(self, rng, size, dt):
        return np.zeros((size, self.dimension))


class _GaussianSampler(IncrementSampler):

    def __init__(self, exponent: LevyExponent, covariance: np.ndarray):
        super().__init__(exponent)
        values, vectors = np.linalg.eigh(covariance)
        self.root = vectors * np.sqrt(np.clip(values, 0.0, None))[None, :]
        self.rate = float(np.trace(covariance)) / self.dimension

    @property
    def continuous(self) -> bool:
        return True

    def variance_rate(self) -> float:
        return self.rate

    def sample(self, rng, size, dt):
        z = rng.standard_normal((size, self.dimension))
        return math.sqrt(dt) * z @ self.root.T


class _StableSampler(IncrementSampler):

    def __init__(self, exponent: StableExponent):
        super().__init__(exponent)
        self.alpha = exponent.alpha

    def sample(self, rng, size, dt):
        a, d = self.alpha, self.dimension
        scale = dt ** (1.0 / a)
        if d == 1:
            return scale * sample_symmetric_stable(a, rng, size)[:, None]
        # sub-Gaussian representation: √A·G with A positive (α/2)-stable and G ~ N(0, 2I)
        amp = _positive_stable(0.5 * a, rng, size)
        g = math.sqrt(2.0) * rng.standard_normal((size, d))
        return scale * np.sqrt(amp)[:, None] * g


class _CompoundPoissonSampler(IncrementSampler):
    """Jumps above the cutoff as a compound Poisson sum, the rest as a Gaussian with matching variance."""

    def __init__(self, exponent: LevyExponent, cutoff: float):
        super().__init__(exponent)
        triplet = exponent.triplet()
        if triplet.dimension != 1:
            raise ParameterError("compound-Poisson sampling is one-dimensional")
        measure = triplet.jump_measure
        self.drift = float(triplet.drift[0])
        self.variance = float(triplet.diffusion[0, 0])
        self.sides: List[Tuple[float, float, np.ndarray, np.ndarray]] = []
        compensator = 0.0
        if isinstance(measure, JumpDensity):
            y, w, delta = quadrature.dyadic_inner_rule(cutoff)
            logs = np.log(cutoff) + np.linspace(0.0, 60.0 * np.log(2.0), 4097)
            for side in (1.0, -1.0):
                self.variance += float(np.sum(w * y ** 2 * measure(side * y))) + measure.moment_below(delta, side)
                grid = np.exp(logs)
                dens = measure(side * grid) * grid
                cdf = cumulative_trapezoid(dens, logs, initial=0.0)
                self.sides.append((side, float(cdf[-1]), cdf, logs))
                inside = grid <= 1.0
                if np.any(inside):
                    compensator += side * float(trapezoid(dens[inside] * grid[inside], logs[inside]))
        elif measure is not None:
            raise ParameterError("compound-Poisson sampling needs a jump density")
        self.compensator = compensator
        self.rate = sum(mass for _, mass, _, _ in self.sides)
        logger.debug("compound-Poisson driver %r: jump rate %.6g, small-jump variance %.6g", exponent, self.rate,
                     self.variance)

    def variance_rate(self) -> float:
        return self.variance

    def _jumps(self, rng: np.random.Generator, count: int) -> np.ndarray:
        masses = np.array([mass for _, mass, _, _ in self.sides])
        which = rng.choice(len(self.sides), size=count, p=masses / masses.sum())
        u = rng.uniform(0.0, 1.0, count)
        out = np.empty(count)
        for k, (side, mass, cdf, logs) in enumerate(self.sides):
            sel = which == k
            out[sel] = side * np.exp(np.interp(u[sel] * mass, cdf, logs))
        return out

    def sample(self, rng, size, dt):
        base = (self.drift - self.compensator) * dt + math.sqrt(self.variance * dt) * rng.standard_normal(size)
        if self.rate > 0:
            counts = rng.poisson(self.rate * dt, size)
            total = int(counts.sum())
            if total:
                owners = np.repeat(np.arange(size), counts)
                base = base + np.bincount(owners, weights=self._jumps(rng, total), minlength=size)
        return base[:, None]


class _CompositeSampler(IncrementSampler):

    def __init__(self, exponent: CompositeExponent):
        super().__init__(exponent)
        self.parts = [make_sampler(p) for p in exponent.parts]

    @property
    def continuous(self) -> bool:
        return all(p.continuous for p in self.parts)

    def variance_rate(self) -> float:
        return sum(p.variance_rate() for p in self.parts)

    def sample(self, rng, size, dt):
        return sum(p.sample(rng, size, dt) for p in self.parts)


def make_sampler(law: Union[LevyExponent, Mapping[str, Any]]) -> IncrementSampler:
    """Increment sampler for a driver law.

    Raises:
        ParameterError: when the law is not supported
    """
    exponent = make_exponent(law)
    if isinstance(exponent, ZeroExponent):
        return _ZeroSampler(exponent)
    if isinstance(exponent, StableExponent):
        if exponent.alpha == 2:
            return _GaussianSampler(exponent, 2.0 * np.eye(exponent.dimension))
        return _StableSampler(exponent)
    if isinstance(exponent, GaussianExponent):
        return _GaussianSampler(exponent, exponent.covariance)
    if isinstance(exponent, CompositeExponent):
        return _CompositeSampler(exponent)
    if exponent.dimension == 1:
        return _CompoundPoissonSampler(exponent, config.small_jump_cutoff)
    raise ParameterError(f"unsupported driver law {exponent!r}")


def sample_levy_increment(law: Union[LevyExponent, Mapping[str, Any], IncrementSampler], dt: float,
                          rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """One increment (or ``size`` increments) of the Lévy process with exponent ψ over time dt.

    The convention is E e^{iξ·L_t} = e^{-tψ(ξ)}, so ψ(ξ) = |ξ|² gives variance 2dt.

    Returns:
        An array of shape (d,), or (size, d) when size is given.

    Raises:
        ParameterError: for unsupported laws or non-positive dt
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    sampler = law if isinstance(law, IncrementSampler) else make_sampler(law)
    out = sampler.sample(rng, 1 if size is None else int(size), float(dt))
    return out[0] if size is None else out


class Scheme:
    """Abstract base class for path schemes.  Subclasses implement ``step``."""
    kind = "abstract"
    dimension = 1

    def __init__(self, **kwargs):
        self.extra_opts = kwargs
        if kwargs:
            warnings.warn(f"Unused scheme options: {sorted(kwargs)}")

    @property
    def continuous(self) -> bool:
        """True when paths have no jumps."""
        return False

    def step(self, states: np.ndarray, dt: float, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError("Must be implemented by a subclass")

    def step_variance(self, states: np.ndarray, dt: float) -> np.ndarray:
        """Variance of the continuous part of one step, per path (used by the bridge correction)."""
        return np.zeros(states.shape[0])

    def symbol(self) -> SymbolField:
        raise NotImplementedError("Must be implemented by a subclass")

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError("Must be implemented by a subclass")


def _vector_field(spec: Any, d: int, what: str) -> Tuple[Callable[[np.ndarray], np.ndarray], Any]:
    """A drift b(x) as a callable (n, d) -> (n, d)."""
    if d == 1:
        coef = make_coefficient(spec)
        return (lambda x: coef(x[:, 0])[:, None]), coef
    if callable(spec):
        return spec, getattr(spec, "__qualname__", what)
    vec = as_point(spec, d)
    return (lambda x: np.broadcast_to(vec, x.shape)), vec


def _matrix_field(spec: Any, d: int) -> Tuple[Callable[[np.ndarray], np.ndarray], Any]:
    """A dispersion σ(x) as a callable (n, d) -> (n, d, d)."""
    if d == 1:
        coef = make_coefficient(spec)
        return (lambda x: coef(x[:, 0])[:, None, None]), coef
    if callable(spec):
        return spec, getattr(spec, "__qualname__", "sigma")
    mat = np.asarray(spec, dtype=float)
    if mat.ndim == 0:
        mat = float(mat) * np.eye(d)
    return (lambda x: np.broadcast_to(mat, (x.shape[0], d, d))), mat


class SDEScheme(Scheme):
    """Euler scheme for dX = b(X-)dt + σ(X-)dL.

    On the line ``drift`` and ``sigma`` are coefficients (numbers, mappings or Coefficient objects); in higher
    dimensions they are vectors/matrices or callables on (n, d) arrays.
    """
    kind = "sde"

    def __init__(self, drift: Any = 0.0, sigma: Any = 1.0, driver: Any = None, dimension: Optional[int] = None,
                 **kwargs):
        super().__init__(**kwargs)
        driver = make_exponent(driver if driver is not None else {"kind": "stable", "alpha": 2.0})
        self.dimension = int(dimension or driver.dimension)
        if driver.dimension != self.dimension:
            raise ParameterError("driver dimension does not match the scheme dimension")
        self.driver = driver
        self.sampler = make_sampler(driver)
        self.drift_fn, self.drift = _vector_field(drift, self.dimension, "drift")
        self.sigma_fn, self.sigma = _matrix_field(sigma, self.dimension)

    @property
    def continuous(self) -> bool:
        return self.sampler.continuous

    def step(self, states: np.ndarray, dt: float, rng: np.random.Generator) -> np.ndarray:
        increments = self.sampler.sample(rng, states.shape[0], dt)
        noise = np.einsum("nij,nj->ni", self.sigma_fn(states), increments)
        return states + self.drift_fn(states) * dt + noise

    def step_variance(self, states: np.ndarray, dt: float) -> np.ndarray:
        sig = self.sigma_fn(states)
        scale = np.einsum("nij,nij->n", sig, sig) / self.dimension
        return scale * self.sampler.variance_rate() * dt

    def symbol(self) -> SymbolField:
        from levy_mp.catalog import make_catalog_symbol
        if self.dimension != 1:
            raise ParameterError("SDE symbols are built on the real line")
        return make_catalog_symbol("sde_symbol", drift=self.drift, sigma=self.sigma, psi=self.driver)

    def to_dict(self) -> Dict[str, Any]:
        return json_normalize({"kind": self.kind, "drift": self.drift, "sigma": self.sigma,
                               "driver": self.driver.to_dict(), "dimension": self.dimension})


class StableLikeScheme(Scheme):
    """Euler scheme for the stable-like process with symbol |ξ|^{α(x)}: X_{k+1} = X_k + dt^{1/α(X_k)} S_k."""
    kind = "stable_like"

    def __init__(self, alpha: Any, **kwargs):
        super().__init__(**kwargs)
        self.alpha = make_coefficient(alpha)
        self.dimension = 1

    def step(self, states: np.ndarray, dt: float, rng: np.random.Generator) -> np.ndarray:
        a = self.alpha(states[:, 0])
        if np.any((a <= 0) | (a >= 2)):
            raise ParameterError("alpha(x) left (0, 2) along a path")
        jumps = dt ** (1.0 / a) * sample_symmetric_stable(a, rng, states.shape[0])
        return states + jumps[:, None]

    def symbol(self) -> SymbolField:
        from levy_mp.catalog import make_catalog_symbol
        return make_catalog_symbol("isotropic_stable_like", alpha=self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "alpha": self.alpha.to_dict(), "dimension": 1}


def make_scheme(spec: Union[Scheme, Mapping[str, Any]]) -> Scheme:
    """Build a scheme from a mapping with ``kind`` "sde" (default) or "stable_like"."""
    if isinstance(spec, Scheme):
        return spec
    spec = dict(spec)
    kind = spec.pop("kind", "sde")
    if kind == "sde":
        return SDEScheme(**spec)
    if kind == "stable_like":
        return StableLikeScheme(**spec)
    raise ParameterError(f"Unknown scheme kind '{kind}'")


class InitialLaw:
    """An initial distribution μ with a sampler and quadrature nodes."""
    kind = "abstract"
    dimension = 1

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError("Must be implemented by a subclass")

    def quadrature_nodes(self, count: int = 32) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes (m, d) and weights (m,) with Σ w g(node) ≈ ∫ g dμ."""
        raise NotImplementedError("Must be implemented by a subclass")

    def cdf(self, x: Any) -> np.ndarray:
        raise NotImplementedError("Must be implemented by a subclass")

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError("Must be implemented by a subclass")


class Dirac(InitialLaw):
    """μ = δ_x.  Sampling consumes no randomness."""
    kind = "dirac"

    def __init__(self, x: Any, dimension: int = 1):
        self.dimension = int(dimension)
        self.point = as_point(x, self.dimension)

    def sample(self, rng, size):
        return np.broadcast_to(self.point, (size, self.dimension)).copy()

    def quadrature_nodes(self, count=32):
        return self.point[None, :], np.ones(1)

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.point[0]).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "x": self.point.tolist()}


class UniformLaw(InitialLaw):
    """μ = uniform on [low, high]."""
    kind = "uniform"

    def __init__(self, low: float = -1.0, high: float = 1.0):
        if not high > low:
            raise ParameterError(f"uniform law needs low < high, got [{low}, {high}]")
        self.low, self.high = float(low), float(high)

    def sample(self, rng, size):
        return rng.uniform(self.low, self.high, (size, 1))

    def quadrature_nodes(self, count=32):
        x, w = quadrature.panel_rule([self.low, self.high], count)
        return x[:, None], w / (self.high - self.low)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.low) / (self.high - self.low), 0.0, 1.0)

    def to_dict(self):
        return {"kind": self.kind, "low": self.low, "high": self.high}


class GaussianLaw(InitialLaw):
    """μ = N(mean, std²) on the line."""
    kind = "gaussian"

    def __init__(self, mean: float = 0.0, std: float = 1.0):
        if not std > 0:
            raise ParameterError(f"standard deviation must be positive, got {std}")
        self.mean, self.std = float(mean), float(std)

    def sample(self, rng, size):
        return self.mean + self.std * rng.standard_normal((size, 1))

    def quadrature_nodes(self, count=32):
        z, w = np.polynomial.hermite_e.hermegauss(count)
        return (self.mean + self.std * z)[:, None], w / math.sqrt(2 * math.pi)

    def cdf(self, x):
        from scipy.special import ndtr
        return ndtr((np.asarray(x, dtype=float) - self.mean) / self.std)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean, "std": self.std}


def make_initial_law(spec: Union[InitialLaw, float, Sequence[float], Mapping[str, Any]]) -> InitialLaw:
    """A number or vector means a Dirac mass; mappings take ``kind`` dirac, uniform or gaussian."""
    if isinstance(spec, InitialLaw):
        return spec
    if isinstance(spec, (int, float)):
        return Dirac(float(spec))
    if isinstance(spec, (list, tuple)):
        return Dirac(spec, len(spec))
    spec = dict(spec)
    kind = spec.pop("kind", None)
    laws = {"dirac": Dirac, "uniform": UniformLaw, "gaussian": GaussianLaw}
    if kind not in laws:
        raise ParameterError(f"Unknown initial law '{kind}'. Known laws: {sorted(laws)}")
    try:
        return laws[kind](**spec)
    except TypeError as e:
        raise ParameterError(f"Invalid parameters for initial law '{kind}': {e}") from e


@dataclass(frozen=True)
class PathSkeleton:
    """One càdlàg trajectory on a grid; states[k] is the post-jump value at times[k]."""
    times: np.ndarray
    states: np.ndarray
    jump_marks: Tuple[int, ...] = ()

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
            raise ParameterError("path times must start at 0 and increase strictly")
        if states.shape[0] != times.shape[0]:
            raise ParameterError("a path needs one state per time")
        if not np.all(np.isfinite(states)):
            k = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
            raise SimulationBlowUp("path state is not finite", float(times[k]), 0)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "jump_marks", tuple(int(k) for k in self.jump_marks))

    def at(self, t: float) -> np.ndarray:
        """State at a grid time."""
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise PreconditionError(f"time {t} is not on the path grid")
        return self.states[k]


def time_grid(T: float, dt: float) -> np.ndarray:
    """Uniform grid 0, dt, ..., T.

    Raises:
        ParameterError: unless 0 < dt ≤ T and T is an integer multiple of dt
    """
    if not (dt > 0 and T > 0 and dt <= T * (1 + 1e-12)):
        raise ParameterError(f"need 0 < dt <= T, got dt={dt}, T={T}")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-9 * T:
        raise ParameterError(f"T={T} is not a multiple of dt={dt}")
    return dt * np.arange(steps + 1, dtype=float)


@dataclass(frozen=True, eq=False)
class SolutionEnsemble:
    """N simulated paths on a shared grid: the empirical surrogate of a martingale-problem solution.

    ``states`` has shape (N, n_t, d) and ``jump_marks`` is a boolean (N, n_t) array flagging increments larger
    than config.jump_mark_threshold.
    """
    times: np.ndarray
    states: np.ndarray
    jump_marks: np.ndarray
    scheme: Dict[str, Any]
    master_seed: int
    initial_law: Dict[str, Any]

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def dimension(self) -> int:
        return self.states.shape[2]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def index_of(self, t: float) -> int:
        """Grid index of time t.

        Raises:
            PreconditionError: when t is not a grid time
        """
        k = int(round(t / self.dt)) if self.dt > 0 else 0
        if k < 0 or k >= self.times.size or abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise PreconditionError(f"time {t} is not on the ensemble grid (dt={self.dt}, T={self.horizon})")
        return k

    def path(self, i: int) -> PathSkeleton:
        return PathSkeleton(self.times, self.states[i], tuple(np.flatnonzero(self.jump_marks[i])))

    @classmethod
    def from_paths(cls, paths: Sequence[PathSkeleton], scheme: Dict[str, Any], master_seed: int,
                   initial_law: Dict[str, Any]) -> "SolutionEnsemble":
        if not paths:
            raise ParameterError("an ensemble needs at least one path")
        times = paths[0].times
        if any(p.times.shape != times.shape or np.any(p.times != times) for p in paths):
            raise ParameterError("all paths must share the time grid")
        states = np.stack([p.states for p in paths])
        marks = np.zeros(states.shape[:2], dtype=bool)
        for i, p in enumerate(paths):
            marks[i, list(p.jump_marks)] = True
        return cls(times, states, marks, scheme, int(master_seed), initial_law)

    def metadata(self) -> Dict[str, Any]:
        return json_normalize({"scheme": self.scheme, "master_seed": self.master_seed,
                               "initial_law": self.initial_law, "n_paths": self.n_paths, "dt": self.dt,
                               "horizon": self.horizon, "dimension": self.dimension, "digest": self.digest()})

    def digest(self) -> str:
        """sha256 of the grid and states."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.states, dtype="<f8").tobytes())
        return h.hexdigest()

    def to_binary(self, path: str) -> None:
        """Write header, grid and column-major states to ``path`` and the metadata to ``path + '.json'``."""
        n, m, d = self.states.shape
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<IIQQ", _BINARY_VERSION, d, n, m))
            f.write(np.asarray(self.times, dtype="<f8").tobytes())
            f.write(np.asarray(self.states, dtype="<f8").tobytes(order="F"))
            f.write(np.asarray(self.jump_marks, dtype="u1").tobytes(order="F"))
        with open(path + ".json", "w", encoding="utf-8") as f:
            json.dump(self.metadata(), f, indent=2, sort_keys=True)

    @classmethod
    def from_binary(cls, path: str) -> "SolutionEnsemble":
        with open(path, "rb") as f:
            data = f.read()
        if data[:4] != _MAGIC:
            raise ParameterError(f"'{path}' is not an ensemble file")
        version, d, n, m = struct.unpack_from("<IIQQ", data, 4)
        if version != _BINARY_VERSION:
            raise ParameterError(f"unsupported ensemble file version {version}")
        offset = 4 + struct.calcsize("<IIQQ")
        times = np.frombuffer(data, "<f8", m, offset).copy()
        offset += 8 * m
        states = np.frombuffer(data, "<f8", n * m * d, offset).reshape((n, m, d), order="F").copy()
        offset += 8 * n * m * d
        marks = np.frombuffer(data, "u1", n * m, offset).reshape((n, m), order="F").astype(bool)
        with open(path + ".json", "r", encoding="utf-8") as f:
            meta = json.load(f)
        return cls(times, states, marks, meta["scheme"], int(meta["master_seed"]), meta["initial_law"])

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per (path, time)."""
        n, m, d = self.states.shape
        frame = pd.DataFrame({"path": np.repeat(np.arange(n), m), "t": np.tile(self.times, n)})
        for j in range(d):
            frame[f"x{j}"] = self.states[:, :, j].ravel()
        frame["jump"] = self.jump_marks.ravel()
        return frame

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)


def _run_block(scheme: Scheme, start: np.ndarray, times: np.ndarray, rng: np.random.Generator,
               first_index: int) -> Tuple[np.ndarray, np.ndarray]:
    n, d = start.shape
    states = np.empty((n, times.size, d))
    marks = np.zeros((n, times.size), dtype=bool)
    states[:, 0] = start
    current = start
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        nxt = scheme.step(current, dt, rng)
        bad = ~np.all(np.isfinite(nxt), axis=1) | (np.max(np.abs(nxt), axis=1) > config.blowup_threshold)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise SimulationBlowUp(f"path {first_index + i} left every compact set at t={times[k]:g}",
                                   float(times[k]), first_index + i)
        marks[:, k] = np.max(np.abs(nxt - current), axis=1) > config.jump_mark_threshold
        states[:, k] = nxt
        current = nxt
    return states, marks


def simulate_sde_path(drift: Any, sigma: Any, driver: Any, x0: Any, T: float, dt: float,
                      rng: np.random.Generator) -> PathSkeleton:
    """One Euler path of dX = b(X-)dt + σ(X-)dL from x0.

    Raises:
        SimulationBlowUp: when the state leaves the ball of radius config.blowup_threshold
    """
    scheme = SDEScheme(drift, sigma, driver)
    times = time_grid(T, dt)
    states, marks = _run_block(scheme, as_point(x0, scheme.dimension)[None, :], times, rng, 0)
    return PathSkeleton(times, states[0], tuple(np.flatnonzero(marks[0])))


def simulate_ensemble(scheme: Union[Scheme, Mapping[str, Any]], initial_law: Any, n_paths: int, T: float,
                      dt: float, master_seed: int, max_workers: Optional[int] = None) -> SolutionEnsemble:
    """N independent paths from the initial law.

    Block b of config.block_size paths draws its initial states and then its increments from
    path_stream(master_seed, b); the result does not depend on max_workers.

    Raises:
        ParameterError: when n_paths < 1 or the grid is invalid
        SimulationBlowUp: with the global index of the first path that blew up
    """
    scheme = make_scheme(scheme)
    law = make_initial_law(initial_law)
    if int(n_paths) < 1:
        raise ParameterError(f"need at least one path, got {n_paths}")
    times = time_grid(T, dt)
    size = config.block_size
    blocks = [(b, min(size, n_paths - b * size)) for b in range((n_paths + size - 1) // size)]

    def run(block: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        b, count = block
        rng = path_stream(master_seed, b)
        start = law.sample(rng, count)
        logger.debug("simulating block %d (%d paths)", b, count)
        return _run_block(scheme, start, times, rng, b * size)

    with ThreadPoolExecutor(max_workers=max_workers or config.threads) as executor:
        results = list(executor.map(run, blocks))
    states = np.concatenate([r[0] for r in results])
    marks = np.concatenate([r[1] for r in results])
    logger.info("simulated %d paths to T=%g with dt=%g", n_paths, T, dt)
    return SolutionEnsemble(times, states, marks, scheme.to_dict(), int(master_seed), law.to_dict())


class Selection(str, enum.Enum):
    """The two displayed solutions of dX = 2 sgn(X)√|X| dt; they differ only at x = 0."""
    X_BRANCH = "X_branch"
    Y_BRANCH = "Y_branch"


def ode_selection_path(x0: float, selection: Union[Selection, str], T: float, dt: float) -> PathSkeleton:
    """Closed-form selection path: (t + √x)² upward or -(t + √-x)² downward, evaluated on the grid."""
    selection = Selection(selection)
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    times = time_grid(T, dt)
    x0 = float(x0)
    up = x0 > 0 or (x0 == 0 and selection == Selection.X_BRANCH)
    if up:
        states = (times + math.sqrt(x0)) ** 2
    else:
        states = -(times + math.sqrt(-x0)) ** 2
    return PathSkeleton(times, states[:, None])


def ode_selection_ensemble(x0: float, selection: Union[Selection, str], T: float, dt: float) -> SolutionEnsemble:
    """A one-path ensemble holding an ODE selection, for the resolvent and selection checks."""
    path = ode_selection_path(x0, selection, T, dt)
    return SolutionEnsemble.from_paths([path], {"kind": "ode_selection", "selection": Selection(selection).value},
                                       0, Dirac(x0).to_dict())


@dataclass(frozen=True)
class ExitSample:
    """First grid exits from the open ball B(center, radius).

    ``positions`` holds the state at the exit step (overshoot kept), or the final state for paths that did not
    exit by the horizon.
    """
    positions: np.ndarray
    times: np.ndarray
    exited: np.ndarray
    start: np.ndarray
    center: np.ndarray
    radius: float
    horizon: float
    dt: float
    bridge: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_fraction(self) -> float:
        return float(np.mean(self.exited))


def _exit_block(scheme: Scheme, start: np.ndarray, center: np.ndarray, radius: float, steps: int, dt: float,
                rng: np.random.Generator, first_index: int,
                bridge: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = start.shape
    pos = start.copy()
    times = np.full(n, steps * dt)
    exited = np.linalg.norm(start - center, axis=1) >= radius
    times[exited] = 0.0
    active = ~exited
    for k in range(1, steps + 1):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        cur = pos[idx]
        nxt = scheme.step(cur, dt, rng)
        bad = ~np.all(np.isfinite(nxt), axis=1) | (np.max(np.abs(nxt), axis=1) > config.blowup_threshold)
        if np.any(bad):
            i = int(idx[np.argmax(bad)])
            raise SimulationBlowUp(f"path {first_index + i} left every compact set at t={k * dt:g}", k * dt,
                                   first_index + i)
        out = np.linalg.norm(nxt - center, axis=1) >= radius
        if bridge:
            a = radius - np.linalg.norm(cur - center, axis=1)
            b = np.maximum(radius - np.linalg.norm(nxt - center, axis=1), 0.0)
            var = scheme.step_variance(cur, dt)
            with np.errstate(divide="ignore", over="ignore"):
                p = np.where(var > 0, np.exp(-2.0 * a * b / np.where(var > 0, var, 1.0)), 0.0)
            u = rng.uniform(0.0, 1.0, idx.size)
            crossed = (~out) & (u < p)
            if np.any(crossed):
                # the continuous path touched the sphere between grid times
                direction = nxt[crossed] - center
                norm = np.linalg.norm(direction, axis=1)
                direction = direction / np.where(norm > 0, norm, 1.0)[:, None]
                nxt[crossed] = center + radius * direction
                out = out | crossed
        pos[idx] = nxt
        newly = idx[out]
        times[newly] = k * dt
        exited[newly] = True
        active[newly] = False
    return pos, times, exited


def simulate_until_exit(scheme: Union[Scheme, Mapping[str, Any]], x: Any, center: Any, radius: float,
                        n_paths: int, T_max: float, dt: float, master_seed: int,
                        bridge: Optional[bool] = None, max_workers: Optional[int] = None) -> ExitSample:
    """Simulate paths from x until the first grid time they leave the open ball B(center, radius).

    Args:
        scheme: The path scheme
        x: Starting point
        center: Ball center
        radius: Ball radius
        n_paths: Number of paths
        T_max: Horizon; paths still inside are reported as not exited
        dt: Step
        master_seed: Seed of the block streams
        bridge: Brownian-bridge correction for continuous schemes (config.bridge_correction if None)
        max_workers: Threads, config.threads if None
    """
    scheme = make_scheme(scheme)
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    d = scheme.dimension
    start = as_point(x, d)
    c = as_point(center, d)
    steps = len(time_grid(T_max, dt)) - 1
    use_bridge = (config.bridge_correction if bridge is None else bridge) and scheme.continuous
    size = config.block_size
    blocks = [(b, min(size, n_paths - b * size)) for b in range((n_paths + size - 1) // size)]

    def run(block: Tuple[int, int]):
        b, count = block
        rng = path_stream(master_seed, b)
        return _exit_block(scheme, np.broadcast_to(start, (count, d)).copy(), c, float(radius), steps, dt, rng,
                           b * size, use_bridge)

    with ThreadPoolExecutor(max_workers=max_workers or config.threads) as executor:
        results = list(executor.map(run, blocks))
    sample = ExitSample(np.concatenate([r[0] for r in results]), np.concatenate([r[1] for r in results]),
                        np.concatenate([r[2] for r in results]), start, c, float(radius), float(T_max), float(dt),
                        use_bridge)
    logger.debug("exit simulation from %s: %.4f of %d paths exited by T=%g", start, sample.exit_fraction, n_paths,
                 T_max)
    return sample
