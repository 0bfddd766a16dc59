"""Smooth Hölder approximations of bounded measurable functions.

A bounded measurable f is convolved with the concentrating mollifier
χ_n(x) = n χ(nx), where χ(y) = e^{-1/(1-y²)}/Z on (-1, 1).  The result f_n is
smooth, satisfies inf f ≤ f_n ≤ sup f and ‖f_n‖_∞ ≤ ‖f‖_∞, and is Lipschitz with
constant ‖f‖_∞·n·‖χ'‖_{L¹}.  From that Lipschitz constant a Hölder exponent
α_n ∈ (0, 1] is chosen so that ‖f_n‖_{α_n} ≤ 4‖f‖_∞.  These certified
properties are what the approximating SDE symbols need.

Example::

    >>> from levy_mp.mollify import mollify_sequence
    >>> step = lambda x: (x >= 0).astype(float)
    >>> f8 = mollify_sequence(step, 8, bound=1.0, breakpoints=[0.0])
    >>> round(float(f8(0.0)), 6), round(f8.alpha, 3)
    (0.5, 0.157)
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from levy_mp import quadrature
from levy_mp.coefficients import Coefficient
from levy_mp.config import config
from levy_mp.exceptions import ParameterError

__all__ = ["holder_exponent_for_lipschitz", "mollifier", "mollifier_cdf", "mollifier_derivative_norm",
           "MollifiedFunction", "mollify_sequence", "mollify_coefficient", "holder_quotient",
           "null_set_modification"]

logger = logging.getLogger(__name__)

_BASE_PANELS = 8


def holder_exponent_for_lipschitz(L: float) -> float:
    """The largest α ∈ (0, 1] with 2L^α ≤ 3.

    Raises:
        ParameterError: when L is not positive
    """
    if not L > 0:
        raise ParameterError(f"Lipschitz constant must be positive, got {L}")
    if L <= 1.5:
        return 1.0
    return min(1.0, math.log(1.5) / math.log(L))


def _bump(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1
    ys = np.where(inside, y, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - ys ** 2)), 0.0)


@lru_cache(maxsize=1)
def _normalizer() -> float:
    y, w = quadrature.panel_rule(np.linspace(-1.0, 1.0, 65), 32)
    return float(np.sum(w * _bump(y)))


def mollifier(y: Any) -> np.ndarray:
    """χ(y) = e^{-1/(1-y²)}/Z on (-1, 1), 0 elsewhere; a probability density."""
    return _bump(y) / _normalizer()


def mollifier_derivative_norm() -> float:
    """‖χ'‖_{L¹} = 2χ(0), since χ is even and increasing on (-1, 0)."""
    return 2.0 * math.exp(-1.0) / _normalizer()


def mollifier_cdf(t: Any) -> np.ndarray:
    """∫_{-1}^t χ(y) dy, so that the mollified step 1_{[0,∞)} is f_n(x) = mollifier_cdf(nx)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tc = np.clip(t, -1.0, 1.0)
    u, wu = quadrature.gauss_legendre(64)
    half = 0.5 * (tc + 1.0)
    y = -1.0 + half[:, None] * (u[None, :] + 1.0)
    values = (half[:, None] * wu[None, :] * mollifier(y)).sum(axis=1)
    return np.where(t >= 1.0, 1.0, np.where(t <= -1.0, 0.0, values))


@lru_cache(maxsize=4)
def _base_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    y, w = quadrature.panel_rule(np.linspace(-1.0, 1.0, _BASE_PANELS + 1), nodes)
    wc = w * mollifier(y)
    return y, wc / wc.sum()


def _split_rule(cuts: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = np.unique(np.concatenate([np.linspace(-1.0, 1.0, _BASE_PANELS + 1), cuts]))
    y, w = quadrature.panel_rule(edges, nodes)
    wc = w * mollifier(y)
    return y, wc / wc.sum()


@dataclass(frozen=True)
class MollifiedFunction:
    """f_n = f * χ_n with certified metadata.

    ``alpha`` is the Hölder exponent with ‖f_n‖_α ≤ ``holder_bound`` = 4·``sup_bound``; ``lower`` is inf f.
    """
    base: Callable[[np.ndarray], np.ndarray]
    n: int
    sup_bound: float
    lower: float
    breakpoints: Tuple[float, ...] = ()
    nodes: int = 16
    lipschitz: float = field(init=False)
    alpha: float = field(init=False)
    holder_bound: float = field(init=False)

    def __post_init__(self):
        lip = self.sup_bound * self.n * mollifier_derivative_norm()
        object.__setattr__(self, "lipschitz", lip)
        # the exponent comes from the normalized constant Lip(f_n)/‖f‖_∞ = n‖χ'‖₁
        object.__setattr__(self, "alpha", holder_exponent_for_lipschitz(self.n * mollifier_derivative_norm()))
        object.__setattr__(self, "holder_bound", 4.0 * self.sup_bound)

    def __call__(self, x: Any) -> Union[float, np.ndarray]:
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        out = np.empty(flat.shape)
        y, w = _base_rule(self.nodes)
        bps = np.asarray(self.breakpoints, dtype=float)
        # y-positions where x - y/n crosses a breakpoint
        cuts = self.n * (flat[:, None] - bps[None, :]) if bps.size else np.zeros((flat.size, 0))
        near = np.any(np.abs(cuts) < 1.0, axis=1) if bps.size else np.zeros(flat.size, dtype=bool)
        far = ~near
        if np.any(far):
            pts = flat[far, None] - y[None, :] / self.n
            out[far] = np.asarray(self.base(pts.ravel()), dtype=float).reshape(pts.shape) @ w
        for i in np.flatnonzero(near):
            ys, ws = _split_rule(cuts[i][np.abs(cuts[i]) < 1.0], self.nodes)
            out[i] = float(np.asarray(self.base(flat[i] - ys / self.n), dtype=float) @ ws)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "alpha": self.alpha, "lipschitz": self.lipschitz, "sup_bound": self.sup_bound,
                "holder_bound": self.holder_bound, "lower": self.lower}


def _sample_points(breakpoints: Sequence[float]) -> np.ndarray:
    grid = np.linspace(-config.probe_radius, config.probe_radius, config.probe_points)
    extra = [b + e for b in breakpoints for e in (-1e-9, 0.0, 1e-9)]
    return np.unique(np.concatenate([grid, np.asarray(extra, dtype=float)]))


def mollify_sequence(f: Union[Callable[[np.ndarray], np.ndarray], Coefficient], n: int,
                     bound: Optional[float] = None, breakpoints: Sequence[float] = (),
                     lower: Optional[float] = None) -> MollifiedFunction:
    """The n-th mollification f_n = f * χ_n of a bounded measurable function on the line.

    Args:
        f: A vectorized callable, or a Coefficient (which supplies bound, breakpoints and lower bound)
        n: Mollification level, n ≥ 1
        bound: Declared ‖f‖_∞
        breakpoints: Discontinuities of f; the convolution quadrature is split there
        lower: Declared inf f (sampled when omitted)

    Raises:
        ParameterError: when n < 1, the bound is missing or infinite, or sampled values exceed it
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"mollification level must be a positive integer, got {n}")
    if isinstance(f, Coefficient):
        bound = f.bound if bound is None else bound
        breakpoints = tuple(breakpoints) or f.breakpoints
        lower = f.lower if lower is None else lower
    if bound is None or not np.isfinite(bound):
        raise ParameterError("mollification needs a finite declared bound ‖f‖_∞")
    points = _sample_points(breakpoints)
    values = np.asarray(f(points), dtype=float)
    bad = np.abs(values) > bound * (1 + 1e-12) + 1e-12
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ParameterError(f"|f(x)| = {abs(values[i]):.6g} exceeds the declared bound {bound:.6g} "
                             f"at x={points[i]:.6g}", point=float(points[i]))
    if lower is None:
        lower = float(np.min(values))
    result = MollifiedFunction(f, int(n), float(bound), float(lower), tuple(float(b) for b in breakpoints))
    logger.debug("mollified at level %d: alpha_n=%.6g, Lipschitz bound %.6g", n, result.alpha, result.lipschitz)
    return result


def mollify_coefficient(coefficient: Coefficient, n: int) -> Coefficient:
    """A smooth coefficient f_n for an SDE symbol, keeping the bound and lower bound of the original."""
    smooth = mollify_sequence(coefficient, n)
    return Coefficient("mollified", smooth, coefficient.bound, coefficient.lower, (), True,
                       {"base": coefficient.to_dict(), **smooth.to_dict()})


def holder_quotient(fn: Callable[[np.ndarray], np.ndarray], alpha: float, x: Any, y: Any) -> float:
    """sup over the pairs (x_i, y_i) with x_i ≠ y_i of |fn(x_i) - fn(y_i)| / |x_i - y_i|^α."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    keep = x != y
    if not np.any(keep):
        return 0.0
    x, y = x[keep], y[keep]
    diff = np.abs(np.asarray(fn(x), dtype=float) - np.asarray(fn(y), dtype=float))
    return float(np.max(diff / np.abs(x - y) ** alpha))


def null_set_modification(coefficient: Coefficient, points: Sequence[float], value: float = 0.0) -> Coefficient:
    """β(x) = α(x) off the finite set A = ``points`` and β = ``value`` on A.

    With value 0 this is α·1_{ℝ∖A}.  β and α agree Lebesgue-almost everywhere.
    """
    marks = np.asarray(sorted(float(p) for p in points))

    def fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        hit = np.isin(x, marks)
        return np.where(hit, value, coefficient(x))

    return Coefficient("null_set_modification", fn, max(coefficient.bound, abs(value)),
                       min(coefficient.lower, value), tuple(sorted(set(coefficient.breakpoints) | set(marks))),
                       False, {"base": coefficient.to_dict(), "points": marks.tolist(), "value": value})
