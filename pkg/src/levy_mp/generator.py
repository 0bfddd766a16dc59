"""Test functions and the operator A applied to them.

A Lévy-type operator acts on f ∈ C_c^∞ in two equivalent ways: as a Fourier
multiplier,

    Af(x) = -∫ e^{ix·ξ} q(x, ξ) f̂(ξ) dξ,    f̂(ξ) = (2π)^{-d} ∫ e^{-ix·ξ} f(x) dx,

and in integro-differential form,

    Af(x) = b(x)·∇f(x) + ½ tr(Q(x)∇²f(x)) + ∫ (f(x+y) - f(x) - ∇f(x)·y 1_{(0,1)}(|y|)) ν(x, dy).

Both are implemented so that they can be checked against each other.  The
test functions carry analytic derivatives, their ‖·‖_(2) norm and a lazily
cached Fourier transform.

Key Features:
    * The smooth radial bump u_R with u = 1 on B(0, R/2) and u = 0 off B(0, R)
    * Gaussians with analytic transform, products and linear combinations
    * Frequency integrals by blocks of Gauss-Legendre panels with a tail stopping rule
    * The bump constant c = 2∫(1+|η|²)|û(η)|dη of the maximal inequality
    * Lattice tabulation of Af exported as a DataFrame (x, Af, form, residual)

Classes:
    TestFunction: A smooth function with derivatives, norms and Fourier transform.

Example::

    >>> from levy_mp.catalog import make_catalog_symbol
    >>> from levy_mp.generator import apply_integro, make_gaussian
    >>> sym = make_catalog_symbol("levy", psi={"kind": "gaussian", "covariance": 2.0})
    >>> round(apply_integro(sym, make_gaussian(1.0), 0.0), 8)
    -2.0

See Also:
    levy_mp.levy_core: Symbols and triplets
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from levy_mp import quadrature
from levy_mp.config import config
from levy_mp.exceptions import ParameterError, PreconditionError, QuadratureError
from levy_mp.levy_core import AtomicJumps, JumpDensity, SymbolField, eval_symbol, tail_mass
from levy_mp.utils import as_point, as_points, records_frame

__all__ = ["TestFunction", "make_bump", "make_gaussian", "make_test_function", "multiply", "combine", "zero_function",
           "constant_function", "bump_profile", "bump_constant", "standard_bump_constant", "integrate_frequency",
           "fourier_integral", "apply_integro", "apply_fourier", "tabulate_operator", "lattice_frame",
           "operator_interpolant"]

logger = logging.getLogger(__name__)

PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A smooth test function on ℝ^d.

    The callables take points of shape (n, d) and return values (n,), gradients (n, d) and Hessians (n, d, d).
    ``support_radius`` is the radius of a closed ball about the origin containing the support (``inf`` when
    unbounded) and ``extent`` is an interval outside which the function is negligible (used for numeric
    transforms and jump integrals on the line).  Norms are upper bounds of the sampled sups.
    """
    __test__ = False

    name: str
    dimension: int
    value_fn: PointFn
    gradient_fn: PointFn
    hessian_fn: PointFn
    support_radius: float
    sup_norm: float
    gradient_norm: float
    hessian_norm: float
    extent: Tuple[float, float] = (-math.inf, math.inf)
    fourier_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: Dict[str, Any] = field(default_factory=dict)
    _fourier_cache: Dict[Tuple, Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(
        default_factory=dict, init=False, repr=False)

    @property
    def norm_2(self) -> float:
        """‖f‖_(2) = ‖f‖_∞ + ‖∇f‖_∞ + ‖∇²f‖_∞."""
        return self.sup_norm + self.gradient_norm + self.hessian_norm

    @property
    def is_zero(self) -> bool:
        return self.norm_2 == 0

    def value(self, x: Any) -> Union[float, np.ndarray]:
        points, single = as_points(x, self.dimension)
        values = np.asarray(self.value_fn(points), dtype=float)
        return float(values[0]) if single else values

    def gradient(self, x: Any) -> np.ndarray:
        points, single = as_points(x, self.dimension)
        values = np.asarray(self.gradient_fn(points), dtype=float)
        return values[0] if single else values

    def hessian(self, x: Any) -> np.ndarray:
        points, single = as_points(x, self.dimension)
        values = np.asarray(self.hessian_fn(points), dtype=float)
        return values[0] if single else values

    def __call__(self, x: Any) -> Union[float, np.ndarray]:
        return self.value(x)

    def fourier(self, xi: Any) -> np.ndarray:
        """f̂ at one-dimensional frequencies (analytic when available, else a panel transform over ``extent``)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if self.fourier_fn is not None:
            return np.asarray(self.fourier_fn(xi), dtype=complex)
        if self.dimension != 1:
            raise PreconditionError("numeric Fourier transforms are one-dimensional")
        lo, hi = self.extent
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise PreconditionError(f"'{self.name}' has no integrable Fourier transform")
        return _panel_transform(lambda t: self.value_fn(t.reshape(-1, 1)), lo, hi, xi)

    def fourier_block(self, index: int, width: float, panels: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nodes, weights and f̂ values on the frequency block [index·panels·width, (index+1)·panels·width]."""
        key = (index, width, panels, config.gl_nodes)
        hit = self._fourier_cache.get(key)
        if hit is None:
            edges = width * (index * panels + np.arange(panels + 1, dtype=float))
            eta, w = quadrature.panel_rule(edges)
            hit = (eta, w, self.fourier(eta))
            self._fourier_cache[key] = hit
        return hit


def _panel_transform(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, xi: np.ndarray,
                     chunk: int = 64) -> np.ndarray:
    """(2π)^{-1} ∫_lo^hi e^{-ixξ} fn(x) dx with panels refined for the largest |ξ|."""
    out = np.zeros(xi.shape, dtype=complex)
    if hi <= lo or xi.size == 0:
        return out
    top = float(np.max(np.abs(xi)))
    count = max(32, int(np.ceil((hi - lo) * top / 4.0)))
    x, w = quadrature.panel_rule(np.linspace(lo, hi, count + 1))
    fw = w * np.asarray(fn(x), dtype=float)
    for start in range(0, xi.size, chunk):
        part = xi[start:start + chunk]
        out[start:start + chunk] = np.exp(-1j * np.outer(part, x)) @ fw
    return out / (2 * np.pi)


_G_MIN = 1.0 / 700.0


def _g(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """g(t) = e^{-1/t} for t > 0 (0 otherwise) with its first two derivatives."""
    pos = t > _G_MIN
    ts = np.where(pos, t, 1.0)
    g = np.where(pos, np.exp(-1.0 / ts), 0.0)
    g1 = g / ts ** 2
    g2 = g * (1.0 / ts ** 4 - 2.0 / ts ** 3)
    return g, g1, g2


def bump_profile(rho: Any) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radial profile h of the standard bump and its derivatives.

    h = 1 on [0, ½], h = 0 on [1, ∞) and h(ρ) = φ(2ρ - 1) in between, where φ(s) = g(1-s) / (g(1-s) + g(s)).
    """
    rho = np.asarray(rho, dtype=float)
    s = np.clip(2.0 * rho - 1.0, 0.0, 1.0)
    a, a1, a2 = _g(1.0 - s)
    b, b1, b2 = _g(s)
    a1 = -a1
    den = a + b
    num = a1 * b - a * b1
    phi = a / den
    phi1 = num / den ** 2
    phi2 = ((a2 * b - a * b2) * den - 2.0 * num * (a1 + b1)) / den ** 3
    inside = (rho > 0.5) & (rho < 1.0)
    h = np.where(rho <= 0.5, 1.0, np.where(inside, phi, 0.0))
    return h, np.where(inside, 2.0 * phi1, 0.0), np.where(inside, 4.0 * phi2, 0.0)


@lru_cache(maxsize=4)
def _profile_norms(dimension: int) -> Tuple[float, float]:
    rho = np.linspace(0.5, 1.0, 20001)
    _, h1, h2 = bump_profile(rho)
    grad = float(np.max(np.abs(h1)))
    hess = float(np.max(np.abs(h2)))
    if dimension > 1:
        hess = max(hess, float(np.max(np.abs(h1) / rho)))
    return grad * (1 + 1e-3), hess * (1 + 1e-3)


def _standard_bump_hat(xi: np.ndarray) -> np.ndarray:
    """Transform of the standard one-dimensional bump (R = 1), real and even."""
    xi = np.abs(np.asarray(xi, dtype=float))
    safe = np.where(xi > 0, xi, 1.0)
    flat = np.where(xi > 0, np.sin(0.5 * safe) / safe, 0.5)
    # the profile is 1 on [0, ½]; only the transition layer needs quadrature
    out = np.zeros(xi.shape)
    top = float(np.max(xi)) if xi.size else 0.0
    count = max(32, int(np.ceil(0.5 * top / 4.0)))
    x, w = quadrature.panel_rule(np.linspace(0.5, 1.0, count + 1))
    hw = w * bump_profile(x)[0]
    for start in range(0, xi.size, 64):
        part = xi[start:start + 64]
        out[start:start + 64] = np.cos(np.outer(part, x)) @ hw
    return (flat + out) / np.pi + 0j


def make_bump(R: float = 1.0, dimension: int = 1, center: Any = None) -> TestFunction:
    """The bump u_R = u(·/R), shifted to ``center`` when given.

    u is smooth and radial with 0 ≤ u ≤ 1, u = 1 on B(0, 1/2) and u = 0 off B(0, 1).

    Raises:
        ParameterError: when R is not positive
    """
    if not R > 0:
        raise ParameterError(f"bump radius must be positive, got {R}")
    d = int(dimension)
    c = np.zeros(d) if center is None else as_point(center, d)
    R = float(R)

    def geometry(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        diff = x - c[None, :]
        r = np.linalg.norm(diff, axis=1)
        e = diff / np.where(r > 0, r, 1.0)[:, None]
        return r, e

    def value(x: np.ndarray) -> np.ndarray:
        r, _ = geometry(x)
        return bump_profile(r / R)[0]

    def gradient(x: np.ndarray) -> np.ndarray:
        r, e = geometry(x)
        _, h1, _ = bump_profile(r / R)
        return (h1 / R)[:, None] * e

    def hessian(x: np.ndarray) -> np.ndarray:
        r, e = geometry(x)
        _, h1, h2 = bump_profile(r / R)
        outer = np.einsum("ni,nj->nij", e, e)
        radial = (h2 / R ** 2)[:, None, None] * outer
        if d == 1:
            return radial
        tangential = (h1 / (R * np.where(r > 0, r, 1.0)))[:, None, None] * (np.eye(d)[None, :, :] - outer)
        return radial + tangential

    fourier = None
    if d == 1:
        shift = float(c[0])

        def fourier(xi: np.ndarray) -> np.ndarray:
            return R * _standard_bump_hat(R * xi) * np.exp(-1j * shift * xi)

    grad_norm, hess_norm = _profile_norms(d)
    extent = (float(c[0]) - R, float(c[0]) + R) if d == 1 else (-math.inf, math.inf)
    return TestFunction(f"bump(R={R:g})", d, value, gradient, hessian, float(np.linalg.norm(c)) + R, 1.0,
                        grad_norm / R, hess_norm / R ** 2, extent, fourier,
                        {"kind": "bump", "R": R, "center": c.tolist()})


def make_gaussian(a: float = 1.0, center: Any = None, dimension: int = 1) -> TestFunction:
    """f(x) = e^{-a|x-c|²} with f̂(ξ) = (2π)^{-d}(π/a)^{d/2} e^{-|ξ|²/(4a)} e^{-ic·ξ}."""
    if not a > 0:
        raise ParameterError(f"Gaussian rate must be positive, got {a}")
    d = int(dimension)
    c = np.zeros(d) if center is None else as_point(center, d)

    def value(x: np.ndarray) -> np.ndarray:
        return np.exp(-a * np.sum((x - c) ** 2, axis=1))

    def gradient(x: np.ndarray) -> np.ndarray:
        diff = x - c
        return -2.0 * a * diff * value(x)[:, None]

    def hessian(x: np.ndarray) -> np.ndarray:
        diff = x - c
        m = 4.0 * a ** 2 * np.einsum("ni,nj->nij", diff, diff) - 2.0 * a * np.eye(d)[None, :, :]
        return m * value(x)[:, None, None]

    def fourier(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float).reshape(-1, d)
        scale = (2 * np.pi) ** (-d) * (np.pi / a) ** (d / 2)
        return scale * np.exp(-np.sum(xi ** 2, axis=1) / (4 * a)) * np.exp(-1j * (xi @ c))

    width = math.sqrt(40.0 / a)
    extent = (float(c[0]) - width, float(c[0]) + width) if d == 1 else (-math.inf, math.inf)
    return TestFunction(f"gaussian(a={a:g})", d, value, gradient, hessian, math.inf, 1.0,
                        math.sqrt(2 * a) * math.exp(-0.5), 2.0 * a, extent, fourier,
                        {"kind": "gaussian", "a": a, "center": c.tolist()})


def multiply(f: TestFunction, g: TestFunction) -> TestFunction:
    """The product fg with product-rule derivatives and norm bounds."""
    if f.dimension != g.dimension:
        raise ParameterError("cannot multiply test functions of different dimensions")

    def value(x):
        return f.value_fn(x) * g.value_fn(x)

    def gradient(x):
        return f.value_fn(x)[:, None] * g.gradient_fn(x) + g.value_fn(x)[:, None] * f.gradient_fn(x)

    def hessian(x):
        fv, gv = f.value_fn(x), g.value_fn(x)
        fg, gg = f.gradient_fn(x), g.gradient_fn(x)
        cross = np.einsum("ni,nj->nij", fg, gg)
        return (fv[:, None, None] * g.hessian_fn(x) + gv[:, None, None] * f.hessian_fn(x)
                + cross + np.transpose(cross, (0, 2, 1)))

    extent = (max(f.extent[0], g.extent[0]), min(f.extent[1], g.extent[1]))
    return TestFunction(f"{f.name}*{g.name}", f.dimension, value, gradient, hessian,
                        min(f.support_radius, g.support_radius), f.sup_norm * g.sup_norm,
                        f.sup_norm * g.gradient_norm + g.sup_norm * f.gradient_norm,
                        f.sup_norm * g.hessian_norm + g.sup_norm * f.hessian_norm
                        + 2 * f.gradient_norm * g.gradient_norm,
                        extent, None, {"kind": "product", "factors": [f.params, g.params]})


def combine(alpha: float, f: TestFunction, beta: float, g: TestFunction) -> TestFunction:
    """The linear combination αf + βg."""
    if f.dimension != g.dimension:
        raise ParameterError("cannot combine test functions of different dimensions")

    fourier = None
    if f.fourier_fn is not None and g.fourier_fn is not None:
        def fourier(xi):
            return alpha * f.fourier_fn(xi) + beta * g.fourier_fn(xi)

    def support(h: TestFunction, weight: float) -> float:
        return 0.0 if weight == 0 else h.support_radius

    extent = (min(f.extent[0], g.extent[0]), max(f.extent[1], g.extent[1]))
    return TestFunction(f"{alpha:g}*{f.name}+{beta:g}*{g.name}", f.dimension,
                        lambda x: alpha * f.value_fn(x) + beta * g.value_fn(x),
                        lambda x: alpha * f.gradient_fn(x) + beta * g.gradient_fn(x),
                        lambda x: alpha * f.hessian_fn(x) + beta * g.hessian_fn(x),
                        max(support(f, alpha), support(g, beta)),
                        abs(alpha) * f.sup_norm + abs(beta) * g.sup_norm,
                        abs(alpha) * f.gradient_norm + abs(beta) * g.gradient_norm,
                        abs(alpha) * f.hessian_norm + abs(beta) * g.hessian_norm,
                        extent, fourier,
                        {"kind": "combination", "weights": [alpha, beta], "terms": [f.params, g.params]})


def zero_function(dimension: int = 1) -> TestFunction:
    d = int(dimension)
    return TestFunction("zero", d, lambda x: np.zeros(x.shape[0]), lambda x: np.zeros(x.shape),
                        lambda x: np.zeros((x.shape[0], d, d)), 0.0, 0.0, 0.0, 0.0, (0.0, 0.0),
                        lambda xi: np.zeros(np.asarray(xi).shape[0], dtype=complex), {"kind": "zero"})


def constant_function(value: float, dimension: int = 1) -> TestFunction:
    """f ≡ value.  Bounded and smooth but without compact support or integrable transform."""
    d = int(dimension)
    return TestFunction(f"constant({value:g})", d, lambda x: np.full(x.shape[0], float(value)),
                        lambda x: np.zeros(x.shape), lambda x: np.zeros((x.shape[0], d, d)), math.inf,
                        abs(float(value)), 0.0, 0.0, (-math.inf, math.inf), None,
                        {"kind": "constant", "value": value})


def make_test_function(spec: Union[TestFunction, Dict[str, Any]]) -> TestFunction:
    """Build a test function from a mapping with ``kind`` "bump", "gaussian", "constant", "zero" or "product".

    "product" takes ``factors``, a list of specs.
    """
    if isinstance(spec, TestFunction):
        return spec
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "product":
        factors = [make_test_function(s) for s in spec.pop("factors", [])]
        if len(factors) < 2:
            raise ParameterError("a product test function needs at least two factors")
        result = factors[0]
        for factor in factors[1:]:
            result = multiply(result, factor)
        return result
    builders = {"bump": make_bump, "gaussian": make_gaussian, "constant": constant_function, "zero": zero_function}
    if kind not in builders:
        raise ParameterError(f"Unknown test function '{kind}'. Known kinds: {sorted(builders) + ['product']}")
    try:
        return builders[kind](**spec)
    except TypeError as e:
        raise ParameterError(f"Invalid parameters for test function '{kind}': {e}") from e


def integrate_frequency(f: TestFunction, integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
                        width: Optional[float] = None, what: str = "frequency integral") -> complex:
    """∫_0^∞ integrand(η, f̂(η)) dη by blocks, stopping after two consecutive negligible blocks.

    A block is negligible when ∫|integrand| over it is below config.fourier_tail_tolerance relative to the
    running total.

    Raises:
        QuadratureError: when the cutoff config.fourier_max_frequency is reached first
    """
    width = width or config.fourier_panel_width
    panels = config.fourier_block_panels
    total = 0j
    scale = 0.0
    quiet = 0
    index = 0
    while True:
        eta, w, fhat = f.fourier_block(index, width, panels)
        values = np.asarray(integrand(eta, fhat), dtype=complex)
        total += complex(np.sum(w * values))
        mass = float(np.sum(w * np.abs(values)))
        scale += mass
        quiet = quiet + 1 if mass < config.fourier_tail_tolerance * max(1.0, scale) else 0
        index += 1
        if quiet >= 2:
            break
        if index * panels * width >= config.fourier_max_frequency:
            raise QuadratureError(f"{what} for '{f.name}' did not reach its tail before "
                                  f"|ξ| = {config.fourier_max_frequency:g}",
                                  {"value": total, "last_block": mass, "blocks": index})
    logger.debug("%s for %s: %d blocks up to |ξ| = %g", what, f.name, index, index * panels * width)
    return total


def bump_constant(u: TestFunction) -> float:
    """c = 2 ∫ (1 + |η|²) |û(η)| dη over the line.

    Raises:
        QuadratureError: when the Fourier tail is too heavy
    """
    if u.is_zero:
        return 0.0
    if u.dimension != 1:
        raise PreconditionError("the bump constant is computed on the real line")
    half = integrate_frequency(u, lambda eta, fhat: (1 + eta ** 2) * np.abs(fhat),
                               config.fourier_panel_width / 4, "bump constant")
    return 4.0 * half.real


@lru_cache(maxsize=1)
def standard_bump_constant() -> float:
    """The bump constant of the standard one-dimensional bump u = u_1."""
    value = bump_constant(make_bump(1.0))
    logger.info("standard bump constant c = %.10g", value)
    return value


def fourier_integral(f: TestFunction, x: float, multiplier: Callable[[np.ndarray], np.ndarray]) -> complex:
    """∫ e^{ixξ} m(ξ) f̂(ξ) dξ over the line, for a multiplier m vectorized over ξ.

    Both half lines share the cached blocks of f̂ through f̂(-ξ) = conj f̂(ξ).
    """
    x = float(x)

    def integrand(eta: np.ndarray, fhat: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * x * eta)
        plus = phase * np.asarray(multiplier(eta), dtype=complex) * fhat
        minus = np.conj(phase) * np.asarray(multiplier(-eta), dtype=complex) * np.conj(fhat)
        return plus + minus

    return integrate_frequency(f, integrand, what="Fourier integral")


def _fourier_apply(sym: SymbolField, f: TestFunction, x: float) -> Tuple[float, float]:
    if sym.dimension != 1:
        raise PreconditionError("the Fourier form is evaluated on the real line")
    if f.is_zero:
        return 0.0, 0.0
    point = float(as_point(x, 1)[0])
    value = -fourier_integral(f, point, lambda eta: np.atleast_1d(eval_symbol(sym, point, eta)))
    return float(value.real), float(value.imag)


def apply_fourier(sym: SymbolField, f: TestFunction, x: Any) -> float:
    """Af(x) = -∫ e^{ixξ} q(x, ξ) f̂(ξ) dξ on the real line.

    Raises:
        QuadratureError: when the frequency integral does not converge or leaves an imaginary residual above
            1e-6·(1 + |Af(x)|)
    """
    real, imag = _fourier_apply(sym, f, x)
    if abs(imag) > 1e-6 * (1 + abs(real)):
        raise QuadratureError(f"Fourier form of A{f.name} at x={x} has imaginary residual {imag:.3g}",
                              {"real": real, "imag": imag})
    return real


@lru_cache(maxsize=8)
def _taylor_rule(panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Panels on (δ, 1]: dyadic below 1/16, uniform of width 1/64 above."""
    dyadic = 2.0 ** -np.arange(panels, 3, -1, dtype=float)
    uniform = np.linspace(1.0 / 16, 1.0, 61)
    y, w = quadrature.panel_rule(np.concatenate([dyadic, uniform]), nodes)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w, 2.0 ** -panels


def _taylor_cutoff(f: TestFunction) -> float:
    """Below this |y| the remainder is integrated in θ; above it f(x+y) - f(x) - f'(x)y is taken directly."""
    return 2.0 ** -6 * min(1.0, f.support_radius / 8)


def _taylor_remainder(f: TestFunction, x: float, ys: np.ndarray, fx: float, f1x: float) -> np.ndarray:
    """f(x+y) - f(x) - f'(x)y at each y."""
    out = f.value_fn((x + ys).reshape(-1, 1)) - fx - f1x * ys
    near = np.abs(ys) < _taylor_cutoff(f)
    if np.any(near):
        # y² ∫_0^1 (1-θ) f''(x+θy) dθ, which keeps its digits where the difference above cancels
        theta, wt = quadrature.gauss_legendre(16)
        theta = 0.5 * (theta + 1.0)
        wt = 0.5 * wt * (1.0 - theta)
        yn = ys[near]
        pts = (x + np.outer(yn, theta)).reshape(-1, 1)
        second = f.hessian_fn(pts)[:, 0, 0].reshape(yn.shape[0], theta.shape[0]) @ wt
        out[near] = yn ** 2 * second
    return out


def _density_part(density: JumpDensity, f: TestFunction, x: float) -> float:
    fx = float(f.value_fn(np.array([[x]]))[0])
    f1x = float(f.gradient_fn(np.array([[x]]))[0, 0])
    f2x = float(f.hessian_fn(np.array([[x]]))[0, 0, 0])
    y, w, delta = _taylor_rule(config.inner_panels, config.gl_nodes)
    total = 0.0
    for side in (1.0, -1.0):
        ys = side * y
        total += float(np.sum(w * _taylor_remainder(f, x, ys, fx, f1x) * density(ys)))
        total += 0.5 * f2x * density.moment_below(delta, side)

    lo, hi = f.extent
    if np.isfinite(lo) and np.isfinite(hi):
        outer = 0.0
        for a, b in ((max(lo - x, 1.0), hi - x), (lo - x, min(hi - x, -1.0))):
            if b > a:
                u, wu = quadrature.uniform_rule(a, b, 1.0 / 64)
                outer += float(np.sum(wu * f.value_fn((x + u).reshape(-1, 1)) * density(u)))
        total += outer - fx * (tail_mass(density, 1.0) + tail_mass(density, -1.0))
    else:
        u, wu, _ = quadrature.dyadic_outer_rule(1.0)
        for side in (1.0, -1.0):
            shifted = f.value_fn((x + side * u).reshape(-1, 1)) - fx
            total += float(np.sum(wu * shifted * density(side * u)))
    return total


def apply_integro(sym: SymbolField, f: TestFunction, x: Any) -> float:
    """Af(x) = b·∇f + ½ tr(Q∇²f) + ∫ (f(x+y) - f(x) - ∇f(x)·y 1_{(0,1)}(|y|)) ν(x, dy).

    Raises:
        QuadratureError: when the jump integral is not finite
    """
    point = as_point(x, sym.dimension)
    if f.is_zero:
        return 0.0
    triplet = sym.triplet_at(point)
    pts = point[None, :]
    grad = f.gradient_fn(pts)[0]
    hess = f.hessian_fn(pts)[0]
    total = float(triplet.drift @ grad) + 0.5 * float(np.trace(triplet.diffusion @ hess))
    measure = triplet.jump_measure
    if isinstance(measure, JumpDensity):
        total += _density_part(measure, f, float(point[0]))
    elif isinstance(measure, AtomicJumps):
        small = np.linalg.norm(measure.locations, axis=1) < 1.0
        shifted = f.value_fn(point[None, :] + measure.locations) - f.value_fn(pts)[0]
        total += float(np.sum(measure.masses * (shifted - small * (measure.locations @ grad))))
    if not np.isfinite(total):
        raise QuadratureError(f"A{f.name} at x={point} is not finite", {"value": total})
    return total


def lattice_frame(xs: Sequence[Any], values: Sequence[float], form: str,
                  residuals: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """DataFrame with columns x, Af, form, residual."""
    residuals = [0.0] * len(values) if residuals is None else residuals
    records = [{"x": (float(np.asarray(x).ravel()[0]) if np.size(x) == 1 else np.asarray(x).tolist()),
                "Af": float(v), "form": form, "residual": float(r)}
               for x, v, r in zip(xs, values, residuals)]
    return records_frame(records, ["x", "Af", "form", "residual"])


def tabulate_operator(sym: SymbolField, f: TestFunction, xs: Sequence[Any], form: str = "integro",
                      max_workers: Optional[int] = None) -> pd.DataFrame:
    """Evaluate Af on a lattice.

    Args:
        sym: The symbol
        f: The test function
        xs: Lattice points
        form: "integro", "fourier", or "both" (integro values with |integro - fourier| as residual)
        max_workers: Threads, config.threads if None

    Returns:
        A DataFrame from lattice_frame, in lattice order.
    """
    if form not in ("integro", "fourier", "both"):
        raise ParameterError(f"Unknown operator form '{form}'")

    def one(x: Any) -> Tuple[float, float]:
        if form == "integro":
            return apply_integro(sym, f, x), 0.0
        if form == "fourier":
            return _fourier_apply(sym, f, x)
        direct = apply_integro(sym, f, x)
        return direct, abs(direct - apply_fourier(sym, f, x))

    xs = list(xs)
    with ThreadPoolExecutor(max_workers=max_workers or config.threads) as executor:
        results = list(executor.map(one, xs))
    return lattice_frame(xs, [r[0] for r in results], form, [r[1] for r in results])


def _table_grid(f: TestFunction, low: float, high: float, spacing: float) -> np.ndarray:
    """Dense lattice where f lives, geometrically spaced points out to the requested range."""
    lo, hi = f.extent
    if not (np.isfinite(lo) and np.isfinite(hi)):
        lo, hi = -f.support_radius, f.support_radius
    if not (np.isfinite(lo) and np.isfinite(hi)):
        lo, hi = low, high
    core_lo, core_hi = max(lo - 1.0, low), min(hi + 1.0, high)
    pieces = [np.array([low, high])]
    if core_hi > core_lo:
        count = min(int(np.ceil((core_hi - core_lo) / spacing)), 4000) + 1
        pieces.append(np.linspace(core_lo, core_hi, count))
    else:
        core_lo = core_hi = 0.5 * (low + high)
    steps = 2.0 ** (np.arange(1, 400) / 4.0) - 1.0
    pieces.append(core_hi + steps[core_hi + steps < high])
    pieces.append(core_lo - steps[core_lo - steps > low])
    return np.unique(np.concatenate(pieces))


def operator_interpolant(sym: SymbolField, f: TestFunction, points: Any, spacing: Optional[float] = None,
                         max_workers: Optional[int] = None) -> Callable[[np.ndarray], np.ndarray]:
    """A vectorized approximation of x ↦ Af(x) valid over the range of ``points``.

    On the line Af is tabulated in integro form (spacing config.operator_table_spacing near f, geometric outside)
    and linearly interpolated.  In higher dimensions the returned callable evaluates Af point by point.

    Args:
        sym: The symbol
        f: The test function
        points: Sample of the points where Af will be needed, shape (n,) or (n, d)
        spacing: Lattice spacing near f
        max_workers: Threads used for tabulation, config.threads if None
    """
    if f.is_zero:
        return lambda x: np.zeros(np.asarray(x).shape[0])
    pts, _ = as_points(points, sym.dimension)
    if sym.dimension != 1:
        return lambda x: np.array([apply_integro(sym, f, p) for p in as_points(x, sym.dimension)[0]])
    low, high = float(np.min(pts)), float(np.max(pts))
    grid = _table_grid(f, low, high, spacing or config.operator_table_spacing)
    table = tabulate_operator(sym, f, grid, "integro", max_workers)["Af"].to_numpy()
    logger.debug("tabulated A%s on %d points over [%g, %g]", f.name, grid.size, low, high)
    return lambda x: np.interp(np.asarray(x, dtype=float).ravel(), grid, table)
