"""Ready-made state-dependent symbols.

Each catalog kind builds a SymbolField whose closed form (when there is one) and
Lévy triplet map describe the same operator.  Parameters are validated on a
probe lattice of [-probe_radius, probe_radius] plus the breakpoints of any
piecewise coefficient, and rejections name the offending point.

Key Features:
    * isotropic_stable_like: q(x, ξ) = |ξ|^{α(x)}
    * sde_symbol: q(x, ξ) = -i b(x) ξ + ψ(σ(x) ξ) for a symmetric Lévy exponent ψ
    * mixed: q(x, ξ) = φ₁(x) ψ₁(ξ) + φ₂(x) ψ₂(ξ)
    * integrated_stable: q(x, ξ) = ∫_I |ξ|^α f(α, φ(x)) dα
    * stable_dominated: jump kernel κ(x, y) without a closed form
    * drift_ode: q(x, ξ) = -2iξ sgn(x) √|x|, the drift with two Markovian selections
    * levy: a constant-coefficient symbol q(x, ξ) = ψ(ξ)

Example::

    >>> from levy_mp.catalog import make_catalog_symbol
    >>> sym = make_catalog_symbol("sde_symbol", drift=0.0, sigma=2.0, psi={"kind": "gaussian", "covariance": 2.0})
    >>> sym(0.0, 1.0)
    (4+0j)

See Also:
    levy_mp.coefficients: Declarative coefficients used as parameters
    levy_mp.exponents: Lévy exponents used as ψ
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from levy_mp import quadrature
from levy_mp.coefficients import Coefficient, make_coefficient
from levy_mp.config import config
from levy_mp.exceptions import ParameterError
from levy_mp.exponents import make_exponent
from levy_mp.levy_core import (CoefficientFlags, JumpDensity, LevyTriplet, SymbolField, constant_symbol,
                               stable_constant)

__all__ = ["CatalogEntry", "CATALOG", "make_catalog_symbol", "make_symbol", "list_catalog",
           "variable_order_kernel"]

KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _probe_points(*coefficients: Coefficient) -> np.ndarray:
    grid = np.linspace(-config.probe_radius, config.probe_radius, config.probe_points)
    extra = [b + e for c in coefficients for b in c.breakpoints for e in (-1e-9, 0.0, 1e-9)]
    return np.unique(np.concatenate([grid, np.asarray(extra, dtype=float)]))


def _require(values: np.ndarray, points: np.ndarray, ok: np.ndarray, message: str) -> None:
    if not np.all(ok):
        i = int(np.argmin(ok))
        raise ParameterError(f"{message}: value {values[i]:.6g} at x={points[i]:.6g}", point=float(points[i]))


def _isotropic_stable_like(alpha: Any, dimension: int = 1) -> SymbolField:
    alpha = make_coefficient(alpha)
    points = _probe_points(alpha)
    values = alpha(points)
    _require(values, points, (values > 0) & (values < 2), "alpha(x) must lie in (0, 2)")
    d = int(dimension)

    def index(x: np.ndarray) -> float:
        return float(alpha(x[0] if d == 1 else np.linalg.norm(x)))

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.linalg.norm(xi, axis=1) ** index(x) + 0j

    def triplet(x: np.ndarray) -> LevyTriplet:
        a = index(x)
        if d != 1:
            raise ParameterError("stable-like jump densities are supported on the real line only")
        c = stable_constant(a)
        return LevyTriplet(np.zeros(1), np.zeros((1, 1)),
                           JumpDensity(lambda y: c * np.abs(y) ** (-1.0 - a), a, a, symmetric=True))

    return SymbolField("isotropic_stable_like", d, triplet, direct, CoefficientFlags(alpha.continuous, True),
                       {"kind": "isotropic_stable_like", "alpha": alpha.to_dict(), "dimension": d})


def _scaled_measure(measure: Optional[JumpDensity], scale: float) -> Optional[JumpDensity]:
    """Image of a symmetric density under y ↦ scale·y."""
    if measure is None or scale == 0:
        return None
    s = abs(scale)

    def inner(delta: float, side: float) -> float:
        return s ** 2 * measure.moment_below(delta / s, side)

    return JumpDensity(lambda y: measure(y / s) / s, measure.singularity_exponent, measure.decay_exponent,
                       symmetric=True, inner_moment=inner)


def _sde_symbol(drift: Any = 0.0, sigma: Any = 1.0, psi: Any = None) -> SymbolField:
    b = make_coefficient(drift)
    s = make_coefficient(sigma)
    psi = make_exponent(psi if psi is not None else {"kind": "stable", "alpha": 2.0})
    if psi.dimension != 1:
        raise ParameterError("sde symbols are one-dimensional")
    if not psi.symmetric:
        raise ParameterError("sde symbols need a symmetric Lévy exponent")
    base = psi.triplet()
    if base.jump_measure is not None and not isinstance(base.jump_measure, JumpDensity):
        raise ParameterError("sde symbols need a driver with a jump density")

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        v = xi[:, 0]
        return -1j * float(b(x[0])) * v + psi(float(s(x[0])) * v)

    def triplet(x: np.ndarray) -> LevyTriplet:
        sv = float(s(x[0]))
        return LevyTriplet(np.array([float(b(x[0]))]), sv ** 2 * base.diffusion,
                           _scaled_measure(base.jump_measure, sv))

    flags = CoefficientFlags(b.continuous and s.continuous, bool(np.isfinite(b.bound) and np.isfinite(s.bound)))
    return SymbolField("sde_symbol", 1, triplet, direct, flags,
                       {"kind": "sde_symbol", "drift": b.to_dict(), "sigma": s.to_dict(), "psi": psi.to_dict()})


def _mixed(phi1: Any, phi2: Any, psi1: Any, psi2: Any) -> SymbolField:
    # φ₁ is read as a function of x, like φ₂
    phi1, phi2 = make_coefficient(phi1), make_coefficient(phi2)
    psi1, psi2 = make_exponent(psi1), make_exponent(psi2)
    if psi1.dimension != 1 or psi2.dimension != 1:
        raise ParameterError("mixed symbols are one-dimensional")
    for name, phi in (("phi1", phi1), ("phi2", phi2)):
        if not np.isfinite(phi.bound):
            raise ParameterError(f"{name} must be bounded")
    points = _probe_points(phi1, phi2)
    for name, phi in (("phi1", phi1), ("phi2", phi2)):
        values = phi(points)
        _require(values, points, values >= 0, f"{name} must be nonnegative")
    total = phi1(points) + phi2(points)
    _require(total, points, total > 0, "phi1 + phi2 must be bounded away from 0")
    t1, t2 = psi1.triplet(), psi2.triplet()

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        v = xi[:, 0]
        return float(phi1(x[0])) * psi1(v) + float(phi2(x[0])) * psi2(v)

    def triplet(x: np.ndarray) -> LevyTriplet:
        w1, w2 = float(phi1(x[0])), float(phi2(x[0]))
        parts = [(w, t.jump_measure) for w, t in ((w1, t1), (w2, t2)) if w > 0 and t.jump_measure is not None]
        measure = None
        if parts:
            measure = JumpDensity(lambda y: sum(w * m(y) for w, m in parts),
                                  max(m.singularity_exponent for _, m in parts),
                                  min(m.decay_exponent for _, m in parts),
                                  symmetric=all(m.symmetric for _, m in parts),
                                  inner_moment=lambda delta, side: sum(w * m.moment_below(delta, side)
                                                                       for w, m in parts))
        return LevyTriplet(w1 * t1.drift + w2 * t2.drift, w1 * t1.diffusion + w2 * t2.diffusion, measure)

    return SymbolField("mixed", 1, triplet, direct, CoefficientFlags(phi1.continuous and phi2.continuous, True),
                       {"kind": "mixed", "phi1": phi1.to_dict(), "phi2": phi2.to_dict(),
                        "psi1": psi1.to_dict(), "psi2": psi2.to_dict()})


def _weight_function(f: Any) -> Tuple[Callable[[np.ndarray, float], np.ndarray], Any]:
    if callable(f):
        return f, getattr(f, "__qualname__", repr(f))
    if f == "phi":
        return (lambda a, v: np.full_like(a, v)), "phi"
    if isinstance(f, (int, float)):
        value = float(f)
        return (lambda a, v: np.full_like(a, value)), value
    raise ParameterError(f"integrated_stable weight must be a number, 'phi' or a callable, got {f!r}")


def _integrated_stable(f: Any = 1.0, phi: Any = 0.0, interval: Sequence[float] = (1.0, 2.0),
                       nodes: int = 64) -> SymbolField:
    low, high = (float(v) for v in interval)
    if not 0 < low < high <= 2:
        raise ParameterError(f"interval must satisfy 0 < a0 < a1 <= 2, got [{low}, {high}]")
    phi = make_coefficient(phi)
    weight, weight_desc = _weight_function(f)
    t, wt = quadrature.gauss_legendre(nodes)
    alphas = 0.5 * (high - low) * t + 0.5 * (high + low)
    w_alpha = 0.5 * (high - low) * wt
    consts = np.array([stable_constant(a) for a in alphas])
    points = _probe_points(phi)
    for p in points:
        wv = np.asarray(weight(alphas, float(phi(p))), dtype=float)
        if np.any(wv < 0) or not np.all(np.isfinite(wv)):
            raise ParameterError(f"f(alpha, phi(x)) must be finite and nonnegative at x={p:.6g}", point=float(p))

    def coefficients(x: np.ndarray) -> np.ndarray:
        return w_alpha * np.asarray(weight(alphas, float(phi(x[0]))), dtype=float)

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        r = np.abs(xi[:, 0])
        return (r[:, None] ** alphas[None, :]) @ coefficients(x) + 0j

    def triplet(x: np.ndarray) -> LevyTriplet:
        cw = coefficients(x) * consts

        def kernel(y: np.ndarray) -> np.ndarray:
            r = np.abs(y)
            return np.sum(cw * r[..., None] ** (-1.0 - alphas), axis=-1)

        def inner(delta: float, side: float) -> float:
            return float(np.sum(cw * delta ** (2.0 - alphas) / (2.0 - alphas)))

        return LevyTriplet(np.zeros(1), np.zeros((1, 1)),
                           JumpDensity(kernel, float(alphas.max()), float(alphas.min()), True, inner))

    return SymbolField("integrated_stable", 1, triplet, direct, CoefficientFlags(phi.continuous, True),
                       {"kind": "integrated_stable", "f": weight_desc, "phi": phi.to_dict(),
                        "interval": [low, high], "nodes": nodes})


def variable_order_kernel(alpha: Any, normalized: bool = False) -> KernelFn:
    """κ(x, y) = |y|^{-1-α(x)}, optionally times the stable constant of α(x) so that its symbol is |ξ|^{α(x)}."""
    alpha = make_coefficient(alpha)

    def kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        a = alpha(x)
        c = np.vectorize(stable_constant)(a) if normalized else 1.0
        return c * np.abs(y) ** (-1.0 - a)

    kernel.alpha = alpha
    return kernel


def _stable_dominated(kernel: Union[KernelFn, Mapping[str, Any]], singularity_exponent: Optional[float] = None,
                      decay_exponent: Optional[float] = None, symmetric: bool = True) -> SymbolField:
    desc: Any = getattr(kernel, "__qualname__", "kernel")
    if isinstance(kernel, Mapping):
        spec = dict(kernel)
        if spec.pop("kind", None) != "variable_order":
            raise ParameterError("stable_dominated kernels in configs must be of kind 'variable_order'")
        desc = {"kind": "variable_order", **spec, "alpha": make_coefficient(spec["alpha"]).to_dict()}
        kernel = variable_order_kernel(spec["alpha"], bool(spec.get("normalized", False)))
    alpha = getattr(kernel, "alpha", None)
    if alpha is not None:
        points = _probe_points(alpha)
        values = alpha(points)
        _require(values, points, (values > 0) & (values < 2), "alpha(x) must lie in (0, 2)")
        singularity_exponent = float(values.max()) if singularity_exponent is None else singularity_exponent
        decay_exponent = float(values.min()) if decay_exponent is None else decay_exponent
    if singularity_exponent is None or decay_exponent is None:
        raise ParameterError("stable_dominated needs declared singularity and decay exponents")

    def triplet(x: np.ndarray) -> LevyTriplet:
        x0 = float(x[0])
        if alpha is not None:
            a = float(alpha(x0))
            s_exp, d_exp = a, a
        else:
            s_exp, d_exp = singularity_exponent, decay_exponent
        return LevyTriplet(np.zeros(1), np.zeros((1, 1)),
                           JumpDensity(lambda y: kernel(np.full_like(y, x0), y), s_exp, d_exp, symmetric))

    return SymbolField("stable_dominated", 1, triplet, None, CoefficientFlags(True, True),
                       {"kind": "stable_dominated", "kernel": desc, "singularity_exponent": singularity_exponent,
                        "decay_exponent": decay_exponent, "symmetric": symmetric})


def _drift_ode(scale: float = 2.0) -> SymbolField:
    b = make_coefficient({"kind": "signed_sqrt", "scale": scale})

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return -1j * float(b(x[0])) * xi[:, 0]

    def triplet(x: np.ndarray) -> LevyTriplet:
        return LevyTriplet(np.array([float(b(x[0]))]), np.zeros((1, 1)))

    return SymbolField("drift_ode", 1, triplet, direct, CoefficientFlags(True, False),
                       {"kind": "drift_ode", "scale": scale})


def _levy(psi: Any) -> SymbolField:
    psi = make_exponent(psi)
    sym = constant_symbol(psi.triplet(), name="levy")

    def direct(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return psi(xi)

    return SymbolField("levy", psi.dimension, sym.triplet_at, direct, CoefficientFlags(True, True),
                       {"kind": "levy", "psi": psi.to_dict()})


@dataclass(frozen=True)
class CatalogEntry:
    """A catalog kind with its builder, parameter description and provenance."""
    kind: str
    builder: Callable[..., SymbolField]
    parameters: str
    provenance: str


CATALOG: Dict[str, CatalogEntry] = {e.kind: e for e in [
    CatalogEntry("isotropic_stable_like", _isotropic_stable_like, "alpha: coefficient with values in (0, 2)",
                 "isotropic stable-like process, q(x, ξ) = |ξ|^{α(x)}"),
    CatalogEntry("sde_symbol", _sde_symbol, "drift: coefficient, sigma: coefficient, psi: symmetric exponent",
                 "Lévy-driven SDE dX = b(X-)dt + σ(X-)dL, q(x, ξ) = -ib(x)ξ + ψ(σ(x)ξ)"),
    CatalogEntry("mixed", _mixed, "phi1, phi2: nonnegative bounded coefficients, psi1, psi2: exponents",
                 "mixed Lévy processes, q(x, ξ) = φ₁(x)ψ₁(ξ) + φ₂(x)ψ₂(ξ)"),
    CatalogEntry("integrated_stable", _integrated_stable,
                 "f: number, 'phi' or callable f(alpha, v) >= 0, phi: coefficient, interval: [a0, a1] in (0, 2]",
                 "stable-like process with integrated index, q(x, ξ) = ∫_I |ξ|^α f(α, φ(x)) dα"),
    CatalogEntry("stable_dominated", _stable_dominated,
                 "kernel: callable κ(x, y) or {kind = 'variable_order', alpha = ...}, exponents",
                 "jump kernel with stable-type bounds, no closed form (Harnack setting)"),
    CatalogEntry("drift_ode", _drift_ode, "scale: drift factor (default 2)",
                 "ODE dX = 2 sgn(X)√|X| dt without unique Markovian selection"),
    CatalogEntry("levy", _levy, "psi: exponent",
                 "Lévy process with constant coefficients, q(x, ξ) = ψ(ξ)"),
]}


def make_catalog_symbol(kind: str, **params) -> SymbolField:
    """Build a catalog symbol.

    Args:
        kind: A key of CATALOG
        **params: The kind's parameters, see list_catalog()

    Raises:
        ParameterError: when the kind is unknown or a parameter is out of range
    """
    if kind not in CATALOG:
        raise ParameterError(f"Unknown catalog kind '{kind}'. Known kinds: {sorted(CATALOG)}")
    try:
        return CATALOG[kind].builder(**params)
    except TypeError as e:
        raise ParameterError(f"Invalid parameters for '{kind}': {e}") from e


def make_symbol(spec: Union[SymbolField, Mapping[str, Any]]) -> SymbolField:
    """Build a symbol from a mapping with a ``kind`` key, as found in experiment files."""
    if isinstance(spec, SymbolField):
        return spec
    spec = dict(spec)
    return make_catalog_symbol(spec.pop("kind", None), **spec)


def list_catalog() -> str:
    """Text listing of the catalog kinds with their parameters and provenance."""
    lines = []
    for entry in CATALOG.values():
        lines.append(entry.kind)
        lines.append(f"    parameters: {entry.parameters}")
        lines.append(f"    provenance: {entry.provenance}")
    return "\n".join(lines)
