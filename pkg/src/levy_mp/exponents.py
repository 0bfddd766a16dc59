"""Lévy exponents ψ(ξ) of driving processes.

A Lévy process L is described by its characteristic exponent, E e^{iξ·L_t} = e^{-tψ(ξ)}.
Exponents are used in two places: as the ψ in SDE symbols q(x, ξ) = -ib(x)ξ + ψ(σ(x)ξ)
and mixed symbols, and as driver laws for path simulation.  Each exponent knows its
own Lévy triplet so that closed forms can be checked against quadrature.

Classes:
    LevyExponent: Abstract base.
    StableExponent: |ξ|^α, α in (0, 2]; α = 2 is the Gaussian with Q = 2I.
    GaussianExponent: ½ ξ·Qξ.
    RelativisticStableExponent: (|ξ|² + m²)^{ϱ/2} - m^ϱ.
    CompositeExponent: Sum of independent exponents.
    ZeroExponent: ψ ≡ 0.

Example::

    >>> from levy_mp.exponents import make_exponent
    >>> psi = make_exponent({"kind": "stable", "alpha": 1.5})
    >>> psi(2.0)
    array([2.82842712+0.j])
"""
from typing import Any, Dict, Mapping, Sequence, Union

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import kv

from levy_mp.exceptions import ParameterError
from levy_mp.levy_core import JumpDensity, LevyTriplet, stable_constant

__all__ = ["LevyExponent", "StableExponent", "GaussianExponent", "RelativisticStableExponent",
           "CompositeExponent", "ZeroExponent", "make_exponent", "EXPONENT_KINDS"]


class LevyExponent:
    """Base class for characteristic exponents.  Subclasses implement ``_eval`` on (n, d) frequencies."""
    kind = "abstract"
    symmetric = True

    def __init__(self, dimension: int = 1):
        if int(dimension) < 1:
            raise ParameterError(f"dimension must be positive, got {dimension}")
        self.dimension = int(dimension)

    def __call__(self, xi: Any) -> np.ndarray:
        """ψ at one or more frequencies; scalars and 1-d arrays are read as points on the line when d = 1."""
        arr = np.asarray(xi, dtype=float)
        arr = arr.reshape(-1, 1) if self.dimension == 1 else arr.reshape(-1, self.dimension)
        return np.asarray(self._eval(arr), dtype=complex)

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Must be implemented by a subclass")

    def triplet(self) -> LevyTriplet:
        raise NotImplementedError("Must be implemented by a subclass")

    def params(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "dimension": self.dimension, **self.params()}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class StableExponent(LevyExponent):
    """ψ(ξ) = |ξ|^α, the isotropic α-stable process (α = 2 gives Brownian motion with variance 2t)."""
    kind = "stable"

    def __init__(self, alpha: float, dimension: int = 1):
        super().__init__(dimension)
        if not 0 < alpha <= 2:
            raise ParameterError(f"stable index must lie in (0, 2], got {alpha}")
        self.alpha = float(alpha)

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        return np.linalg.norm(xi, axis=1) ** self.alpha + 0j

    def triplet(self) -> LevyTriplet:
        d = self.dimension
        if self.alpha == 2:
            return LevyTriplet(np.zeros(d), 2.0 * np.eye(d))
        if d != 1:
            raise ParameterError("stable jump densities are supported on the real line only")
        c = stable_constant(self.alpha, 1)
        a = self.alpha
        return LevyTriplet(np.zeros(1), np.zeros((1, 1)),
                           JumpDensity(lambda y: c * np.abs(y) ** (-1.0 - a), a, a, symmetric=True))

    def params(self) -> Dict[str, Any]:
        return {"alpha": self.alpha}


class GaussianExponent(LevyExponent):
    """ψ(ξ) = ½ ξ·Qξ for a symmetric positive semidefinite Q (a scalar means Q = q I)."""
    kind = "gaussian"

    def __init__(self, covariance: Union[float, Sequence[Sequence[float]]] = 2.0, dimension: int = 1):
        cov = np.asarray(covariance, dtype=float)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(dimension)
        super().__init__(cov.shape[0])
        self.covariance = cov
        # validates symmetry and semidefiniteness
        self._triplet = LevyTriplet(np.zeros(self.dimension), cov)

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        return 0.5 * np.einsum("ni,ij,nj->n", xi, self.covariance, xi) + 0j

    def triplet(self) -> LevyTriplet:
        return self._triplet

    def params(self) -> Dict[str, Any]:
        return {"covariance": self.covariance.tolist()}


class RelativisticStableExponent(LevyExponent):
    """ψ(ξ) = (|ξ|² + m²)^{ϱ/2} - m^ϱ, a tempered stable exponent with exponentially light jumps.

    The Lévy density is ϱ 2^{(ϱ-d)/2} m^{(d+ϱ)/2} / (π^{d/2} Γ(1-ϱ/2)) K_{(d+ϱ)/2}(m|y|) |y|^{-(d+ϱ)/2},
    which reduces to the stable density as m → 0.
    """
    kind = "relativistic"

    def __init__(self, rho: float, mass: float = 1.0, dimension: int = 1):
        super().__init__(dimension)
        if not 0 < rho < 2:
            raise ParameterError(f"relativistic index must lie in (0, 2), got {rho}")
        if mass <= 0:
            raise ParameterError(f"mass must be positive, got {mass}")
        self.rho = float(rho)
        self.mass = float(mass)

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        r2 = np.sum(xi ** 2, axis=1)
        return (r2 + self.mass ** 2) ** (self.rho / 2) - self.mass ** self.rho + 0j

    def triplet(self) -> LevyTriplet:
        if self.dimension != 1:
            raise ParameterError("relativistic jump densities are supported on the real line only")
        d, rho, m = 1, self.rho, self.mass
        order = (d + rho) / 2
        const = rho * 2.0 ** ((rho - d) / 2) * m ** order / (np.pi ** (d / 2) * gamma_fn(1 - rho / 2))

        def kernel(y: np.ndarray) -> np.ndarray:
            r = np.abs(y)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                out = const * kv(order, m * r) * r ** (-order)
            return np.where(np.isfinite(out), out, 0.0)

        # exponential tails; any positive decay exponent is a valid upper bound
        return LevyTriplet(np.zeros(1), np.zeros((1, 1)), JumpDensity(kernel, rho, 2.0, symmetric=True))

    def params(self) -> Dict[str, Any]:
        return {"rho": self.rho, "mass": self.mass}


class CompositeExponent(LevyExponent):
    """Sum of exponents of independent processes on the same space."""
    kind = "composite"

    def __init__(self, parts: Sequence[LevyExponent]):
        parts = list(parts)
        if not parts:
            raise ParameterError("a composite exponent needs at least one part")
        dims = {p.dimension for p in parts}
        if len(dims) != 1:
            raise ParameterError("composite parts must share a dimension")
        super().__init__(dims.pop())
        self.parts = parts
        self.symmetric = all(p.symmetric for p in parts)

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        return sum(p._eval(xi) for p in self.parts)

    def triplet(self) -> LevyTriplet:
        triplets = [p.triplet() for p in self.parts]
        densities = [t.jump_measure for t in triplets if t.jump_measure is not None]
        if any(not isinstance(m, JumpDensity) for m in densities):
            raise ParameterError("composite triplets support density jump measures only")
        measure = None
        if densities:
            measure = JumpDensity(lambda y: sum(m(y) for m in densities),
                                  max(m.singularity_exponent for m in densities),
                                  min(m.decay_exponent for m in densities),
                                  symmetric=all(m.symmetric for m in densities))
        return LevyTriplet(sum(t.drift for t in triplets), sum(t.diffusion for t in triplets), measure)

    def params(self) -> Dict[str, Any]:
        return {"parts": [p.to_dict() for p in self.parts]}


class ZeroExponent(LevyExponent):
    """ψ ≡ 0, the process that never moves."""
    kind = "zero"

    def _eval(self, xi: np.ndarray) -> np.ndarray:
        return np.zeros(xi.shape[0], dtype=complex)

    def triplet(self) -> LevyTriplet:
        return LevyTriplet(np.zeros(self.dimension), np.zeros((self.dimension, self.dimension)))


EXPONENT_KINDS = {
    "stable": StableExponent,
    "gaussian": GaussianExponent,
    "relativistic": RelativisticStableExponent,
    "zero": ZeroExponent,
}


def make_exponent(spec: Union[LevyExponent, Mapping[str, Any]]) -> LevyExponent:
    """Build an exponent from a mapping with a ``kind`` key (or pass an exponent through).

    A ``parts`` list builds a CompositeExponent.

    Raises:
        ParameterError: for unknown kinds or invalid parameters
    """
    if isinstance(spec, LevyExponent):
        return spec
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "composite":
        return CompositeExponent([make_exponent(p) for p in spec.get("parts", [])])
    if kind not in EXPONENT_KINDS:
        raise ParameterError(f"Unknown exponent kind '{kind}'. Known kinds: {sorted(EXPONENT_KINDS)}")
    try:
        return EXPONENT_KINDS[kind](**spec)
    except TypeError as e:
        raise ParameterError(f"Invalid parameters for exponent '{kind}': {e}") from e
