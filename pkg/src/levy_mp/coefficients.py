"""Declarative one-dimensional coefficient functions.

Experiment files describe state-dependent coefficients (stability index alpha(x),
drift b(x), dispersion sigma(x), weights phi(x)) by a kind and a few numbers.
This module turns those declarations into vectorized callables that also carry
the metadata the rest of the toolkit relies on: a sup bound (needed for
mollification), the breakpoints of piecewise definitions (needed for exact
convolution quadrature) and a continuity flag (recorded on symbols).

Key Features:
    * Kinds: constant, step, sign, piecewise_constant, tanh, sine, signed_sqrt, indicator
    * Every coefficient is a plain callable on numpy arrays
    * Bounds and breakpoints travel with the function

Example::

    >>> from levy_mp.coefficients import make_coefficient
    >>> sigma = make_coefficient({"kind": "step", "at": 0.0, "left": 1.0, "right": 1.5})
    >>> sigma([-1.0, 1.0])
    array([1. , 1.5])
    >>> sigma.bound, sigma.breakpoints
    (1.5, (0.0,))

See Also:
    levy_mp.mollify: Smooth approximation of these coefficients
    levy_mp.catalog: Symbols built from these coefficients
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Sequence, Tuple, Union

import numpy as np

from levy_mp.exceptions import ParameterError

__all__ = ["Coefficient", "make_coefficient", "COEFFICIENT_KINDS"]


@dataclass(frozen=True)
class Coefficient:
    """A vectorized real function of one variable with its bound and breakpoints."""
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    bound: float
    lower: float
    breakpoints: Tuple[float, ...] = ()
    continuous: bool = True
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.fn(x), dtype=float) * np.ones_like(x)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.name, **self.params}


def _constant(value: float) -> Coefficient:
    return Coefficient("constant", lambda x: np.full_like(x, value), abs(value), value,
                       params={"value": value})


def _step(at: float = 0.0, left: float = 0.0, right: float = 1.0) -> Coefficient:
    return Coefficient("step", lambda x: np.where(x >= at, right, left), max(abs(left), abs(right)),
                       min(left, right), (at,), left == right, {"at": at, "left": left, "right": right})


def _sign(scale: float = 1.0) -> Coefficient:
    # sgn(0) = 0, as numpy defines it
    return Coefficient("sign", lambda x: scale * np.sign(x), abs(scale), -abs(scale), (0.0,), False,
                       {"scale": scale})


def _indicator(low: float = -1.0, high: float = 1.0, value: float = 1.0) -> Coefficient:
    if high <= low:
        raise ParameterError(f"indicator needs low < high, got [{low}, {high}]")
    return Coefficient("indicator", lambda x: np.where((x >= low) & (x <= high), value, 0.0), abs(value),
                       min(value, 0.0), (low, high), False, {"low": low, "high": high, "value": value})


def _piecewise_constant(breakpoints: Sequence[float], values: Sequence[float]) -> Coefficient:
    breakpoints = tuple(float(b) for b in breakpoints)
    values = np.asarray(values, dtype=float)
    if len(values) != len(breakpoints) + 1:
        raise ParameterError("piecewise_constant needs one more value than breakpoints")
    if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
        raise ParameterError("piecewise_constant breakpoints must be strictly increasing")
    edges = np.asarray(breakpoints)

    def fn(x: np.ndarray) -> np.ndarray:
        return values[np.searchsorted(edges, x, side="right")]

    return Coefficient("piecewise_constant", fn, float(np.max(np.abs(values))), float(np.min(values)),
                       breakpoints, len(breakpoints) == 0,
                       {"breakpoints": list(breakpoints), "values": values.tolist()})


def _tanh(base: float = 0.0, amplitude: float = 1.0, rate: float = 1.0) -> Coefficient:
    return Coefficient("tanh", lambda x: base + amplitude * np.tanh(rate * x), abs(base) + abs(amplitude),
                       base - abs(amplitude), params={"base": base, "amplitude": amplitude, "rate": rate})


def _sine(base: float = 0.0, amplitude: float = 1.0, frequency: float = 1.0) -> Coefficient:
    return Coefficient("sine", lambda x: base + amplitude * np.sin(frequency * x), abs(base) + abs(amplitude),
                       base - abs(amplitude), params={"base": base, "amplitude": amplitude, "frequency": frequency})


def _signed_sqrt(scale: float = 1.0) -> Coefficient:
    return Coefficient("signed_sqrt", lambda x: scale * np.sign(x) * np.sqrt(np.abs(x)), np.inf, -np.inf,
                       params={"scale": scale})


COEFFICIENT_KINDS: Dict[str, Callable[..., Coefficient]] = {
    "constant": _constant,
    "step": _step,
    "sign": _sign,
    "indicator": _indicator,
    "piecewise_constant": _piecewise_constant,
    "tanh": _tanh,
    "sine": _sine,
    "signed_sqrt": _signed_sqrt,
}


def make_coefficient(spec: Union[float, int, Mapping[str, Any], Coefficient]) -> Coefficient:
    """Build a coefficient from a number (a constant) or a mapping with a ``kind`` key.

    Raises:
        ParameterError: when the kind is unknown or its parameters are invalid
    """
    if isinstance(spec, Coefficient):
        return spec
    if isinstance(spec, (int, float)):
        return _constant(float(spec))
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in COEFFICIENT_KINDS:
        raise ParameterError(f"Unknown coefficient kind '{kind}'. Known kinds: {sorted(COEFFICIENT_KINDS)}")
    try:
        return COEFFICIENT_KINDS[kind](**spec)
    except TypeError as e:
        raise ParameterError(f"Invalid parameters for coefficient '{kind}': {e}") from e
