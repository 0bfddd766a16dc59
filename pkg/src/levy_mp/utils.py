"""Utility functions shared by the levy_mp modules."""
import dataclasses
import enum
import hashlib
import json
from typing import Any, Dict, Sequence, Tuple

import numpy as np
import pandas as pd


def json_normalize(obj: Any) -> Any:
    """Prepare data for use by json.dump.

    Pandas and numpy won't json encode nicely, and report objects are dataclasses.  Complex numbers are split into
    ``{"re": ..., "im": ...}`` pairs.

    Args:
        obj: Object to be converted.

    Returns:
        Converted object, ready for JSON serialization with json.JSONEncoder.
    """
    if hasattr(obj, "to_dict") and not isinstance(obj, (pd.Series, pd.DataFrame)):
        obj = json_normalize(obj.to_dict())
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = json_normalize(dataclasses.asdict(obj))
    elif isinstance(obj, pd.Series):
        obj = {"__type__": "series", **json_normalize(obj.to_dict())}
    elif isinstance(obj, pd.DataFrame):
        # split => {"index": [], "columns": [], "data": []}
        obj = {"__type__": "dataframe", **json_normalize(obj.to_dict(orient="split"))}
    elif isinstance(obj, enum.Enum):
        obj = obj.value
    elif isinstance(obj, np.ndarray):
        obj = json_normalize(obj.tolist())
    elif isinstance(obj, (complex, np.complexfloating)):
        obj = {"re": float(obj.real), "im": float(obj.imag)}
    elif isinstance(obj, (np.integer, np.floating, np.bool_)):
        obj = obj.item()
    elif isinstance(obj, dict):
        # ensure JSON-safe keys and normalized values
        obj = {str(k): json_normalize(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        obj = [json_normalize(v) for v in obj]

    return obj


def dumps(obj: Any) -> str:
    """Serialize to deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(json_normalize(obj), indent=2, sort_keys=True, default=str)


def inputs_hash(**parts: Any) -> str:
    """Hash the named inputs of a check so that reports can be matched to the data they came from.

    Callables are represented by their name (or qualified name), containers are walked, everything else goes
    through json_normalize.
    """
    def _key(v: Any) -> Any:
        if isinstance(v, dict):
            return {k: _key(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [_key(x) for x in v]
        if callable(v) and not hasattr(v, "to_dict"):
            return getattr(v, "name", None) or getattr(v, "__qualname__", None) or type(v).__name__
        return v

    text = json.dumps(json_normalize(_key(parts)), sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def as_point(x: Any, dimension: int) -> np.ndarray:
    """Coerce a scalar or vector into a float vector of the given dimension."""
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (dimension,):
        raise ValueError(f"Expected a point of dimension {dimension}, got shape {point.shape}")
    return point


def as_points(x: Any, dimension: int) -> Tuple[np.ndarray, bool]:
    """Coerce input into an (n, d) array of points.

    Returns:
        The points and a flag telling whether the input was a single point (so results should be unwrapped).
    """
    arr = np.asarray(x, dtype=float)
    if dimension == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1), True
        if arr.ndim == 2 and arr.shape[1] != 1:
            raise ValueError(f"Expected points of shape (n, 1), got shape {arr.shape}")
        return arr.reshape(-1, 1), False
    if arr.ndim == 1:
        if arr.shape[0] != dimension:
            raise ValueError(f"Expected a point of dimension {dimension}, got shape {arr.shape}")
        return arr.reshape(1, dimension), True
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise ValueError(f"Expected points of shape (n, {dimension}), got shape {arr.shape}")
    return arr, False


def odd_linspace(low: float, high: float, count: int) -> np.ndarray:
    """A linspace with an odd number of points so symmetric intervals always contain their midpoint."""
    count = max(int(count), 1)
    if count % 2 == 0:
        count += 1
    return np.linspace(low, high, count)


def ball_lattice(radius: float, density: int, dimension: int) -> np.ndarray:
    """Sample the closed ball of the given radius on a product lattice with ``density`` points per axis.

    The lattice always contains the origin and, along each axis, the points at distance ``radius``.
    """
    axis = odd_linspace(-radius, radius, density)
    if dimension == 1:
        return axis.reshape(-1, 1)
    grids = np.meshgrid(*([axis] * dimension), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    return points[np.linalg.norm(points, axis=1) <= radius * (1 + 1e-12)]


def sphere_lattice(radius: float, density: int, dimension: int) -> np.ndarray:
    """Sample the sphere of the given radius.

    In one dimension this is the pair {-R, R}; in two dimensions ``density`` equally spaced angles; otherwise the
    normalized nonzero points of a product lattice.
    """
    if dimension == 1:
        return np.array([[-radius], [radius]])
    if dimension == 2:
        angles = np.linspace(0.0, 2 * np.pi, max(int(density), 4), endpoint=False)
        return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    points = ball_lattice(1.0, density, dimension)
    norms = np.linalg.norm(points, axis=1)
    points = points[norms > 0]
    return radius * points / np.linalg.norm(points, axis=1)[:, None]


def mean_and_error(samples: np.ndarray) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of a one dimensional sample (standard error 0 for a single sample)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n == 0:
        return float("nan"), float("nan")
    mean = float(np.sum(samples) / n)
    if n == 1:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / np.sqrt(n))


def records_frame(records: Sequence[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    """Build a DataFrame with a fixed column order, even when there are no records."""
    return pd.DataFrame(list(records), columns=list(columns))


def evaluate_on_points(fn: Any, points: np.ndarray) -> np.ndarray:
    """Evaluate a vectorized function at (n, d) points.

    Objects with a ``value_fn`` (test functions) receive the (n, d) array; on the line plain callables receive the
    flat (n,) array, in higher dimensions the (n, d) array.  Constants are broadcast.
    """
    points = np.asarray(points, dtype=float)
    if hasattr(fn, "value_fn"):
        values = fn.value_fn(points)
    elif not callable(fn):
        values = np.full(points.shape[0], float(fn))
    elif points.shape[1] == 1:
        values = fn(points[:, 0])
    else:
        values = fn(points)
    return np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],)).copy()
