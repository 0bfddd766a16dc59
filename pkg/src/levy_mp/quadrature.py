"""Fixed-panel Gauss-Legendre rules shared by the symbol, generator and mollifier code.

Adaptive routines from scipy.integrate are used where a single integral is needed
(tails, Fourier-weighted tails, measure norms).  Everything evaluated many times
over arrays (jump integrals near the singularity, convolutions, frequency
integrals) goes through the vectorized panel rules here instead.

Functions:
    gauss_legendre: Cached nodes and weights on [-1, 1].
    panel_rule: Composite rule over arbitrary panel edges.
    uniform_rule: Composite rule on [a, b] with a maximal panel width.
    dyadic_inner_rule: Panels [s 2^-k-1, s 2^-k] accumulating at 0.
    dyadic_outer_rule: Panels [s 2^k, s 2^k+1] reaching toward infinity.
"""
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from levy_mp.config import config

__all__ = ["gauss_legendre", "panel_rule", "uniform_rule", "dyadic_inner_rule", "dyadic_outer_rule",
           "refine_for_frequency", "oscillatory_inner_rule"]


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(edges: Sequence[float], nodes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive panels.

    Args:
        edges: Increasing panel edges (at least two).
        nodes: Nodes per panel, config.gl_nodes if None.

    Returns:
        Flattened nodes and weights, ordered panel by panel.
    """
    edges = np.asarray(edges, dtype=float)
    t, wt = gauss_legendre(nodes or config.gl_nodes)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    w = (half[:, None] * wt[None, :]).ravel()
    return x, w


def uniform_rule(a: float, b: float, max_width: float, nodes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Composite rule on [a, b] using equal panels no wider than max_width."""
    if b <= a:
        return np.empty(0), np.empty(0)
    count = max(int(np.ceil((b - a) / max_width)), 1)
    return panel_rule(np.linspace(a, b, count + 1), nodes)


@lru_cache(maxsize=64)
def _dyadic_inner(scale: float, panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = scale * 2.0 ** -np.arange(panels, -1, -1, dtype=float)
    x, w = panel_rule(edges, nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def dyadic_inner_rule(scale: float = 1.0, panels: Optional[int] = None,
                      nodes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, float]:
    """Rule on (delta, scale] with dyadic panels toward 0.

    Returns:
        Nodes, weights and the uncovered lower edge delta = scale * 2^-panels.
    """
    panels = panels or config.inner_panels
    x, w = _dyadic_inner(float(scale), int(panels), int(nodes or config.gl_nodes))
    return x, w, float(scale) * 2.0 ** -panels


@lru_cache(maxsize=64)
def _dyadic_outer(start: float, panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = start * 2.0 ** np.arange(0, panels + 1, dtype=float)
    x, w = panel_rule(edges, nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def dyadic_outer_rule(start: float = 1.0, panels: Optional[int] = None,
                      nodes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, float]:
    """Rule on [start, Y) with dyadic panels toward infinity.

    Returns:
        Nodes, weights and the uncovered upper edge Y = start * 2^panels.
    """
    panels = panels or config.outer_panels
    x, w = _dyadic_outer(float(start), int(panels), int(nodes or config.gl_nodes))
    return x, w, float(start) * 2.0 ** panels


def refine_for_frequency(edges: Sequence[float], frequency: float, max_phase: float = 4.0) -> np.ndarray:
    """Split panels so that exp(i frequency y) turns by at most max_phase radians across each piece."""
    edges = np.asarray(edges, dtype=float)
    if frequency == 0:
        return edges
    widths = edges[1:] - edges[:-1]
    pieces = np.maximum(np.ceil(abs(frequency) * widths / max_phase).astype(int), 1)
    if np.all(pieces == 1):
        return edges
    refined = [np.linspace(a, b, m + 1)[:-1] for a, b, m in zip(edges[:-1], edges[1:], pieces)]
    return np.concatenate(refined + [edges[-1:]])


def oscillatory_inner_rule(frequency: float, scale: float = 1.0,
                           panels: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, float]:
    """Dyadic inner rule on (delta, scale] refined for an oscillating factor exp(i frequency y)."""
    panels = panels or config.inner_panels
    if abs(frequency) * scale <= 4.0:
        return dyadic_inner_rule(scale, panels)
    edges = scale * 2.0 ** -np.arange(panels, -1, -1, dtype=float)
    x, w = panel_rule(refine_for_frequency(edges, frequency))
    return x, w, float(scale) * 2.0 ** -panels
