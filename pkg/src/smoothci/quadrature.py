"""Composite Gauss-Legendre rules on panel layouts."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def uniform_edges(lo: float, hi: float, max_width: float) -> np.ndarray:
    count = max(1, int(np.ceil((hi - lo) / max_width - 1e-12)))
    return np.linspace(lo, hi, count + 1)


def graded_edges(lo: float, hi: float, max_width: float, rel: float, min_width: float) -> np.ndarray:
    """Panel edges whose width grows like rel * x away from the origin.

    Width at left edge x is min(max_width, max(rel * x, min_width)); used where
    the integrand varies on a scale proportional to the distance from 0.
    """
    edges = [lo]
    x = lo
    while x < hi:
        width = min(max_width, max(rel * x, min_width))
        x = x + width
        if x > hi - 0.25 * width:
            x = hi
        edges.append(x)
    return np.asarray(edges)


def panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule with `order` points per panel."""
    gx, gw = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * gx).ravel(), (half * gw).ravel()
