"""Fixed-rule quadratures shared by the elliptic and wave-trace code."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def _legendre_rule(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(f, lo, hi, n=64, panels=1):
    """Integrate a vectorized ``f`` over [lo, hi] with ``panels`` n-point Gauss rules."""
    nodes, weights = _legendre_rule(n)
    edges = np.linspace(lo, hi, panels + 1)
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        total += half * float(np.dot(weights, f(mid + half * nodes)))
    return total


def periodic_grid(n):
    return 2.0 * np.pi * np.arange(n) / n


def periodic_trapezoid(f, n=2048):
    """Trapezoid rule for a smooth 2π-periodic vectorized ``f`` over one period."""
    return 2.0 * np.pi * float(np.mean(f(periodic_grid(n))))
