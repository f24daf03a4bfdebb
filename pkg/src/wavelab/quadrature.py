"""Adaptive Gauss-Legendre quadrature with interval bisection.

Integrands are called with a 1-d numpy array of nodes and must return an
array of the same shape.
"""

from functools import lru_cache

import numpy as np

from .errors import QuadFailure

ORDER = 15


@lru_cache(maxsize=8)
def _rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _breakpoints(a, b, points):
    edges = [a]
    if points is not None:
        edges += sorted(p for p in points if a < p < b)
    edges.append(b)
    return edges


def integrate(f, a, b, abs_tol=1e-10, max_depth=30, points=None, order=ORDER):
    """Integrate ``f`` over ``[a, b]`` to roughly ``abs_tol`` absolute error.

    Each panel is accepted when its single-panel estimate agrees with the
    sum over its two halves within the panel's share of ``abs_tol``.
    ``points`` are interior breakpoints (kinks, support edges) that always
    become panel boundaries.
    """
    if b == a:
        return 0.0
    if b < a:
        return -integrate(f, b, a, abs_tol, max_depth, points, order)
    total_width = b - a
    x, w = _rule(order)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        return half * np.dot(w, f(0.5 * (lo + hi) + half * x))

    result = 0.0
    edges = _breakpoints(a, b, points)
    stack = [(lo, hi, panel(lo, hi), 0) for lo, hi in zip(edges[:-1], edges[1:])]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel(lo, mid)
        right = panel(mid, hi)
        tol = abs_tol * (hi - lo) / total_width
        if abs(left + right - whole) <= max(tol, 1e-15 * abs(left + right)):
            result += left + right
            continue
        if depth >= max_depth:
            raise QuadFailure(
                f"adaptive quadrature exceeded max_depth={max_depth} on [{lo}, {hi}]"
            )
        stack.append((lo, mid, left, depth + 1))
        stack.append((mid, hi, right, depth + 1))
    return float(result)
