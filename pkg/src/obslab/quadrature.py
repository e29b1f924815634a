"""Adaptive Gauss-Legendre quadrature.

Turning-point integrands like sqrt(mu^2m - t^2m) lose smoothness at
t = mu; callers remove the singularity with the substitution
t = mu*(1 -/+ s^2) and hand the smooth transformed integrand here.
"""

from __future__ import annotations

import numpy as np

_NODES20, _WEIGHTS20 = np.polynomial.legendre.leggauss(20)


class QuadratureFailure(RuntimeError):
    """Adaptive refinement exceeded the depth cap."""


def gauss_panel(f, a: float, b: float) -> float:
    """20-point Gauss-Legendre rule on a single panel."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_WEIGHTS20, f(mid + half * _NODES20)))


def adaptive(f, a: float, b: float, rel_tol: float = 1e-8,
             abs_floor: float = 1e-300, depth_cap: int = 40) -> float:
    """Adaptive bisection with a 20-point panel; f must accept ndarrays."""
    if a == b:
        return 0.0

    def recurse(lo, hi, whole, depth):
        mid = 0.5 * (lo + hi)
        left = gauss_panel(f, lo, mid)
        right = gauss_panel(f, mid, hi)
        err = abs(left + right - whole)
        if err <= rel_tol * max(abs(left + right), abs_floor):
            return left + right
        if depth >= depth_cap:
            raise QuadratureFailure(
                f"no convergence on [{lo:g},{hi:g}] after depth {depth}")
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(a, b, gauss_panel(f, a, b), 0)


def cumulative_panels(f, points: np.ndarray, order: int = 12) -> np.ndarray:
    """Cumulative integral of f from points[0] to each point, one
    fixed-order panel per consecutive pair.  Use on smooth integrands
    with finely spaced points."""
    pts = np.asarray(points, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mids = 0.5 * (pts[1:] + pts[:-1])
    halfs = 0.5 * (pts[1:] - pts[:-1])
    samples = f(mids[:, None] + halfs[:, None] * nodes[None, :])
    pieces = halfs * (samples @ weights)
    out = np.empty_like(pts)
    out[0] = 0.0
    np.cumsum(pieces, out=out[1:])
    return out
