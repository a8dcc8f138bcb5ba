"""Derivative-free 1-D maximization helpers used by the adaptive-basis optimizers."""

from __future__ import annotations

import math
from typing import Callable

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 10_000
) -> tuple[float, float, int, bool]:
    """Maximize a unimodal ``f`` on ``[a, b]`` until the bracket is narrower than ``tol``.

    Returns ``(x, f(x), iterations, converged)``. The endpoints are compared
    against the interior optimum so a maximum sitting on the boundary of the
    feasible range is not lost.
    """
    lo, hi = a, b
    c = hi - INVPHI * (hi - lo)
    d = lo + INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    it = 0
    while hi - lo > tol and it < max_iter:
        it += 1
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INVPHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    best_x, best_f = x, f(x)
    for cand in (a, b):
        fv = f(cand)
        if fv > best_f:
            best_x, best_f = cand, fv
    return best_x, best_f, it, hi - lo <= tol
