"""Adaptive quadrature and bracketed root finding.

The integrator is a Gauss-Kronrod 7/15 rule with error-driven interval
bisection. Integrands must accept and return numpy arrays so each
15-point panel costs a single vectorized call.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError

# Kronrod-15 abscissae on [-1, 1]; every second node is a Gauss-7 node.
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_GAUSS_SLICE = slice(1, 15, 2)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    panels: int


def _panel(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _XK), dtype=float)
    k = half * float(np.dot(_WK, y))
    g = half * float(np.dot(_WG, y[_GAUSS_SLICE]))
    return k, abs(k - g)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-12,
    limit: int = 4096,
    points: Sequence[float] = (),
) -> QuadResult:
    """Integrate a vectorized integrand over [a, b].

    `points` lists interior breakpoints (e.g. known peaks) used as the
    initial segmentation. Refinement bisects the segment with the
    largest Kronrod-Gauss discrepancy until the summed discrepancy
    drops below max(abs_tol, rel_tol * |integral|) or `limit` panels
    have been evaluated.
    """
    if b <= a:
        return QuadResult(0.0, 0.0, True, 0)
    edges = [a] + sorted(p for p in points if a < p < b) + [b]
    heap: list[tuple[float, int, float, float, float]] = []
    serial = 0
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _panel(f, lo, hi)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, serial, lo, hi, val))
        serial += 1
    panels = len(heap)
    while total_err > max(abs_tol, rel_tol * abs(total)) and panels < limit:
        neg_err, _, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval at float resolution
            heapq.heappush(heap, (0.0, serial, lo, hi, val))
            serial += 1
            total_err += neg_err  # drop this panel's error claim
            continue
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, serial, lo, mid, v1))
        heapq.heappush(heap, (-e2, serial + 1, mid, hi, v2))
        serial += 2
        panels += 2
    converged = total_err <= max(abs_tol, rel_tol * abs(total))
    return QuadResult(total, total_err, converged, panels)


def integrate_decaying(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    scale: float,
    *,
    cutoff: float = 1e-12,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-12,
    limit: int = 4096,
    max_doublings: int = 200,
) -> tuple[QuadResult, bool]:
    """Integrate a decaying integrand from `a` towards infinity.

    The upper limit doubles from `a + scale` until the integrand falls
    below `cutoff`. Returns the quadrature result and whether the
    integrand had decayed below the cutoff at the final endpoint.
    """
    hi = a + scale
    decayed = False
    marks = []
    for _ in range(max_doublings):
        if float(np.asarray(f(np.array([hi])))[0]) < cutoff:
            decayed = True
            break
        marks.append(hi)
        hi = a + (hi - a) * 2.0
    res = integrate(f, a, hi, abs_tol=abs_tol, rel_tol=rel_tol, limit=limit,
                    points=marks)
    return res, decayed


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rel_tol: float = 1e-12,
    abs_tol: float = 0.0,
    f_tol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Locate a root of f in [lo, hi] by bisection with secant refinement.

    f(lo) and f(hi) must have opposite signs. Secant proposals are
    accepted only while they stay inside the current bracket; otherwise
    the step falls back to bisection, so convergence is guaranteed.
    """
    fa = f(lo)
    fb = f(hi)
    if fa == 0.0:
        return lo
    if fb == 0.0:
        return hi
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise BracketError(f"no sign change on [{lo}, {hi}]", target=None)
    for _ in range(max_iter):
        width = hi - lo
        mid = 0.5 * (lo + hi)
        if width <= max(abs_tol, rel_tol * abs(mid)):
            return mid
        if fb != fa:
            x = hi - fb * (hi - lo) / (fb - fa)
        else:
            x = mid
        # keep proposals strictly interior; degenerate ones bisect
        if not (lo < x < hi) or min(x - lo, hi - x) < 0.01 * width:
            x = mid
        fx = f(x)
        if fx == 0.0 or abs(fx) <= f_tol:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, fa):
            lo, fa = x, fx
        else:
            hi, fb = x, fx
    return 0.5 * (lo + hi)


def grow_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    factor: float = 2.0,
    max_grow: int = 200,
) -> tuple[float, float]:
    """Expand [lo, hi] geometrically until f changes sign across it."""
    sign_lo = math.copysign(1.0, f(lo))
    for _ in range(max_grow):
        fhi = f(hi)
        if math.copysign(1.0, fhi) != sign_lo or fhi == 0.0:
            return lo, hi
        lo = hi
        hi *= factor
    raise BracketError(f"no sign change found growing to {hi}", target=None)
