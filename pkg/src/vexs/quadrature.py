"""Deterministic 1D quadrature and root-isolation utilities.

Everything here is plumbing shared by the heavier modules: fixed
Gauss-Legendre panels, an adaptive panel-splitting integrator with a
reproducible refinement order, vectorized bisection for batches of
sign-change brackets, and golden-section maximization.

Determinism contract: given identical inputs, every routine performs
the same floating-point operations in the same order, so repeated runs
are bit-identical.  Refinement decisions compare errors *relative* to
the running total, which keeps decisions invariant under a global
scaling of the integrand.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


@lru_cache(maxsize=32)
def gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_nodes(edges: np.ndarray, n: int = 15) -> tuple[np.ndarray, np.ndarray]:
    """Flattened GL nodes/weights for the composite rule over consecutive
    panels given by `edges` (shape (k+1,)).  Returns (nodes, weights) of
    length k*n, ordered panel by panel."""
    x, w = gauss_nodes(n)
    a = edges[:-1]
    half = 0.5 * np.diff(edges)
    mid = a + half
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class AdaptiveResult:
    value: float
    error: float
    n_evals: int
    n_panels: int


def adaptive_integrate(f: Callable[[np.ndarray], np.ndarray],
                       a: float, b: float, *,
                       rel_tol: float = 1e-9,
                       seeds: Sequence[float] = (),
                       max_panels: int = 4000,
                       min_width_frac: float = 1e-13) -> AdaptiveResult:
    """Adaptive composite Gauss integration of f over [a, b].

    Each panel is evaluated with GL15 and GL7 in a single batched call;
    their difference is the panel error.  The worst panel (ties broken
    by creation index, so refinement order is reproducible) is split in
    half until the summed error drops below rel_tol times the running
    total.  `seeds` are interior breakpoints (kinks, support edges) used
    for the initial partition.  The final sum runs over panels sorted by
    left endpoint.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ValueError(f"bad integration interval [{a}, {b}]")
    x15, w15 = gauss_nodes(15)
    x7, w7 = gauss_nodes(7)
    xall = np.concatenate([x15, x7])

    n_evals = 0

    def eval_panel(lo: float, hi: float) -> tuple[float, float]:
        nonlocal n_evals
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vals = f(mid + half * xall)
        n_evals += xall.size
        i15 = half * float(np.sum(w15 * vals[:15]))
        i7 = half * float(np.sum(w7 * vals[15:]))
        return i15, abs(i15 - i7)

    pts = [a, b] + [float(s) for s in seeds if a < s < b]
    pts = sorted(set(pts))
    heap: list[tuple[float, int, float, float, float]] = []
    counter = 0
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = eval_panel(lo, hi)
        heapq.heappush(heap, (-e, counter, lo, hi, v))
        counter += 1
        total += v
        total_err += e

    min_width = min_width_frac * (b - a)
    while len(heap) < max_panels:
        if total_err <= rel_tol * max(abs(total), 1e-300):
            break
        neg_e, _, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if hi - lo <= min_width or mid <= lo or mid >= hi:
            # cannot refine further (discontinuity or sub-ulp width on a
            # huge domain); accept its estimate
            heapq.heappush(heap, (0.0, counter, lo, hi, v))
            counter += 1
            continue
        v1, e1 = eval_panel(lo, mid)
        v2, e2 = eval_panel(mid, hi)
        total += (v1 + v2) - v
        total_err += (e1 + e2) - (-neg_e)
        heapq.heappush(heap, (-e1, counter, lo, mid, v1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, hi, v2))
        counter += 1

    panels = sorted(heap, key=lambda t: t[2])
    value = float(np.sum(np.array([p[4] for p in panels])))
    error = float(np.sum(np.array([abs(p[0]) for p in panels])))
    return AdaptiveResult(value=value, error=error,
                          n_evals=n_evals, n_panels=len(panels))


def vector_bisect(g: Callable[[np.ndarray], np.ndarray],
                  lo: np.ndarray, hi: np.ndarray,
                  lo_positive: np.ndarray,
                  iters: int = 60) -> np.ndarray:
    """Bisect a batch of sign-change brackets simultaneously.

    g maps an array of abscissae to residual values; `lo_positive` gives
    the sign of g at each `lo`.  All brackets shrink in lockstep, so the
    call count is `iters` regardless of batch size.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = (g(mid) > 0.0) == lo_positive
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float,
               iters: int = 60) -> tuple[float, float]:
    """Golden-section maximization of a scalar unimodal-ish function."""
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    if fc > fd:
        return c, fc
    return d, fd


def decade_seeds(lo: float, hi: float) -> list[float]:
    """Interior breakpoints at +-10^k covering (lo, hi).

    Panels spanning many decades hide all their mass from any fixed-node
    rule (every node lands where the integrand already vanished), which
    defeats error estimation; decade seeds keep panel scale ratios sane.
    """
    out: set[float] = set()
    top = max(abs(lo), abs(hi))
    k = 0
    while 10.0 ** k < top:
        for s in (10.0 ** k, -10.0 ** k):
            if lo < s < hi:
                out.add(s)
        k += 1
    return sorted(out)
