"""One-dimensional Wasserstein distances through quantile functions."""

from __future__ import annotations

import numpy as np
from scipy import integrate, optimize

_SPLITS = (1e-12, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9, 0.99, 1 - 1e-4, 1 - 1e-6, 1 - 1e-8, 1 - 1e-12)


def _gap(F1, F2):
    return lambda u: float(F1.quantile(u)) - float(F2.quantile(u))


def wasserstein2(F1, F2, breakpoints=()) -> float:
    """``(int_0^1 (Q1(u) - Q2(u))^2 du)^(1/2)`` by piecewise adaptive quadrature."""
    gap = _gap(F1, F2)
    pts = sorted({0.0, 1.0, *_SPLITS, *[float(b) for b in breakpoints if 0 < b < 1]})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda u: gap(u) ** 2, lo, hi, epsabs=1e-14, epsrel=1e-10, limit=200)
        total += val
    return float(np.sqrt(total))


def wasserstein_inf(F1, F2, points: int = 20001) -> float:
    """``sup_u |Q1(u) - Q2(u)|`` from a dense grid, refined around the best cell."""
    u = np.unique(np.concatenate([
        np.linspace(1e-12, 1 - 1e-12, points),
        np.geomspace(1e-15, 1e-3, 200),
        1 - np.geomspace(1e-15, 1e-3, 200),
    ]))
    diff = np.abs(np.asarray(F1.quantile(u), dtype=float) - np.asarray(F2.quantile(u), dtype=float))
    i = int(np.nanargmax(diff))
    best = float(diff[i])
    lo, hi = u[max(i - 1, 0)], u[min(i + 1, u.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: -abs(_gap(F1, F2)(s)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best
