"""Gaussian-smoothing experiments on construction pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import Distribution
from .grid import DensityGrid, KL_SKIP, gaussian_kernel, grid_from_cdf, kl_from_difference, smooth_pair
from .pairs import ConstructionPair


def grid_step(pair: ConstructionPair, sigma: float) -> float:
    return min(sigma / 8, math.sqrt(pair.eps) / 64)


def gridded_pair(pair: ConstructionPair, step: float) -> tuple[DensityGrid, DensityGrid]:
    """Cell-averaged densities of both laws on one grid covering both supports."""
    lo = min(pair.F1.support_lo, pair.F2.support_lo)
    hi = max(pair.F1.support_hi, pair.F2.support_hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("gridding needs bounded supports")
    start = lo - step
    cells = math.ceil((hi - start) / step) + 1
    return grid_from_cdf(pair.F1.cdf, start, step, cells), grid_from_cdf(pair.F2.cdf, start, step, cells)


def smoothed_kl(pair: ConstructionPair, sigma: float) -> float:
    """KL between the two laws after adding independent N(0, sigma^2) noise."""
    p, q = gridded_pair(pair, grid_step(pair, sigma))
    base, diff, grid = smooth_pair(p, q, sigma)
    return kl_from_difference(base, diff, grid.step)


def sigma_sweep(pair: ConstructionPair, sigmas) -> list[tuple[float, float]]:
    """``[(sigma, KL)]`` for ascending ``sigmas``."""
    sigmas = [float(s) for s in sigmas]
    if any(s <= 0 for s in sigmas) or sorted(sigmas) != sigmas:
        raise ValueError("sigmas must be positive and ascending")
    return [(s, smoothed_kl(pair, s)) for s in sigmas]


def is_nonincreasing(sweep, slack: float = 1e-9) -> bool:
    kl = [v for _, v in sweep]
    return all(b <= a + slack for a, b in zip(kl, kl[1:]))


def logratio_sup(pair: ConstructionPair, sigma: float,
                 region: tuple[float, float] | None = None) -> float:
    """``max |ln(p1 * phi / p2 * phi)|`` over grid cells where both smoothed densities exceed 1e-12.

    ``region`` optionally restricts the cells to an interval of ``x``.
    """
    p, q = gridded_pair(pair, grid_step(pair, sigma))
    base, diff, grid = smooth_pair(p, q, sigma)
    other = base + diff
    keep = (base >= KL_SKIP) & (other >= KL_SKIP)
    if region is not None:
        x = grid.midpoints
        keep &= (x >= region[0]) & (x <= region[1])
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(np.log1p(diff[keep] / base[keep]))))


def kl_eps_sweep(kind: str, eps_grid, sigma_of_eps, **pair_args) -> list[tuple[float, float, float]]:
    """``[(eps, sigma, KL)]`` with ``sigma = sigma_of_eps(eps)``."""
    from .pairs import make_pair

    rows = []
    for eps in eps_grid:
        pair = make_pair(kind, eps, **pair_args)
        sigma = float(sigma_of_eps(eps))
        rows.append((float(eps), sigma, smoothed_kl(pair, sigma)))
    return rows


@dataclass(frozen=True)
class SmoothingCheck:
    m: int
    sup_gap: float
    bound: float
    slope_bound: float
    reach: float
    window: tuple[float, float]

    @property
    def holds(self) -> bool:
        return self.sup_gap <= self.bound


def smoothing_check(dist: Distribution, m: int, refine: int = 32) -> SmoothingCheck:
    """Compare ``F`` with ``F * N(0, 1/m)`` away from the support edges.

    The comparison window keeps ``x`` at least ``sqrt(4 ln(2 sqrt(m))) / sqrt(m)``
    inside the support, so the Gaussian window around ``x`` sees only the
    region where ``|F''| <= c2``.  The bound is ``(c2 + 1) / (2 m)``.
    """
    sigma = 1.0 / math.sqrt(m)
    reach = math.sqrt(4 * math.log(2 * math.sqrt(m))) * sigma
    lo, hi = dist.support_lo, dist.support_hi
    step = sigma / refine
    cells = math.ceil((hi - lo) / step)
    step = (hi - lo) / cells
    p = grid_from_cdf(dist.cdf, lo, step, cells)
    weights, half = gaussian_kernel(sigma, step)
    smooth_mass = np.convolve(p.values * step, weights / weights.sum())
    smooth_cdf = np.cumsum(smooth_mass)
    edges = (lo - half * step) + step * np.arange(1, smooth_cdf.size + 1)
    window = (lo + reach, hi - reach)
    inside = (edges >= window[0]) & (edges <= window[1])
    exact = np.asarray(dist.cdf(edges[inside]))
    sup_gap = float(np.max(np.abs(smooth_cdf[inside] - exact))) if np.any(inside) else 0.0
    probe = np.linspace(lo, hi, 200001)[1:-1]
    c2 = float(np.max(np.abs(dist.pdf_derivative(probe))))
    return SmoothingCheck(m=m, sup_gap=sup_gap, bound=(c2 + 1) / (2 * m), slope_bound=c2,
                          reach=reach, window=window)
