"""Densities on uniform grids: Gaussian smoothing and KL quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridTooCoarse, MisalignedGrids

KL_FLOOR = 1e-300
KL_SKIP = 1e-12


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Density values at the midpoints of ``len(values)`` cells of width ``step``."""

    lo: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not self.step > 0:
            raise ValueError("step must be positive")
        if np.any(vals < 0):
            raise ValueError("density values must be nonnegative")

    @property
    def hi(self) -> float:
        return self.lo + self.step * self.values.size

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.step)

    @property
    def midpoints(self) -> np.ndarray:
        return self.lo + self.step * (np.arange(self.values.size) + 0.5)

    @property
    def edges(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.values.size + 1)

    def check_mass(self, tol: float = 1e-6) -> None:
        if abs(self.mass - 1.0) > tol:
            raise ValueError(f"grid mass {self.mass} differs from 1 by more than {tol}")


def grid_from_cdf(cdf, lo: float, step: float, cells: int) -> DensityGrid:
    """Cell-averaged density from exact cdf increments (handles atoms and jumps)."""
    edges = lo + step * np.arange(cells + 1)
    mass = np.diff(np.asarray(cdf(edges), dtype=float))
    return DensityGrid(lo, step, np.clip(mass, 0.0, None) / step)


def spike(at: float, step: float, pad: int = 4) -> DensityGrid:
    """Unit mass in a single cell centred on ``at``."""
    values = np.zeros(2 * pad + 1)
    values[pad] = 1.0 / step
    return DensityGrid(at - (pad + 0.5) * step, step, values)


def gaussian_kernel(sigma: float, step: float) -> tuple[np.ndarray, int]:
    """Sampled N(0, sigma^2) weights on ``[-6 sigma, 6 sigma]``; returns (weights, half-length)."""
    half = math.ceil(6 * sigma / step)
    x = step * np.arange(-half, half + 1)
    weights = np.exp(-0.5 * (x / sigma) ** 2) * step / (sigma * math.sqrt(2 * math.pi))
    return weights, half


def _check_step(step, sigma):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if step > sigma / 8 * (1 + 1e-9):
        raise GridTooCoarse(f"grid step {step} exceeds sigma/8 = {sigma / 8}")


def convolve_gaussian(p: DensityGrid, sigma: float) -> DensityGrid:
    """Density of ``X + sigma Z`` on a grid extended by about ``6 sigma`` each side."""
    _check_step(p.step, sigma)
    weights, half = gaussian_kernel(sigma, p.step)
    if abs(weights.sum() - 1.0) > 1e-6:
        raise GridTooCoarse("kernel mass error above 1e-6")
    out = np.convolve(p.values, weights)
    out = np.clip(out, 0.0, None)
    out /= out.sum() * p.step
    return DensityGrid(p.lo - half * p.step, p.step, out)


def smooth_pair(p: DensityGrid, q: DensityGrid, sigma: float) -> tuple[np.ndarray, np.ndarray, DensityGrid]:
    """Smooth an aligned pair, convolving ``q - p`` directly to keep tiny differences exact.

    Returns ``(p_smoothed, q_minus_p_smoothed, p_smoothed_grid)`` with both
    arrays divided by the same normalizer.
    """
    _aligned(p, q)
    _check_step(p.step, sigma)
    weights, half = gaussian_kernel(sigma, p.step)
    base = np.clip(np.convolve(p.values, weights), 0.0, None)
    diff = np.convolve(q.values - p.values, weights)
    norm = base.sum() * p.step
    base /= norm
    diff /= norm
    return base, diff, DensityGrid(p.lo - half * p.step, p.step, base)


def _aligned(p: DensityGrid, q: DensityGrid) -> None:
    if (p.values.size != q.values.size or abs(p.step - q.step) > 1e-12 * p.step
            or abs(p.lo - q.lo) > 1e-9 * p.step):
        raise MisalignedGrids("density grids do not share lo, step and size")


def kl_from_difference(p: np.ndarray, diff: np.ndarray, step: float) -> float:
    """KL(p || p + diff) on a grid.

    Uses the termwise nonnegative form ``p ln(p/q) - p + q``, which sums to the
    usual KL when both densities carry the same mass and stays accurate when
    ``q - p`` is many orders of magnitude below ``p``.
    """
    q = p + diff
    keep = (p >= KL_SKIP) | (q >= KL_SKIP)
    p, q, diff = p[keep], q[keep], diff[keep]
    total = 0.0
    pos = p > 0
    qf = np.maximum(q[pos], KL_FLOOR)
    pp = p[pos]
    ratio = (qf - pp) / pp
    small = np.abs(ratio) < 0.5
    terms = np.empty_like(pp)
    terms[small] = pp[small] * (ratio[small] - np.log1p(ratio[small]))
    big = ~small
    terms[big] = pp[big] * np.log(pp[big] / qf[big]) - pp[big] + qf[big]
    total += float(np.sum(terms))
    total += float(np.sum(np.clip(q[~pos], 0.0, None)))
    return total * step


def kl_divergence(p: DensityGrid, q: DensityGrid) -> float:
    """``sum p ln(p/q) step`` with a ``1e-300`` floor on ``q``; cells where both are tiny are skipped."""
    _aligned(p, q)
    return kl_from_difference(p.values, q.values - p.values, p.step)


def total_variation(p: DensityGrid, q: DensityGrid) -> float:
    _aligned(p, q)
    return 0.5 * float(np.sum(np.abs(p.values - q.values))) * p.step
