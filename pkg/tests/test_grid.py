from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats as sps

from bandit_functionals.errors import GridTooCoarse, MisalignedGrids
from bandit_functionals.lowerbound import (DensityGrid, convolve_gaussian, grid_from_cdf,
                                           kl_divergence, spike, total_variation)
from bandit_functionals.lowerbound.grid import kl_from_difference, smooth_pair


def _normal_grid(mu, sd, lo=-12.0, hi=12.0, step=0.005):
    cells = int(round((hi - lo) / step))
    return grid_from_cdf(lambda x: sps.norm.cdf(x, mu, sd), lo, step, cells)


def test_spike_smooths_to_gaussian_density():
    out = convolve_gaussian(spike(0.0, 0.01), 1.0)
    assert np.interp(0.0, out.midpoints, out.values) == pytest.approx(1 / math.sqrt(2 * math.pi),
                                                                      abs=1e-3)


def test_gaussian_semigroup():
    base = grid_from_cdf(lambda x: np.clip(x, 0, 1), -0.1, 0.002, 600)
    sigma = 0.1
    twice = convolve_gaussian(convolve_gaussian(base, sigma / math.sqrt(2)), sigma / math.sqrt(2))
    once = convolve_gaussian(base, sigma)
    x = np.linspace(-0.5, 1.5, 4001)
    a = np.interp(x, twice.midpoints, twice.values, left=0, right=0)
    b = np.interp(x, once.midpoints, once.values, left=0, right=0)
    assert np.max(np.abs(a - b)) <= 1e-4


@pytest.mark.parametrize("sigma", [0.05, 0.3, 2.0])
def test_mass_is_conserved(sigma):
    base = grid_from_cdf(lambda x: np.clip(x, 0, 1), 0.0, 0.005, 200)
    base.check_mass()
    out = convolve_gaussian(base, sigma)
    assert out.mass == pytest.approx(1.0, abs=1e-6)
    assert out.lo == pytest.approx(base.lo - math.ceil(6 * sigma / base.step) * base.step)
    assert np.all(out.values >= 0)


def test_coarse_grid_is_rejected():
    with pytest.raises(GridTooCoarse):
        convolve_gaussian(spike(0.0, 0.1), 0.5)


def test_equal_grids_have_zero_kl():
    p = _normal_grid(0, 1)
    assert kl_divergence(p, p) == 0.0


def test_shifted_normal_kl():
    eps = 0.05
    kl = kl_divergence(_normal_grid(0, 1), _normal_grid(3 * eps, 1))
    assert kl == pytest.approx(9 * eps ** 2 / 2, rel=0.01)


def test_misaligned_grids():
    with pytest.raises(MisalignedGrids):
        kl_divergence(_normal_grid(0, 1), _normal_grid(0, 1, lo=-11.0))
    with pytest.raises(MisalignedGrids):
        total_variation(_normal_grid(0, 1), _normal_grid(0, 1, step=0.01))


def test_pinsker_on_random_pairs():
    gen = np.random.default_rng(2)
    for _ in range(20):
        vals = gen.gamma(0.5, size=(2, 300)) + 1e-3 * gen.uniform(size=(2, 300))
        p, q = (DensityGrid(0.0, 0.01, v / (v.sum() * 0.01)) for v in vals)
        kl = kl_divergence(p, q)
        assert kl >= -1e-9
        assert kl >= 2 * total_variation(p, q) ** 2


def test_kl_floor_keeps_disjoint_support_finite():
    p = DensityGrid(0.0, 1.0, np.array([1.0, 0.0]))
    q = DensityGrid(0.0, 1.0, np.array([0.0, 1.0]))
    kl = kl_divergence(p, q)
    assert math.isfinite(kl) and kl > 600


def test_difference_form_resolves_tiny_perturbations():
    p = np.full(1000, 1.0)
    diff = 1e-9 * np.sin(np.linspace(0, 2 * np.pi, 1000, endpoint=False))
    kl = kl_from_difference(p, diff, 0.001)
    assert kl == pytest.approx(0.5 * np.mean(diff ** 2), rel=1e-6)


def test_smooth_pair_matches_separate_convolutions():
    p = _normal_grid(0, 0.5, lo=-4, hi=4, step=0.01)
    q = _normal_grid(0.1, 0.5, lo=-4, hi=4, step=0.01)
    base, diff, grid = smooth_pair(p, q, 0.2)
    cp, cq = convolve_gaussian(p, 0.2), convolve_gaussian(q, 0.2)
    assert np.allclose(base, cp.values, rtol=0, atol=1e-9)
    assert np.allclose(base + diff, cq.values, rtol=0, atol=1e-9)
    assert grid.lo == cp.lo


def test_grid_validation():
    with pytest.raises(ValueError):
        DensityGrid(0.0, 0.0, np.ones(3))
    with pytest.raises(ValueError):
        DensityGrid(0.0, 1.0, np.array([1.0, -0.1]))
    with pytest.raises(ValueError):
        DensityGrid(0.0, 1.0, np.array([0.5, 0.4])).check_mass()
