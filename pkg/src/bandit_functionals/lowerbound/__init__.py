"""Numerical lower-bound constructions: bumps, pairs, smoothing and divergences."""

from .bump import BumpSpec, bump_coefficients
from .grid import DensityGrid, convolve_gaussian, grid_from_cdf, kl_divergence, spike, total_variation
from .pairs import PAIR_KINDS, ConstructionPair, make_pair
from .sweep import (SmoothingCheck, is_nonincreasing, kl_eps_sweep, logratio_sup, sigma_sweep,
                    smoothed_kl, smoothing_check)
from .wasserstein import wasserstein2, wasserstein_inf

__all__ = [
    "BumpSpec", "bump_coefficients", "DensityGrid", "convolve_gaussian", "grid_from_cdf",
    "kl_divergence", "spike", "total_variation", "PAIR_KINDS", "ConstructionPair", "make_pair",
    "SmoothingCheck", "is_nonincreasing", "kl_eps_sweep", "logratio_sup", "sigma_sweep",
    "smoothed_kl", "smoothing_check", "wasserstein2", "wasserstein_inf",
]
