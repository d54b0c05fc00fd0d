"""Pairs of arm-mean laws that are close in distance but far apart in a functional."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import EpsTooLarge
from ..model import (BetaTail, BetaTailCubicCap, Dirac, Distribution, FunctionalSpec,
                     PerturbedUniform, Uniform, true_functional)
from .bump import BumpSpec

PAIR_KINDS = ("mean_dirac", "max_w2", "max_winf", "max_kl", "median_pair", "trimmed_pair")

# median_pair: bump mass and default width factor (see make_pair)
MEDIAN_MASS_FRACTION = 0.8


@dataclass(frozen=True)
class ConstructionPair:
    kind: str
    eps: float
    F1: Distribution
    F2: Distribution
    functional: FunctionalSpec
    gap: float
    bump: BumpSpec | None = None
    k: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def gap_ok(self) -> bool:
        return self.gap >= self.eps * (1 - 1e-9)

    @property
    def bandwidth(self) -> float:
        """Length scale the smoothing grids must resolve."""
        return math.sqrt(self.eps)


def make_pair(kind: str, eps: float, *, k: int = 8, beta: float = 2.0, alpha: float = 0.25,
              width_factor: float | None = None) -> ConstructionPair:
    """Build a construction pair and measure its functional gap.

    Parameters
    ----------
    kind : str
        One of ``PAIR_KINDS``.
    eps : float
        Target separation.
    k : int
        Moment-matching order of the bump (median and trimmed pairs).
    beta : float
        Tail exponent for the maximum pairs.
    alpha : float
        Trimming level for ``trimmed_pair``.
    width_factor : float, optional
        ``median_pair`` bump half-width is ``width_factor * sqrt(eps)``; the
        default ``sqrt(3.2 * peak)`` gives the widest feasible ``eps`` range.

    Raises
    ------
    EpsTooLarge
        If the support or density-positivity constraints fail.
    """
    if kind not in PAIR_KINDS:
        raise ValueError(f"unknown pair kind {kind!r}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    bump = None
    extra: dict = {}

    if kind == "mean_dirac":
        if eps >= 0.5:
            raise EpsTooLarge("dirac atoms must stay inside [0, 1]")
        F1, F2 = Dirac(0.5 - eps), Dirac(0.5 + eps)
        fn = FunctionalSpec.mean()
    elif kind in ("max_w2", "max_winf", "max_kl"):
        if eps >= 0.5:
            raise EpsTooLarge("maximum pairs need eps < 1/2")
        fn = FunctionalSpec.maximum()
        if kind == "max_w2":
            F1, F2 = BetaTail(beta), BetaTailCubicCap(beta, eps)
        elif kind == "max_winf":
            F1, F2 = BetaTail(beta), BetaTail(beta, shift=eps)
        else:
            F1, F2 = BetaTail(beta, cut=eps), BetaTail(beta)
    elif kind == "median_pair":
        F1, F2, bump, extra = _median_pair(eps, k, width_factor)
        fn = FunctionalSpec.median()
    else:
        F1, F2, bump, extra = _trimmed_pair(eps, k, alpha)
        fn = FunctionalSpec.trimmed(alpha)

    gap = abs(true_functional(F1, fn) - true_functional(F2, fn))
    return ConstructionPair(kind=kind, eps=float(eps), F1=F1, F2=F2, functional=fn, gap=gap,
                            bump=bump, k=k if bump is not None else None, extra=extra)


def _median_pair(eps, k, width_factor):
    # Perturb uniform[-1, 1] (density 1/2) by a bump moving mass 0.8 eps from
    # the left of 0 to its right.  With the density kept in [1/4, 3/4] the
    # median moves by at least 0.8 eps / (3 / 4) > eps.
    peak = BumpSpec(k, 1.0).peak
    c = math.sqrt(4 * MEDIAN_MASS_FRACTION * peak) if width_factor is None else float(width_factor)
    width = c * math.sqrt(eps)
    mass = MEDIAN_MASS_FRACTION * eps
    bump = BumpSpec(k, width ** 2)
    scale = mass / width ** 2
    amplitude = scale * peak * width
    if width > 1:
        raise EpsTooLarge(f"bump half-width {width:.4g} exceeds the support [-1, 1]")
    if amplitude > 0.25 + 1e-12:
        raise EpsTooLarge(f"perturbation amplitude {amplitude:.4g} would push the density outside [1/4, 3/4]")
    F2 = PerturbedUniform(bump, shift=0.0, scale=scale, lo=-1.0, hi=1.0)
    return Uniform(-1.0, 1.0), F2, bump, {"width": width, "mass": mass, "scale": scale,
                                          "amplitude": amplitude}


def _trimmed_pair(eps, k, alpha):
    # uniform[1, 2] plus (1/b') h centred at the lower cut point 1 + alpha, where
    # h carries mass 4 b' eps on each side.  The slope bound is taken equal to
    # the bump's Lipschitz constant, so b' = max(b / c2, 4) = 4.
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    probe = BumpSpec(k, 1.0)
    slope_bound = probe.lipschitz
    b_prime = max(probe.lipschitz / slope_bound, 4.0)
    bump = BumpSpec(k, 4 * b_prime * eps)
    scale = 1.0 / b_prime
    width = bump.half_width
    amplitude = scale * probe.peak * width
    if width > alpha or 1 + alpha + width > 2 - alpha:
        raise EpsTooLarge(f"bump half-width {width:.4g} leaves the window around 1 + alpha")
    if amplitude > 0.75 + 1e-12:
        raise EpsTooLarge(f"perturbation amplitude {amplitude:.4g} would push the density below 1/4")
    F2 = PerturbedUniform(bump, shift=1.0 + alpha, scale=scale, lo=1.0, hi=2.0)
    return Uniform(1.0, 2.0), F2, bump, {"width": width, "b_prime": b_prime, "scale": scale,
                                         "amplitude": amplitude}
