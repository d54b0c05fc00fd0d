"""Arm-mean distributions, indicator functionals and their regularity constants.

Every family exposes ``cdf``, ``quantile`` (generalized inverse, vectorized),
``pdf`` and ``pdf_derivative`` where a density exists, plus exact moments.
Functionals have the form ``g(F) = E[X | X in [F^-1(alpha1), F^-1(alpha2)]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .errors import UnboundedFunctional

_QUAD_SPLITS = (1e-10, 1e-6, 1e-3, 0.05, 0.5, 0.95, 1 - 1e-3, 1 - 1e-6, 1 - 1e-10)


def _bisect_quantile(cdf, p, lo, hi, iters=80):
    """Vectorized generalized inverse ``inf{x : cdf(x) >= p}`` on ``[lo, hi]``."""
    p = np.asarray(p, dtype=float)
    a = np.full(p.shape, float(lo))
    b = np.full(p.shape, float(hi))
    for _ in range(iters):
        mid = 0.5 * (a + b)
        above = cdf(mid) >= p
        b = np.where(above, mid, b)
        a = np.where(above, a, mid)
        if np.all(b - a <= 1e-15 * max(1.0, abs(lo), abs(hi))):
            break
    return b


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


class Distribution:
    """Shared behavior; subclasses are frozen dataclasses."""

    family: ClassVar[str] = "abstract"
    has_density: ClassVar[bool] = True

    @property
    def support_lo(self) -> float:
        raise NotImplementedError

    @property
    def support_hi(self) -> float:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = _bisect_quantile(self.cdf, p, self.support_lo, self.support_hi)
        out = np.where(p <= 0, self.support_lo, out)
        return _scalar_or_array(p, out)

    def pdf(self, x):
        raise NotImplementedError

    def pdf_derivative(self, x):
        raise NotImplementedError

    def interval_mean(self, a1: float, a2: float) -> float:
        """Mean of the quantile function over ``[a1, a2]``; equals ``E[X | X in S(F)]``."""
        if a2 - a1 <= 0:
            return float(self.quantile(a1))
        pts = [a1] + [s for s in _QUAD_SPLITS if a1 < s < a2] + [a2]
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(lambda u: float(self.quantile(u)), lo, hi,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val
        return total / (a2 - a1)

    def mean(self) -> float:
        return self.interval_mean(0.0, 1.0)

    def second_moment(self) -> float:
        pts = [0.0, *_QUAD_SPLITS, 1.0]
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(lambda u: float(self.quantile(u)) ** 2, lo, hi,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val
        return total

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float = 0.0
    hi: float = 1.0
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("uniform requires hi > lo")

    @property
    def support_lo(self):
        return self.lo

    @property
    def support_hi(self):
        return self.hi

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_or_array(p, self.lo + p * (self.hi - self.lo))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return _scalar_or_array(x, np.where(inside, 1.0 / (self.hi - self.lo), 0.0))

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.zeros_like(x))

    def interval_mean(self, a1, a2):
        return self.lo + (self.hi - self.lo) * 0.5 * (a1 + a2)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def variance(self):
        return (self.hi - self.lo) ** 2 / 12.0


@dataclass(frozen=True)
class Dirac(Distribution):
    at: float = 0.5
    family: ClassVar[str] = "dirac"
    has_density: ClassVar[bool] = False

    @property
    def support_lo(self):
        return self.at

    @property
    def support_hi(self):
        return self.at

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, (x >= self.at).astype(float))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_or_array(p, np.full(p.shape, float(self.at)))

    def interval_mean(self, a1, a2):
        return float(self.at)

    def mean(self):
        return float(self.at)

    def variance(self):
        return 0.0


@dataclass(frozen=True)
class Gaussian(Distribution):
    mu: float = 0.0
    sd: float = 1.0
    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("gaussian requires sd > 0")

    @property
    def support_lo(self):
        return -math.inf

    @property
    def support_hi(self):
        return math.inf

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, ndtr((x - self.mu) / self.sd))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_or_array(p, self.mu + self.sd * ndtri(p))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sd
        return _scalar_or_array(x, np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2 * math.pi)))

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sd
        return _scalar_or_array(x, -z / self.sd * np.asarray(self.pdf(x)))

    def interval_mean(self, a1, a2):
        if a2 - a1 <= 0:
            return float(self.quantile(a1))
        # E[Z; a <= Z <= b] = phi(a) - phi(b) for standard normal Z
        za, zb = ndtri(a1), ndtri(a2)
        phi = lambda z: 0.0 if math.isinf(z) else math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        return self.mu + self.sd * (phi(za) - phi(zb)) / (a2 - a1)

    def mean(self):
        return float(self.mu)

    def variance(self):
        return self.sd ** 2


@dataclass(frozen=True)
class BetaTail(Distribution):
    """``F(x) = 1 - (1 - x)^beta`` on ``[0, 1]``, optionally shifted and truncated.

    ``shift`` translates the whole law; ``cut > 0`` truncates the upper end to
    ``1 - cut`` (before shifting) and renormalizes.
    """

    beta: float = 2.0
    shift: float = 0.0
    cut: float = 0.0
    family: ClassVar[str] = "beta_tail"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta_tail requires beta > 0")
        if not 0 <= self.cut < 1:
            raise ValueError("cut must lie in [0, 1)")

    @property
    def _norm(self):
        return 1.0 - self.cut ** self.beta

    @property
    def support_lo(self):
        return self.shift

    @property
    def support_hi(self):
        return self.shift + 1.0 - self.cut

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.clip(x - self.shift, 0.0, 1.0 - self.cut)
        return _scalar_or_array(x, np.minimum((1.0 - (1.0 - y) ** self.beta) / self._norm, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        y = 1.0 - (1.0 - p * self._norm) ** (1.0 / self.beta)
        return _scalar_or_array(p, self.shift + y)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.shift
        inside = (y >= 0) & (y <= 1.0 - self.cut)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.beta * np.abs(1.0 - y) ** (self.beta - 1.0) / self._norm
        return _scalar_or_array(x, np.where(inside, val, 0.0))

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.shift
        inside = (y >= 0) & (y <= 1.0 - self.cut)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -self.beta * (self.beta - 1.0) * np.abs(1.0 - y) ** (self.beta - 2.0) / self._norm
        return _scalar_or_array(x, np.where(inside, val, 0.0))

    def mean(self):
        if self.cut == 0.0:
            return self.shift + 1.0 / (self.beta + 1.0)
        return super().mean()


@dataclass(frozen=True)
class BetaTailCubicCap(Distribution):
    """Beta-tail law whose top ``eps`` is removed by a smooth monotone cubic.

    With ``v = (1 - u)^(1/beta)`` the quantile is ``1 - G(v)`` where ``G`` is the
    identity for ``v >= 2 eps`` and the Hermite cubic through ``(0, eps)`` and
    ``(2 eps, 2 eps)`` with unit end slopes below.  The quantile gap to the
    uncapped law is ``eps * (1 - 3 t^2 + 2 t^3)`` with ``t = v / (2 eps)``.
    """

    beta: float = 2.0
    eps: float = 0.1
    family: ClassVar[str] = "beta_tail_cubic_cap"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.eps < 0.5:
            raise ValueError("cubic cap needs 0 < eps < 1/2")

    @property
    def support_lo(self):
        return 0.0

    @property
    def support_hi(self):
        return 1.0 - self.eps

    def cap(self, v):
        """The monotone map ``G`` (vectorized)."""
        v = np.asarray(v, dtype=float)
        t = np.clip(v / (2 * self.eps), 0.0, 1.0)
        return np.where(v < 2 * self.eps, v + self.eps * (1 - 3 * t ** 2 + 2 * t ** 3), v)

    def cap_slope(self, v):
        v = np.asarray(v, dtype=float)
        t = np.clip(v / (2 * self.eps), 0.0, 1.0)
        return np.where(v < 2 * self.eps, 1.0 + 3.0 * t * t - 3.0 * t, 1.0)

    def _cap_curvature(self, v):
        v = np.asarray(v, dtype=float)
        t = np.clip(v / (2 * self.eps), 0.0, 1.0)
        return np.where(v < 2 * self.eps, (6.0 * t - 3.0) / (2 * self.eps), 0.0)

    def _cap_inverse(self, y):
        y = np.asarray(y, dtype=float)
        v = _bisect_quantile(self.cap, y, 0.0, 2 * self.eps)
        return np.where(y >= 2 * self.eps, y, v)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        v = np.clip(1.0 - p, 0.0, 1.0) ** (1.0 / self.beta)
        return _scalar_or_array(p, 1.0 - self.cap(v))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.clip(1.0 - x, self.eps, 1.0)
        v = self._cap_inverse(y)
        return _scalar_or_array(x, 1.0 - v ** self.beta)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= 1.0 - self.eps)
        v = self._cap_inverse(np.clip(1.0 - x, self.eps, 1.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.beta * v ** (self.beta - 1.0) / self.cap_slope(v)
        return _scalar_or_array(x, np.where(inside, val, 0.0))

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= 1.0 - self.eps)
        v = self._cap_inverse(np.clip(1.0 - x, self.eps, 1.0))
        g1 = self.cap_slope(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            dv = (self.beta * (self.beta - 1.0) * v ** (self.beta - 2.0) / g1
                  - self.beta * v ** (self.beta - 1.0) * self._cap_curvature(v) / g1 ** 2)
            val = -dv / g1
        return _scalar_or_array(x, np.where(inside, val, 0.0))


@dataclass(frozen=True)
class PerturbedUniform(Distribution):
    """Uniform density on ``[lo, hi]`` plus ``scale * bump.h(x - shift)``.

    ``bump`` is any object with vectorized ``h``, ``integral`` (antiderivative
    vanishing at ``-inf``), ``derivative`` and a ``half_width`` attribute; see
    :class:`bandit_functionals.lowerbound.bump.BumpSpec`.
    """

    bump: Any
    shift: float = 0.0
    scale: float = 1.0
    lo: float = -1.0
    hi: float = 1.0
    family: ClassVar[str] = "perturbed_uniform"

    def __post_init__(self):
        w = self.bump.half_width
        if self.shift - w < self.lo - 1e-12 or self.shift + w > self.hi + 1e-12:
            raise ValueError("bump support must lie inside [lo, hi]")

    @property
    def support_lo(self):
        return self.lo

    @property
    def support_hi(self):
        return self.hi

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        base = np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        out = base + self.scale * self.bump.integral(x - self.shift)
        return _scalar_or_array(x, np.clip(out, 0.0, 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        val = 1.0 / (self.hi - self.lo) + self.scale * self.bump.h(x - self.shift)
        return _scalar_or_array(x, np.where(inside, val, 0.0))

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.lo) & (x < self.hi)
        return _scalar_or_array(x, np.where(inside, self.scale * self.bump.derivative(x - self.shift), 0.0))

    def density_range(self, points: int = 200001) -> tuple[float, float]:
        x = np.linspace(self.lo, self.hi, points)
        p = np.asarray(self.pdf(x))
        return float(p.min()), float(p.max())

    def _x_moment(self, a, b, power):
        w = self.bump.half_width
        pts = sorted({a, b, *[s for s in (self.shift - w, self.shift, self.shift + w) if a < s < b]})
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(lambda x: x ** power * float(self.pdf(x)), lo, hi,
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
            total += val
        return total

    def interval_mean(self, a1, a2):
        if a2 - a1 <= 0:
            return float(self.quantile(a1))
        a = float(self.quantile(a1)) if a1 > 0 else self.lo
        b = float(self.quantile(a2)) if a2 < 1 else self.hi
        return self._x_moment(a, b, 1) / (a2 - a1)

    def mean(self):
        return self._x_moment(self.lo, self.hi, 1)

    def second_moment(self):
        return self._x_moment(self.lo, self.hi, 2)


# ---------------------------------------------------------------------------
# functionals

_KINDS = ("mean", "quantile", "maximum", "trimmed")


@dataclass(frozen=True)
class FunctionalSpec:
    """Indicator functional identified by its quantile window ``[alpha1, alpha2]``."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "quantile":
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError("quantile level must lie in (0, 1)")
        elif self.kind == "trimmed":
            if self.alpha is None or not 0 < self.alpha < 0.5:
                raise ValueError("trimming level must lie in (0, 1/2)")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} takes no level")

    @classmethod
    def mean(cls) -> FunctionalSpec:
        return cls("mean")

    @classmethod
    def quantile(cls, alpha: float) -> FunctionalSpec:
        return cls("quantile", float(alpha))

    @classmethod
    def median(cls) -> FunctionalSpec:
        return cls("quantile", 0.5)

    @classmethod
    def maximum(cls) -> FunctionalSpec:
        return cls("maximum")

    @classmethod
    def trimmed(cls, alpha: float) -> FunctionalSpec:
        return cls("trimmed", float(alpha))

    @property
    def alpha1(self) -> float:
        return {"mean": 0.0, "maximum": 1.0}.get(self.kind, self.alpha)

    @property
    def alpha2(self) -> float:
        if self.kind == "trimmed":
            return 1.0 - self.alpha
        return {"mean": 1.0, "maximum": 1.0}.get(self.kind, self.alpha)

    @property
    def label(self) -> str:
        return self.kind if self.alpha is None else f"{self.kind}({self.alpha:g})"


def cdf(dist: Distribution, x):
    return dist.cdf(x)


def quantile(dist: Distribution, p):
    return dist.quantile(p)


def true_functional(dist: Distribution, fn: FunctionalSpec) -> float:
    """Exact value of ``fn`` under ``dist``."""
    if fn.kind == "maximum":
        top = dist.support_hi
        if not math.isfinite(top):
            raise UnboundedFunctional(f"{dist.family} has unbounded upper support")
        return float(top)
    if fn.kind == "quantile":
        return float(dist.quantile(fn.alpha))
    if fn.kind == "mean":
        return float(dist.mean())
    return float(dist.interval_mean(fn.alpha1, fn.alpha2))


# ---------------------------------------------------------------------------
# regularity constants


@dataclass(frozen=True)
class AssumptionParams:
    """Regularity constants verified for one (distribution, functional, eps).

    ``var_bound`` bounds the variance (mean).  For quantiles ``c1`` is a density
    floor and ``c2`` a density-slope ceiling near the target.  For the maximum
    ``c1 t^beta <= 1 - F(top - t) <= c2 t^beta``.  The trimmed mean uses ``c0``
    (second moment), ``c1``/``c2`` at both cut points, ``c3`` (density ceiling),
    ``c4``/``c5`` (largest/smallest absolute cut point).
    """

    var_bound: float | None = None
    c0: float | None = None
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    beta: float | None = None
    validity_radius: tuple[float, float] | None = None
    clipped_to_support: bool = False
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    # the mean assumption constant is called ``c`` in the schedules
    @property
    def c(self) -> float | None:
        return self.var_bound


def _neighborhood(dist, center, radius, step):
    lo, hi = center - radius, center + radius
    clipped = lo < dist.support_lo or hi > dist.support_hi
    lo = max(lo, dist.support_lo)
    hi = min(hi, dist.support_hi)
    count = int(min(max(math.ceil((hi - lo) / step), 2), 400000)) + 1
    x = np.linspace(lo, hi, count)
    # stay strictly inside the support where the density is defined
    x = x[(x > dist.support_lo) & (x < dist.support_hi)]
    if x.size == 0:
        x = np.array([center])
    return x, clipped


def _density_window(dist, center, eps):
    near, clip1 = _neighborhood(dist, center, 10 * eps, eps / 100)
    wide, clip2 = _neighborhood(dist, center, 10 * math.sqrt(eps), eps / 100)
    floor = float(np.min(dist.pdf(near)))
    ceiling = float(np.max(dist.pdf(near)))
    slope = float(np.max(np.abs(dist.pdf_derivative(wide))))
    return floor, ceiling, slope, clip1 or clip2


def check_assumptions(dist: Distribution, fn: FunctionalSpec, eps: float) -> AssumptionParams:
    """Tightest regularity constants on the ``10 eps`` / ``10 sqrt(eps)`` windows.

    Windows are intersected with the support; ``clipped_to_support`` records
    when that happened.  Violated clauses are listed in ``violations`` rather
    than raised.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    radius = (10 * eps, 10 * math.sqrt(eps))
    violations: list[str] = []

    if fn.kind == "mean":
        var = float(dist.variance())
        if not math.isfinite(var):
            violations.append("Var[X] <= c: variance is not finite")
        return AssumptionParams(var_bound=var, validity_radius=radius, violations=tuple(violations))

    if fn.kind == "maximum":
        return _check_maximum(dist, eps, radius)

    if not dist.has_density:
        return AssumptionParams(validity_radius=radius,
                                violations=("F'(x) >= c1: distribution has no density",))

    if fn.kind == "quantile":
        q = float(dist.quantile(fn.alpha))
        c1, _, c2, clipped = _density_window(dist, q, eps)
        if not c1 > 0:
            violations.append("F'(x) >= c1: density vanishes near the quantile")
        if not math.isfinite(c2):
            violations.append("|F''(x)| <= c2: density slope unbounded near the quantile")
        return AssumptionParams(c1=c1, c2=c2, validity_radius=radius,
                                clipped_to_support=clipped, violations=tuple(violations))

    # trimmed mean
    qa, qb = float(dist.quantile(fn.alpha1)), float(dist.quantile(fn.alpha2))
    fa, ca, sa, clip_a = _density_window(dist, qa, eps)
    fb, cb, sb, clip_b = _density_window(dist, qb, eps)
    c0 = float(dist.second_moment())
    c1, c2, c3 = min(fa, fb), max(sa, sb), max(ca, cb)
    c4, c5 = max(abs(qa), abs(qb)), min(abs(qa), abs(qb))
    if not math.isfinite(c0):
        violations.append("E[X^2] <= c0: second moment not finite")
    if not c1 > 0:
        violations.append("F'(x) >= c1: density vanishes near a cut point")
    if not math.isfinite(c2):
        violations.append("|F''(x)| <= c2: density slope unbounded near a cut point")
    if not c5 > 0:
        violations.append("|F^-1(alpha)| >= c5 > 0: a cut point sits at zero")
    return AssumptionParams(c0=c0, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, validity_radius=radius,
                            clipped_to_support=clip_a or clip_b, violations=tuple(violations))


def _check_maximum(dist, eps, radius):
    top = dist.support_hi
    if not math.isfinite(top):
        return AssumptionParams(validity_radius=radius,
                                violations=("bounded support: upper support is infinite",))
    if isinstance(dist, BetaTail) and dist.cut == 0.0:
        return AssumptionParams(c1=1.0, c2=1.0, beta=float(dist.beta), validity_radius=radius)
    if isinstance(dist, Uniform):
        c = 1.0 / (dist.hi - dist.lo)
        return AssumptionParams(c1=c, c2=c, beta=1.0, validity_radius=radius)
    span = min(10 * eps, top - dist.support_lo)
    if not span > 0:
        return AssumptionParams(validity_radius=radius,
                                violations=("beta-regularity: no mass below the maximum",))
    t = np.geomspace(span / 1000, span, 400)
    tail = 1.0 - np.asarray(dist.cdf(top - t))
    if np.any(tail <= 0):
        return AssumptionParams(validity_radius=radius,
                                violations=("beta-regularity: tail mass vanishes near the maximum",))
    beta = float(np.polyfit(np.log(t), np.log(tail), 1)[0])
    ratio = tail / t ** beta
    return AssumptionParams(c1=float(ratio.min()), c2=float(ratio.max()), beta=beta,
                            validity_radius=radius)
