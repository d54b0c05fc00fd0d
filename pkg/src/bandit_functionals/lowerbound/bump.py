"""Antisymmetric polynomial bumps with vanishing low-order moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly

from ..errors import SingularSystem


@lru_cache(maxsize=None)
def bump_coefficients(k: int) -> tuple[Fraction, ...]:
    """Exact coefficients ``a_1..a_{k+2}`` of ``h1(x) = sum a_i x^i`` on ``[0, 1]``.

    They solve ``sum a_i = 0``, ``sum a_i / (i + 1) = 1`` and
    ``sum a_i / (2j + i) = 0`` for ``j = 1..k``.  Extending ``h1`` oddly to
    ``[-1, 1]`` gives a bump whose moments of order ``0..2k`` all vanish.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    size = k + 2
    rows = [[sympy.Integer(1)] * size, [sympy.Rational(1, i + 1) for i in range(1, size + 1)]]
    rows += [[sympy.Rational(1, 2 * j + i) for i in range(1, size + 1)] for j in range(1, k + 1)]
    A = sympy.Matrix(rows)
    rhs = sympy.Matrix([0, 1] + [0] * k)
    if A.det() == 0:
        raise SingularSystem(f"moment system is singular for k={k}")
    sol = A.LUsolve(rhs)
    return tuple(Fraction(int(v.p), int(v.q)) for v in sol)


@dataclass(frozen=True)
class BumpSpec:
    """Scaled bump ``h(x) = sqrt(eps) h0(x / sqrt(eps))`` supported on ``[-sqrt(eps), sqrt(eps)]``.

    ``h0(x) = sign(x) h1(|x|)``; the positive half carries mass ``eps``.
    """

    k: int
    eps: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def exact_coefficients(self) -> tuple[Fraction, ...]:
        return bump_coefficients(self.k)

    @cached_property
    def coeffs(self) -> np.ndarray:
        """Float coefficients of ``h1`` in increasing powers, constant term included."""
        return np.array([0.0] + [float(a) for a in self.exact_coefficients])

    @cached_property
    def lipschitz(self) -> float:
        """``b = sum i |a_i|``, a Lipschitz constant of ``h0`` and bound on ``|h0|``."""
        return float(sum(i * abs(a) for i, a in enumerate(self.exact_coefficients, start=1)))

    @cached_property
    def peak(self) -> float:
        """``max |h1|`` on ``[0, 1]`` (so ``max |h| = peak * sqrt(eps)``)."""
        crit = npoly.polyroots(npoly.polyder(self.coeffs))
        crit = crit[np.isreal(crit)].real
        pts = np.concatenate([[0.0, 1.0], crit[(crit > 0) & (crit < 1)]])
        return float(np.max(np.abs(npoly.polyval(pts, self.coeffs))))

    @cached_property
    def slope_peak(self) -> float:
        """``max |h1'|`` on ``[0, 1]``, the exact Lipschitz constant of ``h0``."""
        d1 = npoly.polyder(self.coeffs)
        crit = npoly.polyroots(npoly.polyder(d1))
        crit = crit[np.isreal(crit)].real
        pts = np.concatenate([[0.0, 1.0], crit[(crit > 0) & (crit < 1)]])
        return float(np.max(np.abs(npoly.polyval(pts, d1))))

    @property
    def half_width(self) -> float:
        return math.sqrt(self.eps)

    def h0(self, z):
        z = np.asarray(z, dtype=float)
        inside = np.abs(z) <= 1
        val = np.sign(z) * npoly.polyval(np.minimum(np.abs(z), 1.0), self.coeffs)
        return np.where(inside, val, 0.0)

    def h(self, x):
        w = self.half_width
        return w * self.h0(np.asarray(x, dtype=float) / w)

    def derivative(self, x):
        """``h'(x) = h0'(x / sqrt(eps))``; ``h0'`` is even."""
        z = np.asarray(x, dtype=float) / self.half_width
        inside = np.abs(z) <= 1
        val = npoly.polyval(np.minimum(np.abs(z), 1.0), npoly.polyder(self.coeffs))
        return np.where(inside, val, 0.0)

    def integral(self, x):
        """``H(x) = int_{-inf}^x h``; equals ``eps (P(|z|) - 1)`` inside the support."""
        w = self.half_width
        z = np.asarray(x, dtype=float) / w
        anti = npoly.polyint(self.coeffs)
        val = self.eps * (npoly.polyval(np.minimum(np.abs(z), 1.0), anti) - 1.0)
        return np.where(np.abs(z) <= 1, val, 0.0)

    def exact_moment(self, order: int) -> Fraction:
        """``int z^order h0(z) dz`` over ``[-1, 1]`` in exact arithmetic."""
        if order % 2 == 0:
            return Fraction(0)
        return 2 * sum(a / (order + i + 1) for i, a in enumerate(self.exact_coefficients, start=1))

    def moment(self, order: int, nodes: int = 64) -> float:
        """``int x^order h(x) dx`` by Gauss-Legendre quadrature on each half."""
        z, wts = np.polynomial.legendre.leggauss(nodes)
        w = self.half_width
        total = 0.0
        for a, b in ((-w, 0.0), (0.0, w)):
            x = 0.5 * (b - a) * z + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.sum(wts * x ** order * self.h(x)))
        return total

    def positive_mass(self, nodes: int = 64) -> float:
        """``int_0^inf h`` by Gauss-Legendre quadrature."""
        z, wts = np.polynomial.legendre.leggauss(nodes)
        w = self.half_width
        x = 0.5 * w * (z + 1.0)
        return 0.5 * w * float(np.sum(wts * self.h(x)))
