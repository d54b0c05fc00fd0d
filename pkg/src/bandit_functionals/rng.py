"""Stateless counter-based random streams.

Every random quantity is a pure function of ``(seed, stream tag, counters)``,
so replays and parallel trials never depend on call order.

Noise for arm ``a`` is a standard Brownian motion ``W_a`` evaluated at integer
times; pull ``j`` of that arm observes the increment ``W_a(j + 1) - W_a(j)``.
The path is generated by Levy's midpoint construction inside blocks of
``2**LEVELS`` pulls, so any partial sum ``W_a(t)`` costs ``O(LEVELS)`` hashes
regardless of ``t``.  Increments are i.i.d. N(0, 1) and each one is fixed by
``(seed, arm, pull index)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))

TAG_ARMS = 0xA5A5_0001
TAG_NOISE = 0xA5A5_0002

LEVELS = 20
BLOCK = 1 << LEVELS


def mix64(z):
    """SplitMix64 finalizer, elementwise on uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def derive_key(seed, *counters):
    """Fold integer counters into a 64-bit key."""
    key = mix64(np.uint64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))
    for c in counters:
        c = np.asarray(c).astype(np.uint64)
        with np.errstate(over="ignore"):
            key = mix64(key ^ mix64(c * _GOLDEN + np.uint64(1)))
    return key


def to_unit(h):
    """Map uint64 hashes to floats strictly inside (0, 1)."""
    return ((h >> _S11).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def uniforms(seed, tag, index):
    return to_unit(derive_key(seed, tag, index))


def normals(seed, tag, *counters):
    return ndtri(to_unit(derive_key(seed, tag, *counters)))


def brownian(seed, arms, t):
    """Evaluate ``W_arm(t)`` for arrays of arm ids and nonnegative times."""
    arms = np.asarray(arms, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    arms, t = np.broadcast_arrays(arms, t)
    arms = arms.ravel()
    t = t.ravel()
    akey = derive_key(seed, TAG_NOISE, arms)
    block = t >> LEVELS
    offset = t & (BLOCK - 1)
    sqrt_block = float(np.sqrt(BLOCK))

    base = np.zeros(t.shape)
    if block.size and block.max() > 0:
        for b in range(int(block.max())):
            sel = block > b
            base[sel] += sqrt_block * ndtri(to_unit(_node(akey[sel], LEVELS + 1, b)))

    lo = np.zeros(t.shape, dtype=np.int64)
    size = BLOCK
    w_lo = np.zeros(t.shape)
    w_hi = sqrt_block * ndtri(to_unit(_node(akey, LEVELS + 1, block)))
    for level in range(LEVELS):
        half = size >> 1
        z = ndtri(to_unit(_node(akey, level, (block << LEVELS) + lo)))
        w_mid = 0.5 * (w_lo + w_hi) + 0.5 * np.sqrt(size) * z
        right = offset >= lo + half
        lo = np.where(right, lo + half, lo)
        w_lo = np.where(right, w_mid, w_lo)
        w_hi = np.where(right, w_hi, w_mid)
        size = half
    return base + w_lo


def _node(akey, level, node):
    node = np.asarray(node).astype(np.uint64)
    with np.errstate(over="ignore"):
        h = mix64(akey + _GOLDEN * np.uint64(level + 1))
        return mix64(h ^ mix64(node * _GOLDEN + np.uint64(7)))
