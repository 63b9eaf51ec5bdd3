"""Brute-force price-grid certification kernels.

For every point of a price grid these kernels compute each agent's demand set
from precomputed null-equivalent levels and test every subset of real objects
for the four Hall-type conditions.  Levels arrive as integers (exact rationals
scaled by a common denominator), so comparisons stay exact.

Two interchangeable back ends exist: a numba ``@njit`` loop and a vectorised
numpy version.  ``WALRAS_KERNELS=numpy`` forces the numpy path; the default is
numba when it imports.
"""

from __future__ import annotations

import os

import numpy as np

# result bits per grid point
NO_OVER = 1
NO_WEAK_UNDER = 2
NO_UNDER = 4
NO_WEAK_OVER = 8
ALL_FLAGS = NO_OVER | NO_WEAK_UNDER | NO_UNDER | NO_WEAK_OVER

try:  # pragma: no cover - exercised through whichever backend is active
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False


def backend() -> str:
    choice = os.environ.get("WALRAS_KERNELS", "").strip().lower()
    if choice == "numpy" or not HAS_NUMBA:
        return "numpy"
    return "numba"


def _popcounts(m: int) -> np.ndarray:
    return np.array([bin(s).count("1") for s in range(1 << m)], dtype=np.int64)


def grid_flags_numpy(levels: np.ndarray, size: int) -> np.ndarray:
    """Condition bits for all ``size**m`` grid points (row-major, object 1 slowest).

    ``levels[i, a, g]`` is agent ``i``'s null-equivalent level for object
    ``a + 1`` priced at grid index ``g``; the null object sits at level 0.
    """
    n, m, _ = levels.shape
    idx = np.indices((size,) * m).reshape(m, -1)  # (m, P)
    npts = idx.shape[1]
    lv = np.empty((n, m, npts), dtype=levels.dtype)
    for a in range(m):
        lv[:, a, :] = levels[:, a, idx[a]]
    best = np.minimum(lv.min(axis=1), 0)  # (n, P)
    masks = (best == 0).astype(np.int64)  # bit 0: null object demanded
    for a in range(m):
        masks |= (lv[:, a, :] == best).astype(np.int64) << (a + 1)
    positive = np.zeros(npts, dtype=np.int64)
    for a in range(m):
        positive |= (idx[a] > 0).astype(np.int64) << (a + 1)
    pop = _popcounts(m)
    flags = np.full(npts, ALL_FLAGS, dtype=np.int64)
    for s in range(1, 1 << m):
        sm = s << 1
        size_s = pop[s]
        inside = ((masks & ~sm) == 0).sum(axis=0)
        touch = ((masks & sm) != 0).sum(axis=0)
        priced = (positive & sm) == sm
        flags &= ~np.where(inside > size_s, NO_OVER, 0)
        flags &= ~np.where(inside >= size_s, NO_WEAK_OVER, 0)
        flags &= ~np.where(priced & (touch <= size_s), NO_WEAK_UNDER, 0)
        flags &= ~np.where(priced & (touch < size_s), NO_UNDER, 0)
    return flags


if HAS_NUMBA:

    @njit(cache=True)
    def _grid_flags_jit(levels, size):  # pragma: no cover - compiled
        n, m, _ = levels.shape
        npts = size ** m
        flags = np.empty(npts, dtype=np.int64)
        masks = np.empty(n, dtype=np.int64)
        coord = np.zeros(m, dtype=np.int64)
        for pt in range(npts):
            rem = pt
            for a in range(m - 1, -1, -1):
                coord[a] = rem % size
                rem //= size
            positive = 0
            for a in range(m):
                if coord[a] > 0:
                    positive |= 1 << (a + 1)
            for i in range(n):
                best = 0
                for a in range(m):
                    v = levels[i, a, coord[a]]
                    if v < best:
                        best = v
                mk = 1 if best == 0 else 0
                for a in range(m):
                    if levels[i, a, coord[a]] == best:
                        mk |= 1 << (a + 1)
                masks[i] = mk
            f = 15
            for s in range(1, 1 << m):
                sm = s << 1
                size_s = 0
                t = s
                while t:
                    size_s += t & 1
                    t >>= 1
                inside = 0
                touch = 0
                for i in range(n):
                    if masks[i] & ~sm == 0:
                        inside += 1
                    if masks[i] & sm != 0:
                        touch += 1
                if inside > size_s:
                    f &= ~1
                if inside >= size_s:
                    f &= ~8
                if positive & sm == sm:
                    if touch <= size_s:
                        f &= ~2
                    if touch < size_s:
                        f &= ~4
            flags[pt] = f
        return flags


def grid_flags_numba(levels: np.ndarray, size: int) -> np.ndarray:
    if not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    return _grid_flags_jit(np.ascontiguousarray(levels, dtype=np.int64), size)


def grid_flags(levels: np.ndarray, size: int) -> np.ndarray:
    if backend() == "numba" and levels.dtype == np.int64:
        return grid_flags_numba(levels, size)
    return grid_flags_numpy(levels, size)
