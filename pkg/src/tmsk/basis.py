"""Hierarchical hat basis of a TM kernel's RKHS.

The functions ``phi_{l,i}`` are orthogonal in the RKHS, equal 1 at their own
node ``c_{l,i}`` and vanish at every other node of level ``<= l``.  They give
closed forms for truncated kernel expansions and posterior variances, which
the test-suite uses as an oracle for the sparse inversion routines.  Nothing
here sits on the prediction path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._dyadic import hat_norm_sq, node
from .designs import LevelIndex, TruncatedSparseGrid, level_vectors
from .errors import InputError, ResourceError
from .kernels import GaussMarkov1D, TMKernel

__all__ = [
    "hat_1d",
    "HatFunction1D",
    "TensorHat",
    "phi_eval",
    "rkhs_norm_sq",
    "kernel_expansion_partial",
    "posterior_variance_oracle",
    "ENUMERATION_BUDGET",
]

ENUMERATION_BUDGET = 2_000_000


def hat_1d(kern: GaussMarkov1D, l, i, x):
    """Evaluate the one-dimensional hat ``phi_{l,i}`` at ``x`` (broadcasting)."""
    l = np.asarray(l, dtype=np.int64)
    i = np.asarray(i, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    a, c, b = node(l, i - 1), node(l, i), node(l, i + 1)
    left = (x > a) & (x <= c)
    right = (x > c) & (x < b)
    # placeholders keep the unused branch finite
    xl = np.where(left, x, c)
    xr = np.where(right, x, c)
    vl = kern.cross(a, xl) / kern.cross(a, c)
    vr = kern.cross(xr, b) / kern.cross(c, b)
    return np.where(left, vl, np.where(right, vr, 0.0))


@dataclass(frozen=True)
class HatFunction1D:
    kern: GaussMarkov1D
    l: int
    i: int

    def __post_init__(self):
        if self.l < 1 or self.i < 1 or self.i % 2 == 0 or self.i >= 2**self.l:
            raise InputError(f"invalid level/index ({self.l}, {self.i})")

    @property
    def support(self) -> tuple:
        return ((self.i - 1) * 2.0**-self.l, (self.i + 1) * 2.0**-self.l)

    @property
    def center(self) -> float:
        return self.i * 2.0**-self.l

    def __call__(self, x):
        return hat_1d(self.kern, self.l, self.i, x)


@dataclass(frozen=True)
class TensorHat:
    tm: TMKernel
    l: tuple
    i: tuple

    def __post_init__(self):
        d = self.tm.dim
        if len(self.l) != d or len(self.i) != d:
            raise InputError("level/index length does not match kernel dimension")
        for lj, ij in zip(self.l, self.i):
            if lj < 1 or ij < 1 or ij % 2 == 0 or ij >= 2**lj:
                raise InputError(f"invalid multi-index l={self.l}, i={self.i}")

    @property
    def factors(self) -> list:
        return [HatFunction1D(k, lj, ij) for k, lj, ij in zip(self.tm.components, self.l, self.i)]

    @property
    def center(self) -> tuple:
        return LevelIndex(tuple(self.l), tuple(self.i)).point

    @property
    def rkhs_norm_sq(self) -> float:
        return rkhs_norm_sq(self.tm, self.l, self.i)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for j, kern in enumerate(self.tm.components):
            out = out * hat_1d(kern, self.l[j], self.i[j], x[..., j])
        return out


def phi_eval(h: TensorHat, x) -> float:
    """Value of the tensor hat at a single point of the unit cube."""
    v = h(np.asarray(x, dtype=float))
    return float(v) if np.ndim(v) == 0 else v


def rkhs_norm_sq(tm: TMKernel, l, i) -> float:
    return float(hat_norm_sq(tm, [l], [i])[0])


def _all_levels(d: int, cap: int) -> np.ndarray:
    count = math.comb(cap, d) if cap >= d else 0
    if count > ENUMERATION_BUDGET:
        raise ResourceError(f"{count} level vectors with |l| <= {cap} exceed the budget")
    rows = [l for s in range(d, cap + 1) for l in level_vectors(d, s)]
    return np.asarray(rows, dtype=np.int64).reshape(-1, d)


def _covering_index(levels, x):
    # odd i whose open support ((i-1)2^-l, (i+1)2^-l) may contain x
    k = np.floor(x[None, :] * np.exp2(levels - 1)).astype(np.int64)
    return 2 * k + 1


def _active_terms(tm, x, y, cap):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if cap < tm.dim:
        raise InputError(f"max_total_level must be >= d={tm.dim}")
    levels = _all_levels(tm.dim, cap)
    ix = _covering_index(levels, x)
    iy = _covering_index(levels, y)
    same = np.all(ix == iy, axis=1)
    levels, ix = levels[same], ix[same]
    ix = np.minimum(ix, (np.int64(1) << levels) - 1)
    vx = np.ones(levels.shape[0])
    vy = np.ones(levels.shape[0])
    for j, kern in enumerate(tm.components):
        vx = vx * hat_1d(kern, levels[:, j], ix[:, j], x[j])
        vy = vy * hat_1d(kern, levels[:, j], ix[:, j], y[j])
    keep = (vx != 0) & (vy != 0)
    levels, ix, vx, vy = levels[keep], ix[keep], vx[keep], vy[keep]
    return levels, ix, vx * vy / hat_norm_sq(tm, levels, ix)


def kernel_expansion_partial(tm: TMKernel, x, y, max_total_level: int) -> float:
    """Partial sum of the orthogonal kernel expansion over ``|l| <= max_total_level``."""
    _, _, terms = _active_terms(tm, x, y, max_total_level)
    return float(np.sum(terms))


def posterior_variance_oracle(tm: TMKernel, grid: TruncatedSparseGrid, x,
                              max_total_level: int) -> float:
    """Truncated noiseless posterior variance at ``x`` given exact values on ``grid``.

    Sums the squared basis terms whose nodes are *not* in the grid; a lower bound
    of the exact value that increases to it with the cap.
    """
    if grid.d != tm.dim:
        raise InputError("grid and kernel dimensions differ")
    if max_total_level < grid.tau + grid.d:
        raise InputError(f"max_total_level must be >= tau + d = {grid.tau + grid.d}")
    levels, ix, terms = _active_terms(tm, x, x, max_total_level)
    top = grid.tau + grid.d
    inside = np.zeros(terms.shape[0], dtype=bool)
    for r in np.flatnonzero(levels.sum(axis=1) <= top):
        key = LevelIndex(tuple(levels[r].tolist()), tuple(ix[r].tolist()))
        inside[r] = key in grid.index_map
    return float(np.sum(terms[~inside]))
