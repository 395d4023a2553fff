"""Dyadic component designs, classical sparse grids and truncated sparse grids.

A design point is addressed by its hierarchical multi-index ``(l, i)``: level
``l_j >= 1`` and odd ``1 <= i_j <= 2^l_j - 1`` per dimension, located at
``i_j * 2^-l_j``.  All linear-algebra code agrees on one row order: base points
by ascending ``|l|``, then lexicographically in ``(l, i)``; extra points last,
in selection order.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import InputError, SizeOverflowError

__all__ = [
    "MAX_LEVEL",
    "MAX_SG_DIM",
    "MAX_SG_TAU",
    "LevelIndex",
    "TruncatedSparseGrid",
    "component_design",
    "sg_size",
    "level_vectors",
    "classical_sg",
    "sg_increment",
    "find_tau",
    "truncated_sg",
    "locate_interval",
    "write_grid_csv",
    "read_grid_csv",
]

MAX_LEVEL = 50
MAX_SG_DIM = 64
MAX_SG_TAU = 30


class LevelIndex(NamedTuple):
    l: tuple
    i: tuple

    @property
    def point(self) -> tuple:
        return tuple(ii * 2.0**-ll for ll, ii in zip(self.l, self.i))

    @property
    def total_level(self) -> int:
        return sum(self.l)


def _check_level(l: int) -> None:
    if l < 1:
        raise InputError(f"level must be >= 1, got {l}")
    if l > MAX_LEVEL:
        raise SizeOverflowError(f"level {l} exceeds the exact-dyadic cap {MAX_LEVEL}")


def component_design(l: int) -> np.ndarray:
    """Nested dyadic design ``{i 2^-l : 1 <= i <= 2^l - 1}`` in ascending order."""
    _check_level(l)
    return np.arange(1, 2**l, dtype=np.float64) * 2.0**-l


def sg_size(d: int, tau: int) -> int:
    """Exact number of points of the classical sparse grid of level ``tau``."""
    if d < 1 or tau < 1:
        raise InputError(f"need d >= 1 and tau >= 1, got d={d}, tau={tau}")
    if d > MAX_SG_DIM or tau > MAX_SG_TAU:
        raise SizeOverflowError(
            f"(d={d}, tau={tau}) beyond the documented limit d <= {MAX_SG_DIM}, tau <= {MAX_SG_TAU}"
        )
    return sum(2**ell * math.comb(ell + d - 1, d - 1) for ell in range(tau))


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    # positive compositions of ``total`` in lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def level_vectors(d: int, total: int) -> list:
    """All level multi-indices ``l`` with ``|l| == total``, lexicographic."""
    if total < d:
        return []
    return list(_compositions(total, d))


def _rho(l: Sequence[int]) -> np.ndarray:
    axes = [np.arange(1, 2**lj, 2, dtype=np.int64) for lj in l]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _layer(d: int, total: int):
    levels, indices = [], []
    for l in level_vectors(d, total):
        for lj in l:
            _check_level(lj)
        idx = _rho(l)
        levels.append(np.broadcast_to(np.asarray(l, dtype=np.int64), idx.shape))
        indices.append(idx)
    if not levels:
        return np.zeros((0, d), np.int64), np.zeros((0, d), np.int64)
    return np.concatenate(levels), np.concatenate(indices)


@lru_cache(maxsize=64)
def _layer_cached(d: int, total: int):
    lv, ix = _layer(d, total)
    lv.setflags(write=False)
    ix.setflags(write=False)
    return lv, ix


def _sg_arrays(d: int, tau: int):
    parts = [_layer_cached(d, s) for s in range(d, tau + d)]
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


def _to_level_index(levels, indices) -> list:
    return [LevelIndex(tuple(int(v) for v in l), tuple(int(v) for v in i))
            for l, i in zip(levels.tolist(), indices.tolist())]


def classical_sg(d: int, tau: int) -> list:
    """Multi-indices of the classical sparse grid of level ``tau`` in canonical order."""
    sg_size(d, tau)  # argument and overflow checks
    lv, ix = _sg_arrays(d, tau)
    return _to_level_index(lv, ix)


def sg_increment(d: int, tau: int) -> list:
    """Points added going from level ``tau - 1`` to ``tau`` (all ``|l| = tau + d - 1``)."""
    sg_size(d, tau)
    lv, ix = _layer_cached(d, tau + d - 1)
    return _to_level_index(lv, ix)


def find_tau(d: int, n: int) -> int:
    """Largest ``tau`` with ``sg_size(d, tau) <= n``."""
    if n < 1:
        raise InputError(f"grid size must be >= 1, got {n}")
    tau = 1
    while sg_size(d, tau + 1) <= n:
        tau += 1
    return tau


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TruncatedSparseGrid:
    """A classical SG of level ``tau`` plus ``n - n_base`` points of the next increment.

    ``levels``/``indices`` are ``(n, d)`` integer arrays in canonical row order;
    ``points`` holds the exact dyadic coordinates.
    """

    d: int
    tau: int
    levels: np.ndarray
    indices: np.ndarray
    n_base: int
    seed: Optional[int] = None
    index_map: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "levels", _readonly(np.asarray(self.levels, dtype=np.int64)))
        object.__setattr__(self, "indices", _readonly(np.asarray(self.indices, dtype=np.int64)))
        keys = zip(map(tuple, self.levels.tolist()), map(tuple, self.indices.tolist()))
        imap = {LevelIndex(l, i): r for r, (l, i) in enumerate(keys)}
        if len(imap) != self.levels.shape[0]:
            raise InputError("duplicate design points in grid")
        object.__setattr__(self, "index_map", imap)

    @property
    def n(self) -> int:
        return int(self.levels.shape[0])

    @property
    def n_extra(self) -> int:
        return self.n - self.n_base

    @property
    def points(self) -> np.ndarray:
        return self.indices * np.exp2(-self.levels.astype(np.float64))

    @property
    def base(self) -> list:
        return _to_level_index(self.levels[: self.n_base], self.indices[: self.n_base])

    @property
    def extra(self) -> list:
        return _to_level_index(self.levels[self.n_base:], self.indices[self.n_base:])

    @property
    def is_classical(self) -> bool:
        return self.n_extra == 0

    def row_of(self, l, i) -> int:
        return self.index_map[LevelIndex(tuple(l), tuple(i))]

    def numerators(self, level: int) -> np.ndarray:
        """Integer coordinates ``x * 2^level`` (exact; ``level`` >= every l_j)."""
        return self.indices << (level - self.levels)

    def prefix(self, n: int) -> "TruncatedSparseGrid":
        """Sub-grid made of the first ``n`` rows (itself a valid TSG when n >= n_base)."""
        if not (self.n_base <= n <= self.n):
            raise InputError(f"prefix size {n} outside [{self.n_base}, {self.n}]")
        return TruncatedSparseGrid(self.d, self.tau, self.levels[:n], self.indices[:n],
                                   self.n_base, self.seed)


def truncated_sg(d: int, n: int, seed: Optional[Union[int, np.random.Generator]] = None
                 ) -> TruncatedSparseGrid:
    """Build a TSG of exactly ``n`` points.

    Without ``seed`` the first extra points of the next increment in canonical
    order are taken.  With a seed the increment is shuffled by a random
    permutation and its head is used (RTSG); equal seeds therefore give nested
    designs as ``n`` grows.
    """
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    tau = find_tau(d, n)
    lv, ix = _sg_arrays(d, tau)
    n_base = lv.shape[0]
    n_extra = n - n_base
    seed_val = None
    if n_extra > 0:
        inc_l, inc_i = _layer_cached(d, tau + d)
        if seed is None:
            pick = np.arange(n_extra)
        else:
            rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
            seed_val = None if isinstance(seed, np.random.Generator) else int(seed)
            pick = rng.permutation(inc_l.shape[0])[:n_extra]
        lv = np.concatenate([lv, inc_l[pick]])
        ix = np.concatenate([ix, inc_i[pick]])
    elif seed is not None and not isinstance(seed, np.random.Generator):
        seed_val = int(seed)
    return TruncatedSparseGrid(d, tau, lv, ix, n_base, seed_val)


def locate_interval(points: Sequence[float], x: float) -> int:
    """Index ``i*`` in ``0..n`` with ``points[i*-1] <= x < points[i*]`` (1-based ends)."""
    return bisect_right(points, x)


def write_grid_csv(grid: TruncatedSparseGrid, path, domain=None) -> None:
    """Write ``l_1..l_d, i_1..i_d, x_1..x_d`` rows in canonical order."""
    d = grid.d
    pts = grid.points if domain is None else domain.from_unit(grid.points)
    header = ([f"l_{j + 1}" for j in range(d)] + [f"i_{j + 1}" for j in range(d)]
              + [f"x_{j + 1}" for j in range(d)])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for l, i, x in zip(grid.levels.tolist(), grid.indices.tolist(), pts.tolist()):
            w.writerow(l + i + [repr(float(v)) for v in x])


def read_grid_csv(path) -> TruncatedSparseGrid:
    """Rebuild a TSG from :func:`write_grid_csv` output, validating its structure."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty grid file")
    header = rows[0]
    d = sum(1 for h in header if h.startswith("l_"))
    if d == 0 or len(header) != 3 * d:
        raise InputError(f"{path}: header must be l_1..l_d,i_1..i_d,x_1..x_d")
    body = [r for r in rows[1:] if r]
    try:
        lv = np.array([[int(v) for v in r[:d]] for r in body], dtype=np.int64).reshape(-1, d)
        ix = np.array([[int(v) for v in r[d:2 * d]] for r in body], dtype=np.int64).reshape(-1, d)
    except ValueError as exc:
        raise InputError(f"{path}: non-integer level/index entry") from exc
    n = lv.shape[0]
    if n == 0:
        raise InputError(f"{path}: grid has no points")
    if np.any(lv < 1) or np.any(ix % 2 == 0) or np.any(ix < 1) or np.any(ix >= (1 << lv)):
        raise InputError(f"{path}: invalid (l, i) multi-index")
    tau = find_tau(d, n)
    n_base = sg_size(d, tau)
    base_l, base_i = _sg_arrays(d, tau)
    if not (np.array_equal(lv[:n_base], base_l) and np.array_equal(ix[:n_base], base_i)):
        raise InputError(f"{path}: leading rows are not the canonical level-{tau} sparse grid")
    if np.any(lv[n_base:].sum(axis=1) != tau + d):
        raise InputError(f"{path}: extra rows must lie in the level-{tau + 1} increment")
    return TruncatedSparseGrid(d, tau, lv, ix, n_base)
