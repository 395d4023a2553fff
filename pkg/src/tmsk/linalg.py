"""Exact sparse inverses of TM-kernel matrices and the factorizations built on them.

Covers one-dimensional grids (tridiagonal), lattices (Kronecker products),
classical sparse grids (signed-binomial combination of lattice inverses) and
truncated sparse grids (block update with a diagonal corner).  All row
orderings follow :mod:`tmsk.designs`; lattices put the last dimension fastest.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.linalg import splu, spsolve_triangular

from ._dyadic import hat_norm_sq, node
from .designs import TruncatedSparseGrid, _sg_arrays, level_vectors, sg_size
from .errors import (
    InputError,
    KernelValidityError,
    NotPositiveDefiniteError,
    NumericalError,
    TMSKError,
)
from .kernels import GaussMarkov1D, TMKernel

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "SparseSymMatrix",
    "SparseVector",
    "LowerTriangularFactor",
    "inv_1d",
    "kinvk_1d",
    "inv_lattice",
    "kinvk_lattice",
    "inv_sg",
    "kinvk_sg",
    "kinvk_sg_batch",
    "inv_tsg",
    "sparsity_report",
    "sparse_cholesky",
    "solve_lower",
    "solve_upper",
    "write_matrix_market",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NumericPolicy:
    """Floating-point knobs shared by the sparse builders and the predictor.

    ``drop_rel``: entries with ``|v| <= drop_rel * max|v|`` are discarded after
    a signed accumulation.  ``cancel_rel``: entries that cancelled down to
    ``cancel_rel`` times the sum of the magnitudes that produced them are
    treated as exact zeros.  ``mse_slack``: negative MSEs down to
    ``-mse_slack`` (relative to the prior variance) are clamped to 0.
    """

    drop_rel: float = 1e-14
    cancel_rel: float = 64 * _EPS
    mse_slack: float = 1e-10
    dense_cap: int = 2000
    chunk: int = 256


DEFAULT_POLICY = NumericPolicy()


class SparseSymMatrix:
    """Symmetric sparse matrix stored once as its upper triangle.

    ``rows``, ``cols``, ``values`` hold the coordinates with ``row <= col`` in
    row-major order; ``csr`` is the symmetric completion used for products and
    factorizations.
    """

    def __init__(self, upper):
        U = sp.triu(sp.coo_matrix(upper), format="csr")
        U.sum_duplicates()
        U.eliminate_zeros()
        U.sort_indices()
        n = U.shape[0]
        if U.shape != (n, n):
            raise InputError(f"matrix must be square, got {U.shape}")
        coo = U.tocoo()
        self.n = n
        self.rows = coo.row.astype(np.int64)
        self.cols = coo.col.astype(np.int64)
        self.values = coo.data.astype(float)
        strict = sp.triu(U, k=1, format="csr")
        full = (U + strict.T).tocsr()
        full.sort_indices()
        self.csr = full
        for a in (self.rows, self.cols, self.values):
            a.setflags(write=False)

    @classmethod
    def from_full(cls, m) -> "SparseSymMatrix":
        """Build from a full symmetric matrix; only the upper triangle is read."""
        return cls(sp.triu(sp.csr_matrix(m)))

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        """Stored nonzeros counted with symmetric completion."""
        return int(self.csr.nnz)

    @property
    def density(self) -> float:
        return self.nnz / float(self.n) ** 2 if self.n else 0.0

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def tocsc(self):
        return self.csr.tocsc()

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def matvec(self, v):
        return self.csr @ np.asarray(v, dtype=float)

    def __matmul__(self, other):
        return self.csr @ other

    def is_stored(self, i: int, j: int) -> bool:
        i, j = (i, j) if i <= j else (j, i)
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        k = np.searchsorted(self.csr.indices[lo:hi], j)
        return bool(k < hi - lo and self.csr.indices[lo + k] == j)

    def get(self, i: int, j: int) -> float:
        return float(self.csr[i, j])

    def __repr__(self):
        return f"SparseSymMatrix(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True)
class SparseVector:
    n: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=float)
        if idx.shape != val.shape or idx.ndim != 1:
            raise InputError("indices and values must be equal-length vectors")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.n):
            raise InputError("sparse vector indices must be strictly increasing and in range")
        if not np.all(np.isfinite(val)):
            raise NumericalError("non-finite entry in sparse vector")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dense_column(cls, col) -> "SparseVector":
        col = sp.csc_matrix(col)
        col.sort_indices()
        return cls(col.shape[0], col.indices, col.data)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out

    def dot(self, v) -> float:
        return float(self.values @ np.asarray(v, dtype=float)[self.indices])


@dataclass(frozen=True)
class LowerTriangularFactor:
    """Sparse lower-triangular ``L`` with positive diagonal."""

    L: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def nnz(self) -> int:
        return int(self.L.nnz)

    def reconstruct(self):
        return (self.L @ self.L.T).tocsr()

    def solve_lower(self, rhs):
        return solve_lower(self, rhs)

    def solve_upper(self, rhs):
        return solve_upper(self, rhs)


# -- small helpers ---------------------------------------------------------


def _drop_mask(vals, abs_sums, policy, scale=None):
    vmax = np.max(np.abs(vals)) if scale is None and vals.size else scale
    a = np.abs(vals)
    return (a > policy.drop_rel * vmax) & (a > policy.cancel_rel * abs_sums)


def _accumulate(rows, cols, vals, shape, policy, per_column=False):
    """Sum duplicate coordinates and prune roundoff left by cancellations."""
    rows = np.concatenate(rows) if rows else np.zeros(0, np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, np.int64)
    vals = np.concatenate(vals) if vals else np.zeros(0)
    fmt = sp.csc_matrix if per_column else sp.csr_matrix
    total = fmt((vals, (rows, cols)), shape=shape)
    mags = fmt((np.abs(vals), (rows, cols)), shape=shape)
    total.sum_duplicates()
    mags.sum_duplicates()
    total.sort_indices()
    mags.sort_indices()
    # same sparsity pattern: both come from identical coordinate lists
    if per_column:
        counts = np.diff(total.indptr)
        absval = np.abs(total.data)
        colmax = np.zeros(shape[1])
        np.maximum.at(colmax, np.repeat(np.arange(shape[1]), counts), absval)
        scale = np.repeat(colmax, counts)
        keep = _drop_mask(total.data, mags.data, policy, scale=scale)
    else:
        keep = _drop_mask(total.data, mags.data, policy)
    total.data[~keep] = 0.0
    total.eliminate_zeros()
    return total


def _check_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError("design must be a non-empty one-dimensional array")
    if not np.all(np.isfinite(x)):
        raise InputError("design points must be finite")
    gaps = np.diff(x)
    if np.any(gaps == 0):
        raise InputError("duplicate design points")
    if np.any(gaps < 0):
        raise InputError("design points must be sorted ascending")
    return x


def _tridiag_parts(kern: GaussMarkov1D, x: np.ndarray):
    """Diagonal and off-diagonal of the inverse kernel matrix on sorted ``x``.

    With ``x_0 = -inf`` and ``x_{n+1} = +inf``::

        diag_i = cross(x_{i-1}, x_{i+1}) / (cross(x_{i-1}, x_i) cross(x_i, x_{i+1}))
        off_i  = -1 / cross(x_i, x_{i+1})

    which also covers n = 1 and n = 2.
    """
    ext = np.concatenate(([-np.inf], x, [np.inf]))
    gap = np.asarray(kern.cross(ext[:-1], ext[1:]), dtype=float)
    outer = np.asarray(kern.cross(ext[:-2], ext[2:]), dtype=float)
    bad = np.flatnonzero(~(gap > 0))
    if bad.size:
        k = int(bad[0])
        raise KernelValidityError(
            f"nonpositive cross term p(b)q(a) - p(a)q(b) between {ext[k]} and {ext[k + 1]}"
        )
    if not np.all(outer > 0):
        raise KernelValidityError("nonpositive cross term across a design point")
    return outer / (gap[:-1] * gap[1:]), -1.0 / gap[1:-1]


def _tridiag_csr(kern, x):
    diag, off = _tridiag_parts(kern, x)
    n = diag.size
    i = np.arange(n)
    rows = np.concatenate([i, i[:-1], i[1:]])
    cols = np.concatenate([i, i[1:], i[:-1]])
    vals = np.concatenate([diag, off, off])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _weights_1d(kern, lo_node, hi_node, x):
    """Interpolation weights of ``x`` on its bracketing nodes ``lo_node <= x < hi_node``."""
    den = kern.cross(lo_node, hi_node)
    return kern.cross(x, hi_node) / den, kern.cross(lo_node, x) / den


# -- one-dimensional grids -------------------------------------------------


def inv_1d(kern: GaussMarkov1D, points) -> SparseSymMatrix:
    """Tridiagonal inverse of the kernel matrix on sorted ``points``."""
    x = _check_points(points)
    return SparseSymMatrix(sp.triu(_tridiag_csr(kern, x)))


def _kinvk_1d_entries(kern, x, pts):
    n = len(pts)
    s = bisect_right(pts, x)
    lo = -np.inf if s == 0 else pts[s - 1]
    hi = np.inf if s == n else pts[s]
    w_lo, w_hi = _weights_1d(kern, lo, hi, x)
    out = []
    if s >= 1:
        out.append((s - 1, float(w_lo)))
    if s < n:
        out.append((s, float(w_hi)))
    return [(i, v) for i, v in out if v != 0.0]


def kinvk_1d(kern: GaussMarkov1D, points, x: float) -> SparseVector:
    """``K^{-1} k(x)`` on a one-dimensional grid; at most two nonzeros."""
    pts = _check_points(points)
    ent = _kinvk_1d_entries(kern, float(x), pts.tolist())
    return SparseVector(pts.size, [e[0] for e in ent], [e[1] for e in ent])


# -- lattices --------------------------------------------------------------


def _kron_all(mats):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def inv_lattice(tm: TMKernel, designs) -> SparseSymMatrix:
    """Kronecker product of the per-dimension tridiagonal inverses."""
    if len(designs) != tm.dim:
        raise InputError(f"{len(designs)} component designs for a d={tm.dim} kernel")
    mats = [_tridiag_csr(k, _check_points(x)) for k, x in zip(tm.components, designs)]
    return SparseSymMatrix(sp.triu(_kron_all(mats)))


def kinvk_lattice(tm: TMKernel, designs, x) -> SparseVector:
    """``K^{-1} k(x)`` on a lattice; at most ``2^d`` nonzeros."""
    if len(designs) != tm.dim:
        raise InputError(f"{len(designs)} component designs for a d={tm.dim} kernel")
    x = np.asarray(x, dtype=float)
    if x.shape != (tm.dim,):
        raise InputError(f"point must have shape ({tm.dim},)")
    pts = [_check_points(p).tolist() for p in designs]
    sizes = [len(p) for p in pts]
    strides = np.cumprod([1] + sizes[::-1])[:-1][::-1]
    per_dim = [_kinvk_1d_entries(k, float(x[j]), pts[j]) for j, k in enumerate(tm.components)]
    idx, val = [], []
    for combo in itertools.product(*per_dim):
        idx.append(int(sum(e[0] * s for e, s in zip(combo, strides))))
        val.append(math.prod(e[1] for e in combo))
    order = np.argsort(idx)
    n = int(np.prod(sizes))
    return SparseVector(n, np.asarray(idx, np.int64)[order], np.asarray(val)[order])


# -- classical sparse grids --------------------------------------------------


@dataclass(frozen=True)
class _Lattice:
    levels: tuple
    coeff: float
    rows: np.ndarray  # global SG row of each lattice point, last dimension fastest


def _encode(nums: np.ndarray, bits: int):
    if bits * nums.shape[1] <= 62:
        shifts = bits * np.arange(nums.shape[1] - 1, -1, -1, dtype=np.int64)
        return (nums << shifts).sum(axis=1)
    return [row.tobytes() for row in np.ascontiguousarray(nums)]


@lru_cache(maxsize=16)
def _sg_plan(d: int, tau: int):
    """Kernel-independent combination plan: lattices, signs and row maps."""
    n = sg_size(d, tau)
    levels, indices = _sg_arrays(d, tau)
    nums = indices << (tau - levels)
    keys = _encode(nums, tau)
    if isinstance(keys, list):
        lookup = {k: r for r, k in enumerate(keys)}
    else:
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
    top = tau + d - 1
    plan = []
    for total in range(max(tau, d), top + 1):
        coeff = (-1) ** (top - total) * math.comb(d - 1, top - total)
        for l in level_vectors(d, total):
            axes = [np.arange(1, 2**lj, dtype=np.int64) << (tau - lj) for lj in l]
            mesh = np.meshgrid(*axes, indexing="ij")
            lat = np.stack([m.ravel() for m in mesh], axis=1)
            k = _encode(lat, tau)
            if isinstance(k, list):
                rows = np.fromiter((lookup[v] for v in k), dtype=np.int64, count=len(k))
            else:
                pos = np.searchsorted(sorted_keys, k)
                rows = order[pos]
            rows.setflags(write=False)
            plan.append(_Lattice(tuple(l), float(coeff), rows))
    assert all(p.rows.max() < n for p in plan)
    return tuple(plan)


def _sg_inverse_csr(tm: TMKernel, d: int, tau: int, policy: NumericPolicy):
    if tm.dim != d:
        raise InputError(f"kernel dimension {tm.dim} != grid dimension {d}")
    n = sg_size(d, tau)
    plan = _sg_plan(d, tau)
    cache = {}

    def tri(j, lj):
        key = (j, lj)
        if key not in cache:
            pts = np.arange(1, 2**lj) * 2.0**-lj
            cache[key] = _tridiag_csr(tm.components[j], pts)
        return cache[key]

    rows, cols, vals = [], [], []
    for lat in plan:
        scale = lat.coeff
        mats = []
        for j, lj in enumerate(lat.levels):
            t = tri(j, lj)
            if lj == 1:
                scale *= t.data[0]
            else:
                mats.append(t)
        block = _kron_all(mats).tocoo() if mats else sp.coo_matrix(np.ones((1, 1)))
        rows.append(lat.rows[block.row])
        cols.append(lat.rows[block.col])
        vals.append(scale * block.data)
    return _accumulate(rows, cols, vals, (n, n), policy)


def inv_sg(tm: TMKernel, d: int, tau: int, policy: NumericPolicy = DEFAULT_POLICY
           ) -> SparseSymMatrix:
    """Inverse kernel matrix on the classical sparse grid of level ``tau``."""
    return SparseSymMatrix(sp.triu(_sg_inverse_csr(tm, d, tau, policy)))


def _dyadic_weights(kern, level: int, x: np.ndarray):
    """Batched 1-d interpolation data on the level-``level`` dyadic grid.

    Returns ``(lo_idx, w_lo, hi_idx, w_hi)``; invalid slots carry weight 0 and a
    clipped index.
    """
    size = (1 << level) - 1
    s = np.clip(np.floor(x * 2.0**level).astype(np.int64), 0, size)
    w_lo, w_hi = _weights_1d(kern, node(level, s), node(level, s + 1), x)
    w_lo = np.where(s >= 1, w_lo, 0.0)
    w_hi = np.where(s < size, w_hi, 0.0)
    return np.maximum(s - 1, 0), w_lo, np.minimum(s, size - 1), w_hi


def kinvk_sg_batch(tm: TMKernel, d: int, tau: int, X, policy: NumericPolicy = DEFAULT_POLICY):
    """``K^{-1} k(X)`` on the level-``tau`` sparse grid as an ``(n, m)`` CSC matrix."""
    if tm.dim != d:
        raise InputError(f"kernel dimension {tm.dim} != grid dimension {d}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != d:
        raise InputError(f"points must have {d} columns")
    n = sg_size(d, tau)
    m = X.shape[0]
    plan = _sg_plan(d, tau)
    cols = np.arange(m, dtype=np.int64)
    cache = {}

    def weights(j, lj):
        if (j, lj) not in cache:
            cache[(j, lj)] = _dyadic_weights(tm.components[j], lj, X[:, j])
        return cache[(j, lj)]

    rows_out, cols_out, vals_out = [], [], []
    for lat in plan:
        scalar = np.full(m, lat.coeff)
        slots, strides = [], []
        stride = 1
        for j in range(d - 1, -1, -1):
            lj = lat.levels[j]
            lo, wl, hi, wh = weights(j, lj)
            if lj == 1:
                scalar = scalar * (wl + wh)
            else:
                slots.append(((lo, wl), (hi, wh)))
                strides.append(stride)
            stride *= (1 << lj) - 1
        for combo in itertools.product(*slots):
            flat = np.zeros(m, dtype=np.int64)
            val = scalar
            for (idx, w), st in zip(combo, strides):
                flat = flat + idx * st
                val = val * w
            rows_out.append(lat.rows[flat])
            cols_out.append(cols)
            vals_out.append(val)
    return _accumulate(rows_out, cols_out, vals_out, (n, m), policy, per_column=True)


def kinvk_sg(tm: TMKernel, d: int, tau: int, x, policy: NumericPolicy = DEFAULT_POLICY
             ) -> SparseVector:
    """``K^{-1} k(x)`` on the classical sparse grid of level ``tau``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise InputError(f"point must have shape ({d},)")
    return SparseVector.from_dense_column(kinvk_sg_batch(tm, d, tau, x[None, :], policy))


# -- truncated sparse grids --------------------------------------------------


def _tsg_blocks(tm: TMKernel, grid: TruncatedSparseGrid, policy: NumericPolicy):
    """``(A^{-1}, B, D)`` of the block inverse on a truncated sparse grid."""
    if tm.dim != grid.d:
        raise InputError(f"kernel dimension {tm.dim} != grid dimension {grid.d}")
    a_inv = _sg_inverse_csr(tm, grid.d, grid.tau, policy)
    lv = grid.levels[grid.n_base:]
    ix = grid.indices[grid.n_base:]
    if np.any(lv.sum(axis=1) != grid.tau + grid.d):
        raise TMSKError("internal invariant violated: extra point outside the next increment")
    B = kinvk_sg_batch(tm, grid.d, grid.tau, grid.points[grid.n_base:], policy)
    D = hat_norm_sq(tm, lv, ix)
    return a_inv, B, D


def inv_tsg(tm: TMKernel, grid: TruncatedSparseGrid, policy: NumericPolicy = DEFAULT_POLICY
            ) -> SparseSymMatrix:
    """Inverse kernel matrix on a truncated sparse grid.

    ``[[A^{-1} + B D B^T, -B D], [-D B^T, D]]`` where ``A^{-1}`` is the sparse
    grid inverse, ``B`` holds ``A^{-1} k(x)`` for each extra point and ``D`` is
    the diagonal of squared hat norms at the extra points.
    """
    a_inv, B, D = _tsg_blocks(tm, grid, policy)
    if grid.n_extra == 0:
        return SparseSymMatrix(sp.triu(a_inv))
    Dm = sp.diags(D)
    BD = (B @ Dm).tocsr()
    absB = abs(B)
    E = (a_inv + BD @ B.T).tocsr()
    mags = (abs(a_inv) + (absB @ Dm) @ absB.T).tocsr()
    E.sort_indices()
    mags.sort_indices()
    # mags has a superset pattern of E; look up magnitudes by coordinate
    Ec = E.tocoo()
    mag_vals = np.asarray(mags[Ec.row, Ec.col]).ravel()
    keep = _drop_mask(Ec.data, mag_vals, policy)
    E = sp.csr_matrix((Ec.data[keep], (Ec.row[keep], Ec.col[keep])), shape=E.shape)
    full = sp.bmat([[E, -BD], [-BD.T, Dm]], format="csr")
    return SparseSymMatrix(sp.triu(full))


# -- reports, factorization, solves --------------------------------------------


def sparsity_report(m) -> dict:
    """``{n, nnz, density}`` with nnz counted over the symmetric completion."""
    if isinstance(m, SparseSymMatrix):
        n, nnz = m.n, m.nnz
    elif sp.issparse(m):
        c = sp.csr_matrix(m)
        c.eliminate_zeros()
        n, nnz = c.shape[0], c.nnz
    else:
        a = np.asarray(m)
        n, nnz = a.shape[0], int(np.count_nonzero(a))
    return {"n": int(n), "nnz": int(nnz), "density": nnz / float(n) ** 2 if n else 0.0}


def _as_csc(m):
    if isinstance(m, SparseSymMatrix):
        return m.tocsc()
    return sp.csc_matrix(m)


def sparse_cholesky(m, ordering: str = "natural") -> LowerTriangularFactor:
    """Sparse Cholesky factor ``L`` (``m = L L^T``) in the given row ordering.

    Only the grid-canonical ``"natural"`` ordering is implemented.  The factor
    comes from SuperLU run with natural column order and forced diagonal
    pivots, so ``U = diag(u) L1^T`` and ``L = L1 diag(sqrt(u))``.
    """
    if ordering != "natural":
        raise InputError(f"unsupported ordering {ordering!r}; only 'natural' is available")
    A = _as_csc(m).astype(float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise InputError("matrix must be square")
    if n == 0:
        return LowerTriangularFactor(sp.csr_matrix((0, 0)))
    try:
        lu = splu(A, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                  options=dict(SymmetricMode=True))
    except RuntimeError as exc:
        raise NotPositiveDefiniteError(f"factorization failed: {exc}") from exc
    ident = np.arange(n)
    if not (np.array_equal(lu.perm_r, ident) and np.array_equal(lu.perm_c, ident)):
        raise NotPositiveDefiniteError("pivoting was required; matrix is not positive definite")
    u = lu.U.diagonal()
    bad = np.flatnonzero(~(u > 0))
    if bad.size:
        k = int(bad[0])
        raise NotPositiveDefiniteError(f"nonpositive pivot {u[k]:.3e} at row {k}")
    L = (lu.L @ sp.diags(np.sqrt(u))).tocsr()
    L.sort_indices()
    return LowerTriangularFactor(L)


def _tri_matrix(T):
    if isinstance(T, LowerTriangularFactor):
        return T.L
    if sp.issparse(T):
        return sp.csr_matrix(T)
    return sp.csr_matrix(np.asarray(T, dtype=float))


def _check_diag(M):
    dg = M.diagonal()
    if np.any(dg == 0) or not np.all(np.isfinite(dg)):
        raise NumericalError("triangular matrix has a zero or non-finite diagonal entry")


def solve_lower(L, rhs):
    """Forward substitution with a lower-triangular matrix or factor."""
    M = _tri_matrix(L)
    _check_diag(M)
    return spsolve_triangular(M, np.asarray(rhs, dtype=float), lower=True)


def solve_upper(U, rhs):
    """Back substitution; a :class:`LowerTriangularFactor` is used as ``L^T``."""
    M = _tri_matrix(U)
    if isinstance(U, LowerTriangularFactor):
        M = M.T.tocsr()
    _check_diag(M)
    return spsolve_triangular(M, np.asarray(rhs, dtype=float), lower=False)


def write_matrix_market(m: SparseSymMatrix, target) -> None:
    """Coordinate MatrixMarket dump (symmetric, lower triangle, 1-based)."""
    scipy.io.mmwrite(target, m.csr.tocoo(), symmetry="symmetric", precision=17)
