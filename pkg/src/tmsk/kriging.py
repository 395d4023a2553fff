"""Deterministic and stochastic kriging on truncated sparse grids.

The prior mean is zero.  With noise the predictor uses the Woodbury form

    (K + S)^{-1} = S^{-1} - S^{-1} (K^{-1} + S^{-1})^{-1} S^{-1},

factoring ``K^{-1} + S^{-1} = L L^T`` once.  For a prediction point ``x``::

    b1 = L^{-1} S^{-1} k(x),   b2 = L^{-1} S^{-1} ybar,
    mean = k(x)^T S^{-1} ybar - b1^T b2,
    mse  = k(x, x) - k(x)^T S^{-1} k(x) + b1^T b1.

Both triangular systems are *lower* solves; that is what makes ``b1^T b2``
equal ``k^T S^{-1} (K^{-1} + S^{-1})^{-1} S^{-1} ybar``.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .designs import TruncatedSparseGrid
from .errors import InputError, NotPositiveDefiniteError, NumericalError, ResourceError
from .kernels import DomainMap, TMKernel, clamp_unit
from .linalg import (
    DEFAULT_POLICY,
    LowerTriangularFactor,
    NumericPolicy,
    SparseSymMatrix,
    inv_tsg,
    solve_lower,
    sparse_cholesky,
)

__all__ = [
    "SampleStats",
    "sample_stats",
    "Dataset",
    "NoiseMode",
    "NoiseModel",
    "FittedModel",
    "fit",
    "predict",
    "predict_arrays",
    "predict_batch",
    "dense_reference",
    "allocate_budget",
]


class SampleStats(NamedTuple):
    means: np.ndarray
    variances: np.ndarray
    reps: np.ndarray

    @property
    def single(self) -> np.ndarray:
        """Points with one replication (their variance is reported as 0)."""
        return self.reps == 1


def sample_stats(replications) -> SampleStats:
    """Per-point sample means and unbiased sample variances."""
    means, variances, reps = [], [], []
    for k, r in enumerate(replications):
        a = np.asarray(r, dtype=float).ravel()
        if a.size == 0:
            raise InputError(f"point {k} has no replications")
        if not np.all(np.isfinite(a)):
            raise InputError(f"point {k} has non-finite outputs")
        means.append(a.mean())
        variances.append(a.var(ddof=1) if a.size > 1 else 0.0)
        reps.append(a.size)
    return SampleStats(np.asarray(means), np.asarray(variances), np.asarray(reps, dtype=np.int64))


@dataclass(frozen=True)
class Dataset:
    """Replicated outputs summarized on a TSG design.

    ``variances`` are per-replication noise variances: sample estimates or
    known values, depending on how the noise model is built.
    """

    grid: TruncatedSparseGrid
    means: np.ndarray
    variances: Optional[np.ndarray] = None
    reps: Optional[np.ndarray] = None
    domain: Optional[DomainMap] = None

    def __post_init__(self):
        n = self.grid.n
        means = np.asarray(self.means, dtype=float).ravel()
        if means.size != n:
            raise InputError(f"{means.size} means for {n} design points")
        if not np.all(np.isfinite(means)):
            raise InputError("means must be finite")
        reps = np.ones(n, np.int64) if self.reps is None else np.asarray(self.reps).ravel()
        if reps.size != n or np.any(reps < 1) or np.any(reps != np.round(reps)):
            raise InputError("replication counts must be n integers >= 1")
        var = self.variances
        if var is not None:
            var = np.asarray(var, dtype=float).ravel()
            if var.size != n:
                raise InputError(f"{var.size} variances for {n} design points")
            if not np.all(np.isfinite(var)) or np.any(var < 0):
                raise InputError("variances must be finite and nonnegative")
        dom = DomainMap.unit(self.grid.d) if self.domain is None else self.domain
        if dom.dim != self.grid.d:
            raise InputError("domain and grid dimensions differ")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "reps", reps.astype(np.int64))
        object.__setattr__(self, "variances", var)
        object.__setattr__(self, "domain", dom)

    @classmethod
    def from_replications(cls, grid, replications, domain=None) -> "Dataset":
        st = sample_stats(replications)
        return cls(grid, st.means, st.variances, st.reps, domain)

    @property
    def n(self) -> int:
        return self.grid.n


class NoiseMode(enum.Enum):
    NOISELESS = "none"
    KNOWN = "known"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal noise covariance of the sample means, ``S_ii = sigma^2(x_i) / m_i``."""

    mode: NoiseMode
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float).ravel()
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise InputError("noise variances must be finite and nonnegative")
        if self.mode is NoiseMode.NOISELESS and np.any(s != 0):
            raise InputError("noiseless model with nonzero variances")
        if self.mode is not NoiseMode.NOISELESS and np.any(s == 0):
            k = int(np.flatnonzero(s == 0)[0])
            raise InputError(f"zero noise variance at point {k} in a noisy model")
        object.__setattr__(self, "sigma", s)

    @classmethod
    def noiseless(cls, n: int) -> "NoiseModel":
        return cls(NoiseMode.NOISELESS, np.zeros(n))

    @classmethod
    def known(cls, variances, reps=None) -> "NoiseModel":
        v = np.asarray(variances, dtype=float)
        m = np.ones_like(v) if reps is None else np.asarray(reps, dtype=float)
        return cls(NoiseMode.KNOWN, v / m)

    @classmethod
    def estimated(cls, variances, reps) -> "NoiseModel":
        m = np.asarray(reps)
        if np.any(m < 2):
            raise InputError("estimated noise needs at least 2 replications per point")
        return cls(NoiseMode.ESTIMATED, np.asarray(variances, dtype=float) / m)

    @classmethod
    def for_dataset(cls, data: Dataset, mode) -> "NoiseModel":
        mode = NoiseMode(mode) if not isinstance(mode, NoiseMode) else mode
        if mode is NoiseMode.NOISELESS:
            return cls.noiseless(data.n)
        if data.variances is None:
            raise InputError(f"{mode.value} noise requires variances in the dataset")
        if mode is NoiseMode.KNOWN:
            return cls.known(data.variances, data.reps)
        return cls.estimated(data.variances, data.reps)

    @property
    def is_noiseless(self) -> bool:
        return self.mode is NoiseMode.NOISELESS


@dataclass(frozen=True)
class FittedModel:
    tm: TMKernel
    data: Dataset
    noise: NoiseModel
    kinv: SparseSymMatrix
    w: Optional[np.ndarray] = None
    factor: Optional[LowerTriangularFactor] = None
    sy: Optional[np.ndarray] = None
    b2: Optional[np.ndarray] = None
    policy: NumericPolicy = field(default=DEFAULT_POLICY, repr=False)

    @property
    def design_unit(self) -> np.ndarray:
        return self.data.grid.points


def fit(tm: TMKernel, data: Dataset, noise: Optional[NoiseModel] = None,
        policy: NumericPolicy = DEFAULT_POLICY) -> FittedModel:
    """Build ``K^{-1}`` and the cached vectors needed for prediction."""
    if tm.dim != data.grid.d:
        raise InputError(f"kernel dimension {tm.dim} != design dimension {data.grid.d}")
    if noise is None:
        noise = NoiseModel.noiseless(data.n)
    if noise.sigma.size != data.n:
        raise InputError("noise model length does not match the dataset")
    kinv = inv_tsg(tm, data.grid, policy)
    y = data.means
    if noise.is_noiseless:
        return FittedModel(tm, data, noise, kinv, w=kinv @ y, policy=policy)
    s_inv = 1.0 / noise.sigma
    M = (kinv.csr + sp.diags(s_inv)).tocsc()
    try:
        factor = sparse_cholesky(M)
    except NotPositiveDefiniteError as exc:
        raise NumericalError(
            f"Cholesky of K^-1 + S^-1 failed ({exc}); noise variances span "
            f"[{noise.sigma.min():.3e}, {noise.sigma.max():.3e}]"
        ) from exc
    sy = y * s_inv
    b2 = solve_lower(factor, sy)
    return FittedModel(tm, data, noise, kinv, factor=factor, sy=sy, b2=b2, policy=policy)


def _rowdot(a, b):
    # contiguous per-row reductions: identical whatever the batch size
    return np.sum(a * b, axis=1)


def _clamp_mse(mse, scale, policy):
    tol = policy.mse_slack * scale
    bad = mse < -tol
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise NumericalError(f"negative MSE {mse[k]:.3e} beyond roundoff tolerance {tol[k]:.3e}")
    return np.maximum(mse, 0.0)


def _predict_unit(model: FittedModel, U: np.ndarray, with_mse: bool = True):
    tm = model.tm
    P = model.design_unit
    kx = tm.gram(U, P)
    if model.noise.is_noiseless:
        mean = _rowdot(kx, model.w[None, :])
        if not with_mse:
            return mean, None
        prior = tm.diag(U)
        kk = np.ascontiguousarray((model.kinv.csr @ kx.T).T)
        quad = _rowdot(kx, kk)
        return mean, _clamp_mse(prior - quad, prior + np.abs(quad), model.policy)
    s_inv = 1.0 / model.noise.sigma
    ks = kx * s_inv[None, :]
    b1 = np.ascontiguousarray(np.atleast_2d(solve_lower(model.factor, ks.T).T))
    if b1.shape != kx.shape:
        b1 = b1.reshape(kx.shape)
    mean = _rowdot(kx, model.sy[None, :]) - _rowdot(b1, model.b2[None, :])
    if not with_mse:
        return mean, None
    prior = tm.diag(U)
    t2 = _rowdot(kx, ks)
    t3 = _rowdot(b1, b1)
    return mean, _clamp_mse(prior - t2 + t3, prior + t2 + t3, model.policy)


def _to_unit(model: FittedModel, xs):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != model.data.grid.d:
        raise InputError(f"prediction points must have {model.data.grid.d} coordinates")
    U, _ = clamp_unit(model.data.domain.to_unit(xs))
    return U


def predict_arrays(model: FittedModel, xs, parallelism: int = 1, with_mse: bool = True):
    """Vectorized prediction returning ``(means, mses)`` arrays.

    Points are processed in fixed-size chunks, so results do not depend on
    ``parallelism``.  ``mses`` is None when ``with_mse`` is False.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return np.zeros(0), (np.zeros(0) if with_mse else None)
    U = _to_unit(model, xs)
    step = model.policy.chunk
    chunks = [U[s:s + step] for s in range(0, U.shape[0], step)]
    run = lambda c: _predict_unit(model, c, with_mse)  # noqa: E731
    if parallelism > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    means = np.concatenate([p[0] for p in parts])
    mses = np.concatenate([p[1] for p in parts]) if with_mse else None
    return means, mses


def predict(model: FittedModel, x):
    """Posterior mean and MSE at one point given in the dataset's domain."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("predict takes a single point; use predict_batch")
    m, v = predict_arrays(model, x[None, :])
    return float(m[0]), float(v[0])


def predict_batch(model: FittedModel, xs, parallelism: int = 1) -> list:
    """``[(mean, mse), ...]`` in input order."""
    if len(xs) == 0:
        return []
    m, v = predict_arrays(model, xs, parallelism)
    return list(zip(m.tolist(), v.tolist()))


def dense_reference(tm: TMKernel, data: Dataset, noise: Optional[NoiseModel], xs,
                    cap: int = DEFAULT_POLICY.dense_cap) -> list:
    """Dense-algebra predictor used as a test oracle."""
    n = data.n
    if n > cap:
        raise ResourceError(f"dense reference limited to n <= {cap}, got {n}")
    sigma = np.zeros(n) if noise is None else noise.sigma
    P = data.grid.points
    C = tm.gram(P) + np.diag(sigma)
    cf = scipy.linalg.cho_factor(C, lower=True)
    z = scipy.linalg.cho_solve(cf, data.means)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.size == 0:
        return []
    U, _ = clamp_unit(data.domain.to_unit(xs))
    kx = tm.gram(P, U)
    v = scipy.linalg.cho_solve(cf, kx)
    mean = kx.T @ z
    mse = tm.diag(U) - np.sum(kx * v, axis=0)
    return list(zip(mean.tolist(), mse.tolist()))


def allocate_budget(B: int, misspec: bool = False):
    """Split ``B`` simulation runs into ``n`` design points and ``m`` replications each."""
    if B < 2:
        raise InputError(f"budget must be >= 2, got {B}")
    frac = 1 / 5 if misspec else 1 / 3
    n = max(1, int(round(B**frac)))
    return n, max(1, B // n)
