"""Dyadic node helpers shared by the basis oracle and the fast inversion."""

import numpy as np

from .errors import KernelValidityError


def node(l, j):
    """Coordinate of node ``j * 2^-l`` with ``j = 0`` -> -inf and ``j = 2^l`` -> +inf.

    The infinite sentinels select the ``(p, q) = (0, 1)`` / ``(1, 0)`` endpoint
    conventions of :meth:`GaussMarkov1D.cross`.
    """
    l = np.asarray(l, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    x = j * np.exp2(-l.astype(np.float64))
    x = np.where(j <= 0, -np.inf, x)
    return np.where(j >= (np.int64(1) << l), np.inf, x)


def hat_norm_sq_1d(kern, l, i):
    """Squared RKHS norm of the 1-d hierarchical hat ``phi_{l,i}``.

    Same closed form as the diagonal of the tridiagonal inverse at a node whose
    neighbours are ``c_{l,i-1}`` and ``c_{l,i+1}``; it is also the reciprocal
    conditional variance of the process at ``c_{l,i}`` given those neighbours.
    """
    left, mid, right = node(l, np.asarray(i) - 1), node(l, i), node(l, np.asarray(i) + 1)
    outer = kern.cross(left, right)
    lo = kern.cross(left, mid)
    hi = kern.cross(mid, right)
    if np.any(~(lo > 0)) or np.any(~(hi > 0)) or np.any(~(outer > 0)):
        raise KernelValidityError("nonpositive cross term p(b)q(a) - p(a)q(b) at a dyadic node")
    return outer / (lo * hi)


def hat_norm_sq(tm, levels, indices):
    """Product over dimensions of :func:`hat_norm_sq_1d` for rows of ``(levels, indices)``."""
    levels = np.atleast_2d(np.asarray(levels, dtype=np.int64))
    indices = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    out = np.ones(levels.shape[0])
    for j, kern in enumerate(tm.components):
        out = out * hat_norm_sq_1d(kern, levels[:, j], indices[:, j])
    return out
