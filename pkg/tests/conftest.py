"""Independent dense oracles shared by the test modules.

Everything here uses plain numpy on kernel values; none of it touches the
sparse machinery under test.
"""

import numpy as np
import pytest

from tmsk.kernels import BrownianBridge, BrownianMotion, Laplace, TMKernel

KERNELS_1D = {
    "bm": BrownianMotion(),
    "laplace0.5": Laplace(0.5),
    "laplace1": Laplace(1.0),
    "laplace5": Laplace(5.0),
    "bb1": BrownianBridge(1.0),
}


def dense_gram(kern1d_list, X, Y=None):
    """Kernel matrix from the raw ``p``/``q`` factors, one dimension at a time."""
    X = np.atleast_2d(X)
    Y = X if Y is None else np.atleast_2d(Y)
    out = np.ones((X.shape[0], Y.shape[0]))
    for j, k in enumerate(kern1d_list):
        a = X[:, j][:, None]
        b = Y[:, j][None, :]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        out *= k.p(lo) * k.q(hi)
    return out


def hat_norm_reference(kern, l, i):
    """Squared hat norm written directly in ``p``/``q`` with one-sided endpoint values.

    Uses the endpoint convention ``p(left of 0) = 0, q(left) = 1`` and
    ``p(right of 1) = 1, q(right) = 0``; evaluated with plain floats.
    """
    h = 2.0**-l
    c = [(i - 1) * h, i * h, (i + 1) * h]
    P = [float(kern.p(v)) for v in c]
    Q = [float(kern.q(v)) for v in c]
    if i == 1:
        P[0], Q[0] = 0.0, 1.0
    if i == 2**l - 1:
        P[2], Q[2] = 1.0, 0.0
    num = P[2] * Q[0] - P[0] * Q[2]
    den = (P[1] * Q[0] - P[0] * Q[1]) * (P[2] * Q[1] - P[1] * Q[2])
    return num / den


def conditional_variance(K, j):
    """Variance of coordinate ``j`` given all others, via the Schur complement."""
    o = np.delete(np.arange(K.shape[0]), j)
    Koo = K[np.ix_(o, o)]
    kj = K[o, j]
    return K[j, j] - kj @ np.linalg.solve(Koo, kj)


@pytest.fixture(params=sorted(KERNELS_1D))
def kern1d(request):
    return KERNELS_1D[request.param]


def tm(kern, d):
    return TMKernel.broadcast(kern, d)


def _in_box(point, l, i):
    """Is ``point`` inside the open support box of hat ``(l, i)``?"""
    lo = (np.asarray(i) - 1) * 2.0 ** -np.asarray(l, dtype=float)
    hi = (np.asarray(i) + 1) * 2.0 ** -np.asarray(l, dtype=float)
    return bool(np.all((point > lo) & (point < hi)))


def guaranteed_zero_pairs(grid):
    """Index pairs ``r < s`` whose inverse-matrix entry must vanish structurally.

    Three sufficient conditions:
      (a) both points are extra points;
      (b) one base point and one extra point lying outside the base point's
          support box;
      (c) two base points whose supports are disjoint in some coordinate and
          whose support intersection contains no extra point.
    """
    L, I, P = grid.levels, grid.indices, grid.points
    nb = grid.n_base
    extra = range(nb, grid.n)
    out = []
    for r in range(grid.n):
        for s in range(r + 1, grid.n):
            if r >= nb:
                out.append((r, s, "a"))
            elif s >= nb:
                if not _in_box(P[s], L[r], I[r]):
                    out.append((r, s, "b"))
            else:
                top = np.maximum(L[r], L[s])
                gap = np.abs(I[r] * 2 ** (top - L[r]) - I[s] * 2 ** (top - L[s]))
                if np.any(gap >= 2) and not any(
                    _in_box(P[e], L[r], I[r]) and _in_box(P[e], L[s], I[s]) for e in extra
                ):
                    out.append((r, s, "c"))
    return out


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
