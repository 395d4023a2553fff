import io

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from conftest import KERNELS_1D, conditional_variance, dense_gram, guaranteed_zero_pairs, tm
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tmsk.basis import rkhs_norm_sq
from tmsk.designs import classical_sg, component_design, truncated_sg
from tmsk.errors import InputError, KernelValidityError, NotPositiveDefiniteError, NumericalError
from tmsk.kernels import AffineBrownian, BrownianMotion, Laplace, PQKernel, TMKernel
from tmsk.linalg import (
    DEFAULT_POLICY,
    SparseSymMatrix,
    SparseVector,
    _sg_plan,
    _tsg_blocks,
    inv_1d,
    inv_lattice,
    inv_sg,
    inv_tsg,
    kinvk_1d,
    kinvk_lattice,
    kinvk_sg,
    sparse_cholesky,
    sparsity_report,
    solve_lower,
    solve_upper,
    write_matrix_market,
)

BM = BrownianMotion()
QUARTERS = [0.25, 0.5, 0.75]


def eye_err(K, Kinv):
    return np.abs(K @ Kinv - np.eye(K.shape[0])).max()


def sorted_points(min_size=1, max_size=30):
    return st.lists(st.integers(1, 999), min_size=min_size, max_size=max_size, unique=True).map(
        lambda v: np.sort(np.array(v)) / 1000.0)


# -- one-dimensional -------------------------------------------------------

def test_inv_1d_bm_example():
    m = inv_1d(BM, QUARTERS)
    assert np.array_equal(m.to_dense(), [[8, -4, 0], [-4, 8, -4], [0, -4, 4]])
    assert not m.is_stored(0, 2) and not m.is_stored(2, 0)
    assert m.nnz == 7


def test_inv_1d_laplace_three_points():
    pts = [0.1, 0.45, 0.8]
    K = dense_gram([Laplace(1.0)], np.array(pts)[:, None])
    assert eye_err(K, inv_1d(Laplace(1.0), pts).to_dense()) <= 1e-12


@pytest.mark.parametrize("pts", [[0.3], [0.2, 0.7]])
def test_inv_1d_small(kern1d, pts):
    K = dense_gram([kern1d], np.array(pts)[:, None])
    assert np.allclose(inv_1d(kern1d, pts).to_dense(), np.linalg.inv(K), rtol=1e-12)


def test_inv_1d_errors():
    with pytest.raises(InputError):
        inv_1d(BM, [0.2, 0.2, 0.5])
    with pytest.raises(InputError):
        inv_1d(BM, [0.5, 0.2])
    flat = PQKernel(lambda x: np.ones_like(x), lambda x: np.ones_like(x))
    with pytest.raises(KernelValidityError):
        inv_1d(flat, QUARTERS)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(KERNELS_1D)), sorted_points())
def test_inv_1d_property(name, pts):
    kern = KERNELS_1D[name]
    K = dense_gram([kern], pts[:, None])
    m = inv_1d(kern, pts)
    assert eye_err(K, m.to_dense()) <= 1e-8
    assert m.nnz <= 3 * pts.size - 2


def test_kinvk_1d_examples():
    v = kinvk_1d(BM, QUARTERS, 3 / 8)
    assert v.indices.tolist() == [0, 1] and np.allclose(v.values, [0.5, 0.5])
    v = kinvk_1d(BM, QUARTERS, 0.1)
    assert v.indices.tolist() == [0] and v.values[0] == pytest.approx(0.1 / 0.25)
    for j, x in enumerate(QUARTERS):
        v = kinvk_1d(Laplace(2.0), QUARTERS, x)
        assert v.indices.tolist() == [j] and v.values[0] == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(KERNELS_1D)), sorted_points(), st.floats(0.0005, 0.9995))
def test_kinvk_1d_property(name, pts, x):
    kern = KERNELS_1D[name]
    K = dense_gram([kern], pts[:, None])
    kx = dense_gram([kern], pts[:, None], np.array([[x]]))[:, 0]
    v = kinvk_1d(kern, pts, x)
    assert v.nnz <= 2
    assert np.allclose(v.to_dense(), np.linalg.solve(K, kx), atol=1e-8)


# -- lattices ----------------------------------------------------------------

def test_lattice_reduces_to_1d():
    pts = [0.1, 0.3, 0.35, 0.9]
    assert np.array_equal(inv_lattice(tm(Laplace(1.0), 1), [pts]).to_dense(),
                          inv_1d(Laplace(1.0), pts).to_dense())


def test_lattice_kron_example():
    m = inv_lattice(tm(BM, 2), [[0.5], QUARTERS])
    assert np.allclose(m.to_dense(), 2 * inv_1d(BM, QUARTERS).to_dense())


def test_lattice_dense_oracle():
    k = TMKernel([Laplace(1.0), BM])
    designs = [[0.2, 0.5, 0.9], [0.1, 0.4, 0.6]]
    X = np.array([(a, b) for a in designs[0] for b in designs[1]])  # last dimension fastest
    K = dense_gram(k.components, X)
    m = inv_lattice(k, designs)
    assert eye_err(K, m.to_dense()) <= 1e-11
    assert m.nnz <= (3 * 3 - 2) ** 2
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.random(2)
        v = kinvk_lattice(k, designs, x)
        assert v.nnz <= 4
        assert np.allclose(v.to_dense(), np.linalg.solve(K, dense_gram(k.components, X, x)[:, 0]),
                           atol=1e-12)
    v = kinvk_lattice(k, designs, [0.5, 0.4])
    assert v.indices.tolist() == [4] and v.values[0] == pytest.approx(1.0)
    assert kinvk_lattice(k, designs, [0.05, 0.5]).nnz == 2  # below the first point in dim 1


# -- classical sparse grids ------------------------------------------------------

def sg_points(d, tau):
    return np.array([x.point for x in classical_sg(d, tau)])


def test_sg_reduces_to_1d():
    m = inv_sg(tm(Laplace(1.0), 1), 1, 4)
    pts = np.array([x.point[0] for x in classical_sg(1, 4)])
    order = np.argsort(pts)
    ref = inv_1d(Laplace(1.0), component_design(4)).to_dense()
    assert np.allclose(m.to_dense()[np.ix_(order, order)], ref, rtol=1e-14)


@pytest.mark.parametrize("d,tau", [(2, 2), (2, 4), (3, 3), (4, 2)])
def test_sg_dense_oracle(kern1d, d, tau):
    k = tm(kern1d, d)
    X = sg_points(d, tau)
    K = dense_gram(k.components, X)
    m = inv_sg(k, d, tau)
    assert eye_err(K, m.to_dense()) <= 1e-10
    lattice_nnz = sum(np.prod([3 * (2**lj - 1) - 2 for lj in lat.levels]) for lat in _sg_plan(d, tau))
    assert m.nnz <= lattice_nnz


def test_kinvk_sg(kern1d):
    d, tau = 2, 3
    k = tm(kern1d, d)
    X = sg_points(d, tau)
    K = dense_gram(k.components, X)
    rng = np.random.default_rng(7)
    for x in rng.random((25, d)):
        v = kinvk_sg(k, d, tau, x)
        ref = np.linalg.solve(K, dense_gram(k.components, X, x)[:, 0])
        assert np.abs(v.to_dense() - ref).max() <= 1e-11
    for r, x in enumerate(X):
        v = kinvk_sg(k, d, tau, x)
        assert v.indices.tolist() == [r] and v.values[0] == pytest.approx(1.0, abs=1e-13)


def test_kinvk_sg_nnz_growth():
    k = tm(Laplace(1.0), 2)
    x = np.array([0.3141, 0.2718])
    nnz = [kinvk_sg(k, 2, tau, x).nnz for tau in range(2, 9)]
    slopes = np.diff(nnz)
    assert max(slopes) <= 8  # about linear in tau, not in n
    assert nnz[-1] < 0.2 * 2**8


# -- truncated sparse grids ----------------------------------------------------

def test_tsg_classical_equals_sg():
    k = tm(Laplace(1.0), 2)
    assert np.array_equal(inv_tsg(k, truncated_sg(2, 17)).to_dense(), inv_sg(k, 2, 3).to_dense())


def test_tsg_small_example():
    k = tm(Laplace(1.0), 2)
    g = truncated_sg(2, 7, seed=0)
    assert eye_err(dense_gram(k.components, g.points), inv_tsg(k, g).to_dense()) <= 1e-10


@pytest.mark.parametrize("d,n", [(1, 40), (2, 100), (2, 400), (3, 250), (4, 120)])
def test_tsg_dense_oracle(kern1d, d, n):
    k = tm(kern1d, d)
    g = truncated_sg(d, n, seed=n)
    m = inv_tsg(k, g)
    assert eye_err(dense_gram(k.components, g.points), m.to_dense()) <= 1e-8
    assert np.all(m.rows <= m.cols)
    assert (m.csr != m.csr.T).nnz == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_tsg_zero_pattern(seed):
    k = tm(Laplace(1.0), 2)
    g = truncated_sg(2, 40, seed=seed)
    m = inv_tsg(k, g)
    pairs = guaranteed_zero_pairs(g)
    assert {c for _, _, c in pairs} == {"a", "b", "c"}
    assert not [p for p in pairs if m.is_stored(p[0], p[1])]


@pytest.mark.parametrize("kern", [Laplace(0.7), AffineBrownian(0.4, 1.3)])
@pytest.mark.parametrize("d,n", [(2, 30), (3, 60)])
def test_tsg_d_block(kern, d, n):
    k = tm(kern, d)
    g = truncated_sg(d, n, seed=4)
    _, _, D = _tsg_blocks(k, g, DEFAULT_POLICY)
    K = dense_gram(k.components, g.points)
    for j, r in enumerate(range(g.n_base, g.n)):
        assert D[j] == pytest.approx(1 / conditional_variance(K, r), rel=1e-8)
        assert D[j] == pytest.approx(rkhs_norm_sq(k, g.levels[r], g.indices[r]), rel=1e-14)
    # extra points are conditionally independent given the base
    b = np.arange(g.n_base)
    e = np.arange(g.n_base, g.n)
    S = K[np.ix_(e, e)] - K[np.ix_(e, b)] @ np.linalg.solve(K[np.ix_(b, b)], K[np.ix_(b, e)])
    assert np.abs(S - np.diag(np.diag(S))).max() <= 1e-9


def test_sparsity_report():
    tri = sp.diags([np.ones(99), 2 * np.ones(100), np.ones(99)], [-1, 0, 1])
    assert sparsity_report(tri)["density"] == pytest.approx(0.0298)
    A = np.random.default_rng(0).random((3, 3)) + 3 * np.eye(3)
    assert sparsity_report(np.linalg.inv(A))["density"] == 1.0
    k = tm(Laplace(1.0), 2)
    assert sparsity_report(inv_sg(k, 2, 5))["density"] < sparsity_report(inv_sg(k, 2, 4))["density"]


# -- factorization and solves ----------------------------------------------------

def test_cholesky_trivial():
    assert np.array_equal(sparse_cholesky(sp.eye(4)).L.toarray(), np.eye(4))
    assert np.allclose(sparse_cholesky(np.diag([4.0, 9.0])).L.toarray(), np.diag([2.0, 3.0]))


def test_cholesky_kinv_plus_noise():
    k = tm(Laplace(1.0), 2)
    kinv = inv_sg(k, 2, 3)
    M = kinv.csr + sp.eye(17) / 0.1
    f = sparse_cholesky(SparseSymMatrix.from_full(M))
    Md = M.toarray()
    rel = np.linalg.norm(f.reconstruct().toarray() - Md) / np.linalg.norm(Md)
    assert rel <= 1e-10
    assert sp.triu(f.L, 1).nnz == 0 and np.all(f.L.diagonal() > 0)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        sparse_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        sparse_cholesky(np.diag([1.0, -1.0]))
    with pytest.raises(InputError):
        sparse_cholesky(np.eye(2), ordering="amd")


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_cholesky_random_spd(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A @ A.T + n * np.eye(n)
    A[np.abs(A) < 0.5] = 0.0  # sparsify, keep symmetric and diagonally dominant enough
    A = (A + A.T) / 2
    assume(np.all(np.linalg.eigvalsh(A) > 1e-3))
    f = sparse_cholesky(A)
    assert np.linalg.norm(f.reconstruct().toarray() - A) <= 1e-10 * np.linalg.norm(A)


def test_triangular_solves():
    rhs = np.array([3.0, -1.0, 2.0])
    assert np.array_equal(solve_lower(sp.eye(3), rhs), rhs)
    assert np.allclose(solve_lower(np.array([[2.0, 0.0], [1.0, 3.0]]), [4.0, 7.0]), [2.0, 5 / 3])
    assert np.allclose(solve_upper(np.array([[2.0, 1.0], [0.0, 4.0]]), [4.0, 8.0]), [1.0, 2.0])
    with pytest.raises(NumericalError):
        solve_lower(np.array([[0.0, 0.0], [1.0, 1.0]]), [1.0, 1.0])


def test_factor_solve_matches_dense():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((20, 20))
    A = A @ A.T + 20 * np.eye(20)
    b = rng.standard_normal(20)
    f = sparse_cholesky(A)
    x = solve_upper(f, solve_lower(f, b))
    assert np.abs(x - np.linalg.solve(A, b)).max() <= 1e-10 * np.abs(b).max()


def test_sparse_vector_invariants():
    with pytest.raises(InputError):
        SparseVector(3, [1, 0], [1.0, 2.0])
    with pytest.raises(NumericalError):
        SparseVector(3, [0], [np.inf])
    assert SparseVector(3, [0, 2], [1.0, 2.0]).dot([1.0, 5.0, 3.0]) == 7.0


def test_matrix_market_dump():
    m = inv_tsg(tm(Laplace(1.0), 2), truncated_sg(2, 7, seed=0))
    buf = io.BytesIO()
    write_matrix_market(m, buf)
    text = buf.getvalue().decode()
    assert text.startswith("%%MatrixMarket matrix coordinate real symmetric")
    back = scipy.io.mmread(io.BytesIO(buf.getvalue()))
    assert np.array_equal(back.toarray(), m.to_dense())


def _mp_tridiag(p, q, x):
    """Tridiagonal inverse from the closed form evaluated in 40-digit arithmetic."""
    import mpmath as mp

    mp.mp.dps = 40
    X = [mp.mpf(float(v)) for v in x]

    def cross(a, b):
        if a is None and b is None:
            return mp.mpf(1)
        if a is None:
            return p(b)
        if b is None:
            return q(a)
        return p(b) * q(a) - p(a) * q(b)

    ext = [None] + X + [None]
    diag = [float(cross(ext[i], ext[i + 2]) / (cross(ext[i], ext[i + 1]) * cross(ext[i + 1], ext[i + 2])))
            for i in range(len(X))]
    off = [float(-1 / cross(X[i], X[i + 1])) for i in range(len(X) - 1)]
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


@pytest.mark.parametrize("theta", [None, 0.5, 5.0])
def test_inv_1d_high_precision_oracle(theta):
    import mpmath as mp

    x = np.sort(np.random.default_rng(2).random(1000))
    if theta is None:
        kern, p, q = BM, (lambda v: v), (lambda v: mp.mpf(1))
    else:
        kern, p, q = Laplace(theta), (lambda v: mp.e ** (theta * v)), (lambda v: mp.e ** (-theta * v))
    ref = _mp_tridiag(p, q, x)
    got = inv_1d(kern, x).to_dense()
    assert np.abs(got - ref).max() <= 1e-14 * np.abs(ref).max()
