import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmsk.errors import InputError, KernelValidityError
from tmsk.kernels import (
    AffineBrownian,
    BrownianBridge,
    BrownianMotion,
    DomainMap,
    Laplace,
    PQKernel,
    TMKernel,
    clamp_unit,
    eval1d,
    parse_kernel_spec,
    validate_markov,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_eval1d_examples():
    assert eval1d(BrownianMotion(), 0.3, 0.7) == pytest.approx(0.3)
    assert eval1d(Laplace(1.0), 0.2, 0.5) == pytest.approx(math.exp(-0.3))
    assert eval1d(BrownianBridge(1.0), 0.25, 0.5) == pytest.approx(0.25 * 0.5)
    assert eval1d(AffineBrownian(1.0, 2.0), 0.4, 0.9) == pytest.approx(1.8)


def test_eval1d_rejects_out_of_domain():
    with pytest.raises(InputError):
        eval1d(BrownianMotion(), -0.1, 0.5)
    with pytest.raises(InputError):
        eval1d(Laplace(), 0.5, 1.5)


@pytest.mark.parametrize("ctor", [lambda: BrownianBridge(0.5), lambda: Laplace(0.0),
                                  lambda: Laplace(-1.0), lambda: AffineBrownian(0.0, 0.0)])
def test_invalid_parameters(ctor):
    with pytest.raises(KernelValidityError):
        ctor()


@settings(max_examples=200, deadline=None)
@given(unit, unit, st.floats(0.1, 10.0))
def test_symmetry_and_cross_sign(a, b, theta):
    for k in (BrownianMotion(), Laplace(theta), BrownianBridge(1.0 + theta), AffineBrownian(theta, 1.0)):
        assert k(a, b) == k(b, a)
        if a < b:
            assert k.cross(a, b) > 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.1, 10.0))
def test_cross_matches_generic_formula(a, b, theta):
    k = Laplace(theta)
    generic = k.p(b) * k.q(a) - k.p(a) * k.q(b)
    assert k.cross(a, b) == pytest.approx(generic, rel=1e-9, abs=1e-12)


def test_cross_sentinels():
    k = Laplace(2.0)
    assert k.cross(-np.inf, 0.3) == pytest.approx(k.p(0.3))
    assert k.cross(0.3, np.inf) == pytest.approx(k.q(0.3))
    assert k.cross(-np.inf, np.inf) == 1.0


def test_tm_kernel_product_and_gram():
    tmk = TMKernel([BrownianMotion(), Laplace(1.0)])
    x, y = np.array([0.2, 0.3]), np.array([0.5, 0.9])
    assert tmk.eval(x, y) == pytest.approx(0.2 * math.exp(-0.6))
    G = tmk.gram(np.stack([x, y]))
    assert np.allclose(G, G.T)
    assert np.all(np.linalg.eigvalsh(G) > 0)
    assert np.allclose(tmk.diag(np.stack([x, y])), np.diag(G))
    with pytest.raises(InputError):
        tmk.eval([0.1, 0.2, 0.3], y)


def test_parse_kernel_spec():
    k = parse_kernel_spec("laplace:2", 3)
    assert k.dim == 3 and all(c == Laplace(2.0) for c in k.components)
    k = parse_kernel_spec("bm;bb:2;affinebm:0.5,1", 3)
    assert k.components == (BrownianMotion(), BrownianBridge(2.0), AffineBrownian(0.5, 1.0))
    for bad in ("gauss:1", "bm;bm", "laplace:x", ""):
        with pytest.raises(InputError):
            parse_kernel_spec(bad, 3)


def test_validate_markov():
    assert validate_markov(Laplace(1.0)).passed
    assert validate_markov(BrownianBridge(1.0)).passed
    flat = PQKernel(lambda x: np.ones_like(x), lambda x: np.ones_like(x), "flat")
    rep = validate_markov(flat)
    assert not rep.passed and rep.positive and not rep.monotone and rep.first_violation
    neg = PQKernel(lambda x: x - 0.5, lambda x: np.ones_like(x), "neg")
    rep = validate_markov(neg)
    assert not rep.passed and not rep.positive


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.floats(0.5, 3.0))
def test_domain_roundtrip(x, half):
    dom = DomainMap.box(-half, half, 2)
    x = np.clip(np.array(x), -half, half)
    assert np.allclose(dom.from_unit(dom.to_unit(x)), x, atol=1e-12)


def test_clamp_unit_warns_and_reports():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        u, moved = clamp_unit(np.array([[0.0, 0.5], [0.3, 0.4], [1.2, 0.5]]))
    assert moved.tolist() == [True, False, True]
    assert np.all((u > 0) & (u < 1))
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
