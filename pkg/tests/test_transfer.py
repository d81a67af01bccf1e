import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrpin.disorder import CorrelationProfile, MovingAverage, correlations
from corrpin.errors import InvalidParameter, NumericalFailure
from corrpin.kernels import STAR, TableLaw, ZetaLaw
from corrpin.transfer import (
    _tilt,
    all_states,
    build_qstar,
    class_masses,
    decode,
    encode,
    g_value,
    invariant_mu,
    is_primitive,
    n_states,
    perron,
    permuted_lambda,
    product_measure,
    tilted_kernel,
)

RHO2 = correlations(MovingAverage((0.8, 0.36, 0.48)))
RHO3 = correlations(MovingAverage((0.5, 0.5, 0.5, 0.5)))


def profile(q):
    return {1: CorrelationProfile((1.0, 0.5)), 2: RHO2, 3: RHO3, 4: correlations(MovingAverage((1 / math.sqrt(5),) * 5))}[q]


def test_g_values():
    r1, r2 = RHO2(1), RHO2(2)
    assert g_value((1, 1), RHO2) == pytest.approx(r1 + r2)
    assert g_value((1, STAR), RHO2) == pytest.approx(r1)
    assert g_value((STAR, 1), RHO2) == 0.0
    assert g_value((2, 1), RHO2) == pytest.approx(r2)
    assert g_value((1, 1, 1), RHO3) == pytest.approx(0.75 + 0.5 + 0.25)
    with pytest.raises(InvalidParameter):
        g_value((1,), RHO2)


@pytest.mark.parametrize("q", [0, 1, 2, 3, 4])
def test_encoding_roundtrip(q):
    states = all_states(q)
    assert len(states) == n_states(q) == (q + 1) ** q
    assert sorted(encode(s, q) for s in states) == list(range(n_states(q)))
    for s in states:
        assert decode(encode(s, q), q) == s


def test_encode_caps_large_gaps():
    assert encode((7, 1), 2) == encode((STAR, 1), 2)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_beta_zero_is_stochastic(q):
    m = build_qstar(ZetaLaw(1.0), profile(q), 0.0)
    np.testing.assert_allclose(m.row_sums(), 1.0, atol=1e-15)


def test_q1_rows():
    law = ZetaLaw(1.5)
    rho = CorrelationProfile((1.0, 0.3))
    b = 0.9
    dense = build_qstar(law, rho, b).entries
    k = class_masses(law, 1)
    expected = np.array([k[0] * math.exp(0.3 * b * b), k[1]])
    for row in dense:
        np.testing.assert_allclose(row, expected, rtol=1e-15)


@pytest.mark.parametrize("q", [2, 3])
def test_consistency_pattern(q):
    dense = build_qstar(ZetaLaw(1.0), profile(q), 0.7).entries
    for i in range(dense.shape[0]):
        s = decode(i, q)
        for j in range(dense.shape[1]):
            t = decode(j, q)
            assert (dense[i, j] > 0) == (s[1:] == t[:-1])


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_primitive(q):
    assert is_primitive(build_qstar(ZetaLaw(0.8), profile(q), 1.2))


@pytest.mark.parametrize("q", [2, 3])
def test_relabelling_invariance(q):
    m = build_qstar(ZetaLaw(1.0), profile(q), 1.1)
    lam = perron(m, invariant=False).lam
    perm = np.random.default_rng(q).permutation(m.size)
    assert permuted_lambda(m, perm) == pytest.approx(lam, rel=1e-12)
    assert np.max(np.abs(np.linalg.eigvals(m.entries))) == pytest.approx(lam, rel=1e-12)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_monotone_in_beta(q):
    law = ZetaLaw(1.0)
    lams = [perron(build_qstar(law, profile(q), b), invariant=False).lam for b in np.linspace(0, 2, 11)]
    assert all(b > a for a, b in zip(lams, lams[1:]))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-1.0, 1.0), st.floats(0.0, 2.0))
def test_q1_eigenvalue_formula(alpha, r, beta):
    law = ZetaLaw(alpha)
    lam = perron(build_qstar(law, CorrelationProfile((1.0, r)), beta), invariant=False).lam
    assert lam == pytest.approx(1 + float(law.mass(1)) * math.expm1(r * beta * beta), rel=1e-12)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_product_measure_left_invariant(q):
    law = ZetaLaw(0.7)
    m = build_qstar(law, profile(q), 0.0)
    pi = product_measure(law, q)
    assert pi.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(m.rmatvec(pi), pi, atol=1e-15)


def test_tilt_scale_invariance():
    m = build_qstar(ZetaLaw(1.0), RHO2, 1.3)
    sp = perron(m)
    a = _tilt(m, sp.lam, sp.nu_star)
    b = _tilt(m, sp.lam, 7.0 * sp.nu_star)
    np.testing.assert_allclose(a.weights, b.weights, rtol=1e-14)
    np.testing.assert_allclose(a.row_sums(), 1.0, atol=1e-12)


def test_invariant_measure_concrete_states():
    law = TableLaw([0.3, 0.2, 0.1])
    rho = CorrelationProfile((1.0, 0.4))
    m = build_qstar(law, rho, 1.0)
    im = invariant_mu(tilted_kernel(m, perron(m)), law)
    total = math.fsum(im.mu((t,)) for t in range(1, 3000))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert math.fsum(im.mu((t,)) for t in range(2, 3000)) == pytest.approx(im.mu_star[encode((STAR,), 1)], abs=1e-12)


def test_mean_spacing():
    m = build_qstar(ZetaLaw(1.0), RHO2, 0.5)
    assert math.isinf(invariant_mu(tilted_kernel(m, perron(m)), ZetaLaw(1.0)).mean_spacing)
    law = ZetaLaw(2.0)
    m0 = build_qstar(law, RHO2, 0.0)
    im = invariant_mu(tilted_kernel(m0, perron(m0)), law)
    n = np.arange(1, 10 ** 6, dtype=float)
    mean = math.fsum(n * law.mass(n.astype(np.int64))) + law.beyond_first_moment(10 ** 6 - 1)
    assert im.mean_spacing == pytest.approx(mean, rel=1e-10)


def test_spectral_dict():
    d = perron(build_qstar(ZetaLaw(1.0), RHO2, 0.5)).to_dict()
    assert len(d["states"]) == 9 and d["states"][0] == "(1,1)" and d["states"][-1] == "(*,*)"
    assert sum(d["nu_star"]) == pytest.approx(1.0)


def test_failures():
    with pytest.raises(NumericalFailure) as exc:
        perron(build_qstar(ZetaLaw(1.0), RHO2, 1.5), max_iter=1)
    assert exc.value.residual > 0
    with pytest.raises(InvalidParameter):
        build_qstar(ZetaLaw(1.0), RHO2, -0.1)
    with pytest.raises(InvalidParameter):
        build_qstar(ZetaLaw(1.0), correlations(MovingAverage((1 / math.sqrt(7),) * 7)), 1.0)
