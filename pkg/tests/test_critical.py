import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from corrpin.critical import (
    beta_grid,
    closed_form_h_c_ann,
    closed_form_q1,
    closed_form_q2,
    curve_point,
    h_c_zero,
    q2_phi_psi,
    sweep,
    weak_disorder_slope,
)
from corrpin.disorder import CorrelationProfile, MovingAverage, correlations
from corrpin.errors import InvalidParameter
from corrpin.kernels import ZetaLaw
from corrpin.transfer import build_qstar

RHO2 = correlations(MovingAverage((0.8, 0.36, 0.48)))


def test_beta_zero():
    cp = curve_point(ZetaLaw(1.0), RHO2, 0.0)
    assert cp.lam == pytest.approx(1.0, abs=1e-15)
    assert cp.Lambda == pytest.approx(0.0, abs=1e-15) and cp.h_c_ann == pytest.approx(0.0, abs=1e-15)


def test_iid_disorder():
    law = ZetaLaw(1.0, 0.2)
    rho = CorrelationProfile((1.0,))
    for b in (0.0, 0.7, 2.0):
        assert curve_point(law, rho, b).h_c_ann == pytest.approx(h_c_zero(law) - b * b / 2, abs=1e-15)
        assert closed_form_h_c_ann(law, rho, b) == pytest.approx(h_c_zero(law) - b * b / 2)


def test_escape_mass_shifts_curve():
    rho = RHO2
    for b in (0.3, 1.4):
        a = curve_point(ZetaLaw(1.2), rho, b)
        c = curve_point(ZetaLaw(1.2, 0.4), rho, b)
        assert c.Lambda == pytest.approx(a.Lambda, rel=1e-13)
        assert c.h_c_ann - a.h_c_ann == pytest.approx(-math.log(0.6), rel=1e-13)


def test_q1_closed_form_value():
    law = ZetaLaw(1.0)
    rho = CorrelationProfile((1.0, 0.5))
    k1 = 6 / math.pi ** 2
    expected = -0.5 - math.log(1 + k1 * (math.exp(0.5) - 1))
    assert closed_form_q1(law, rho, 1.0) == pytest.approx(expected, rel=1e-15)
    assert curve_point(law, rho, 1.0).h_c_ann == pytest.approx(expected, rel=1e-12)


def test_q2_closed_form_matches_dense_eigenvalue():
    law = ZetaLaw(0.7)
    for b in (0.2, 1.0, 1.9):
        lam = np.max(np.abs(np.linalg.eigvals(build_qstar(law, RHO2, b).entries)))
        assert closed_form_q2(law, RHO2, b) == pytest.approx(b * b / 2 + math.log(lam), rel=1e-12)
        phi, psi = q2_phi_psi(law, RHO2, b)
        assert 0 <= psi <= phi * phi


def test_closed_form_range_checks():
    law = ZetaLaw(1.0)
    with pytest.raises(InvalidParameter):
        closed_form_q1(law, RHO2, 1.0)
    with pytest.raises(InvalidParameter):
        closed_form_q2(law, CorrelationProfile((1.0, 0.2)), 1.0)
    assert closed_form_h_c_ann(law, correlations(MovingAverage((0.5,) * 4)), 1.0) is None


def test_slope_q1():
    law = ZetaLaw(1.5, 0.3)
    rho = CorrelationProfile((1.0, -0.4))
    assert weak_disorder_slope(law, rho) == pytest.approx(1 - 0.8 * float(law.hat().mass(1)), rel=1e-15)
    assert weak_disorder_slope(law, RHO2, n_terms=0) == 1.0


def test_positive_correlations_raise_lambda():
    law = ZetaLaw(1.0)
    pts = sweep(law, RHO2, beta_grid(2.0, 21))
    assert all(p.Lambda >= p.beta ** 2 / 2 - 1e-15 for p in pts)
    assert all(b.Lambda > a.Lambda for a, b in zip(pts, pts[1:]))


def test_negative_correlations_lower_lambda():
    law = ZetaLaw(1.0)
    rho = CorrelationProfile((1.0, -0.4))
    for b in (0.5, 1.5):
        assert curve_point(law, rho, b).Lambda < b * b / 2


def test_parallel_sweep_matches_serial():
    law = ZetaLaw(1.0)
    betas = beta_grid(2.0, 15)
    with ThreadPoolExecutor(4) as pool:
        par = sweep(law, RHO2, betas, executor=pool)
    assert [p.h_c_ann for p in par] == [p.h_c_ann for p in sweep(law, RHO2, betas)]


def test_beta_grid():
    g = beta_grid()
    assert g.size == 101 and g[0] == 0.0 and g[-1] == 2.0
