"""Annealed critical curve ``h_c^ann(beta) = h_c(0) - Lambda(beta)``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .disorder import CorrelationProfile
from .errors import InvalidParameter, NumericalInconsistency
from .kernels import InterArrivalLaw, renewal_mass
from .transfer import DEFAULT_TOL, build_qstar, perron

SQRT_CLAMP = 1e-12
RATIO_LIMIT = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    beta: float
    lam: float
    Lambda: float
    h_c_ann: float
    h_c_zero: float

    def as_dict(self):
        return asdict(self)


def h_c_zero(law: InterArrivalLaw):
    return -math.log1p(-law.k_infinity)


def curve_point(law, rho: CorrelationProfile, beta, tol=DEFAULT_TOL) -> CurvePoint:
    sp = perron(build_qstar(law, rho, beta), tol, invariant=False)
    Lam = 0.5 * beta * beta + math.log(sp.lam)
    hc0 = h_c_zero(law)
    return CurvePoint(float(beta), sp.lam, Lam, hc0 - Lam, hc0)


def _khat(law, n):
    return float(law.mass(n)) / (1.0 - law.k_infinity)


def closed_form_q1(law, rho: CorrelationProfile, beta):
    """``h_c(0) - beta^2/2 - log(1 + K_hat(1)(exp(rho_1 beta^2) - 1))``."""
    if rho.q != 1:
        raise InvalidParameter("the q = 1 formula needs a range-one profile")
    b2 = beta * beta
    return h_c_zero(law) - 0.5 * b2 - math.log1p(_khat(law, 1) * math.expm1(rho(1) * b2))


def q2_phi_psi(law, rho: CorrelationProfile, beta):
    b2 = beta * beta
    k1, k2 = _khat(law, 1), _khat(law, 2)
    r1, r2 = rho(1), rho(2)
    phi = 1.0 + k1 * math.expm1((r1 + r2) * b2) + k2 * math.expm1(r2 * b2)
    psi = (
        4.0 * k1 * (1.0 - k1) * math.exp(r1 * b2) * math.expm1(r2 * b2)
        * (1.0 + k2 / (1.0 - k1) * math.expm1(r2 * b2))
    )
    return phi, psi


def closed_form_q2(law, rho: CorrelationProfile, beta):
    """``Lambda(beta)`` for range-two correlations from the explicit quadratic root."""
    if rho.q != 2:
        raise InvalidParameter("the q = 2 formula needs a range-two profile")
    phi, psi = q2_phi_psi(law, rho, beta)
    ratio = psi / (phi * phi)
    if ratio > 1.0 + RATIO_LIMIT:
        raise NumericalInconsistency(f"psi / phi^2 = {ratio} exceeds 1")
    disc = 1.0 - ratio
    if disc < 0.0:
        if disc < -SQRT_CLAMP:
            raise NumericalInconsistency(f"negative discriminant {disc}")
        disc = 0.0
    return 0.5 * beta * beta + math.log(phi) + math.log((1.0 + math.sqrt(disc)) / 2.0)


def closed_form_h_c_ann(law, rho, beta):
    """Closed-form ``h_c^ann`` when ``q in {0, 1, 2}``, else ``None``."""
    if rho.q == 0:
        return h_c_zero(law) - 0.5 * beta * beta
    if rho.q == 1:
        return closed_form_q1(law, rho, beta)
    if rho.q == 2:
        return h_c_zero(law) - closed_form_q2(law, rho, beta)
    return None


def weak_disorder_slope(law, rho: CorrelationProfile, n_terms=None):
    """``1 + 2 sum_{n=1}^q rho_n P(n in tau_hat)``; ``Lambda(beta) ~ slope * beta^2 / 2``."""
    q = rho.q if n_terms is None else min(n_terms, rho.q)
    u = renewal_mass(law.hat(), q)
    return 1.0 + 2.0 * math.fsum(rho(n) * u[n] for n in range(1, q + 1))


def sweep(law, rho, betas, tol=DEFAULT_TOL, executor=None):
    """Curve points in grid order; ``executor`` (a ``concurrent.futures`` pool) is optional."""
    fn = lambda b: curve_point(law, rho, b, tol)  # noqa: E731
    if executor is None:
        return [fn(b) for b in betas]
    return list(executor.map(fn, betas))


def beta_grid(stop=2.0, points=101):
    return np.linspace(0.0, stop, points)
