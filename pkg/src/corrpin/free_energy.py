"""Annealed free energy through the exponentially damped tilted kernel.

For ``eps > 0`` the damped matrix ``exp(eps - F phi_F(t*)) Q~*_beta`` has a
Perron-Frobenius eigenvalue ``lambda_F`` that decreases strictly from
``exp(eps)`` at ``F = 0`` to 0. Its unit crossing ``F~(eps)`` is the free energy
of the tilted renewal process at pinning reward ``eps``, and
``F^ann(beta, h) = F~(h - h_c(0) + Lambda(beta))`` above criticality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .critical import h_c_zero
from .errors import InvalidParameter
from .transfer import DEFAULT_TOL, TransferMatrix, build_qstar, perron, tilted_kernel

ROOT_TOL = 1e-12


def phi_f_star(law, F, q, tol=None):
    """Effective length of the cemetery class:
    ``exp(-F phi) K(STAR) = sum_{t>q} exp(-F t) K(t)``.

    ``tol`` is accepted for interface symmetry; the series is summed to
    double precision.
    """
    if not F > 0:
        raise InvalidParameter("phi_F(STAR) is defined for F > 0 only")
    return -(law.log_laplace_tail(F, q) - math.log(law.k_star(q))) / F


@dataclass(frozen=True)
class TiltedFMatrix:
    matrix: TransferMatrix = field(repr=False)
    epsilon: float
    F: float
    phi_star: float


def build_tilted_f(q_tilde: TransferMatrix, law, epsilon, F) -> TiltedFMatrix:
    q = q_tilde.q
    phi = phi_f_star(law, F, q)
    lengths = np.array([float(t) for t in range(1, q + 1)] + [phi])
    factors = np.exp(epsilon - F * lengths)
    return TiltedFMatrix(q_tilde.scaled(factors, "Q~*_F"), float(epsilon), float(F), phi)


def lambda_f(q_tilde: TransferMatrix, law, epsilon, F, tol=DEFAULT_TOL):
    if F == 0:
        return math.exp(epsilon)
    return perron(build_tilted_f(q_tilde, law, epsilon, F).matrix, tol, invariant=False).lam


@dataclass(frozen=True)
class FreeEnergyResult:
    epsilon: float
    f_tilde: float
    bracket: tuple
    lambda_residual: float
    iterations: int
    delocalized: bool = False

    @property
    def bracket_width(self):
        return self.bracket[1] - self.bracket[0]


def f_tilde(q_tilde: TransferMatrix, law, epsilon, tol=ROOT_TOL) -> FreeEnergyResult:
    """Root of ``lambda_F = 1`` by bisection; ``0`` (flagged) when ``epsilon <= 0``."""
    if epsilon <= 0:
        return FreeEnergyResult(float(epsilon), 0.0, (0.0, 0.0), 0.0, 0, delocalized=True)
    lam = lambda F: lambda_f(q_tilde, law, epsilon, F)  # noqa: E731
    lo, hi = 0.0, 1.0
    iterations = 0
    while lam(hi) >= 1.0:
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if hi > 1e6:
            raise InvalidParameter("no root below F = 1e6; epsilon is too large")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if lam(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    root = 0.5 * (lo + hi)
    return FreeEnergyResult(float(epsilon), root, (lo, hi), abs(lam(root) - 1.0), iterations)


def tilted_qstar(law, rho, beta, tol=DEFAULT_TOL):
    """``(Q~*_beta, spectral data of Q*_beta)``."""
    sp = perron(build_qstar(law, rho, beta), tol, invariant=False)
    return tilted_kernel(build_qstar(law, rho, beta), sp), sp


def annealed_lambda(sp, beta):
    return 0.5 * beta * beta + math.log(sp.lam)


@dataclass(frozen=True)
class AnnealedFreeEnergy:
    beta: float
    h: float
    Lambda: float
    epsilon: float
    f_ann: float
    bracket_width: float


def f_ann_detail(law, rho, beta, h, tol=ROOT_TOL) -> AnnealedFreeEnergy:
    qt, sp = tilted_qstar(law, rho, beta)
    Lam = annealed_lambda(sp, beta)
    eps = h - h_c_zero(law) + Lam
    res = f_tilde(qt, law.hat(), eps, tol)
    return AnnealedFreeEnergy(float(beta), float(h), Lam, eps, res.f_tilde, res.bracket_width)


def f_ann(law, rho, beta, h, tol=ROOT_TOL):
    """Annealed free energy; zero for ``h <= h_c(0) - Lambda(beta)``."""
    return f_ann_detail(law, rho, beta, h, tol).f_ann
