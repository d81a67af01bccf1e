"""Moving-average Gaussian disorder ``omega_n = sum_k a_k eps_{n-k}``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .kernels import STAR

NORM_TOL = 1e-12
CLI_NORM_TOL = 1e-6


def make_rng(seed):
    """Counter-based generator; identical output on every platform for a given seed."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class MovingAverage:
    coeffs: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.coeffs)
        if not a:
            raise InvalidParameter("at least one coefficient is required")
        if not all(math.isfinite(x) for x in a):
            raise InvalidParameter("coefficients must be finite")
        norm = math.fsum(x * x for x in a)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameter(f"coefficients must have unit norm, got sum a_k^2 = {norm!r}")
        object.__setattr__(self, "coeffs", a)

    @property
    def q(self):
        return len(self.coeffs) - 1

    @classmethod
    def from_string(cls, text, tol=CLI_NORM_TOL):
        """Parse ``"a0,a1,..."``; renormalize when within ``tol`` of unit norm."""
        try:
            a = [float(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise InvalidParameter(f"cannot parse coefficients {text!r}") from exc
        return cls.normalized(a, tol)

    @classmethod
    def normalized(cls, coeffs, tol=CLI_NORM_TOL):
        a = np.asarray(coeffs, dtype=float)
        if a.size == 0:
            raise InvalidParameter("at least one coefficient is required")
        norm = float(np.sqrt(np.sum(a * a)))
        if abs(norm * norm - 1.0) > tol:
            raise InvalidParameter(f"coefficients are not unit norm (sum a_k^2 = {norm * norm!r})")
        return cls(tuple(a / norm))

    @classmethod
    def from_rho1(cls, rho1):
        """Order-one average with lag-one correlation ``rho1``, ``|rho1| <= 1/2``."""
        if abs(rho1) > 0.5:
            raise InvalidParameter("an order-one moving average has |rho_1| <= 1/2")
        a0 = math.sqrt((1 + math.sqrt(1 - 4 * rho1 * rho1)) / 2)
        return cls.normalized((a0, rho1 / a0), tol=1e-12)


@dataclass(frozen=True)
class CorrelationProfile:
    """``rho_0..rho_q``; ``rho_n = 0`` for ``n > q`` and ``rho_STAR = 0``."""

    rho: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.rho)
        if not r or abs(r[0] - 1.0) > NORM_TOL:
            raise InvalidParameter("rho_0 must equal 1")
        if any(abs(x) > 1.0 + NORM_TOL for x in r):
            raise InvalidParameter("correlations must satisfy |rho_n| <= 1")
        object.__setattr__(self, "rho", r)

    @property
    def q(self):
        return len(self.rho) - 1

    def __call__(self, n):
        if n == STAR or n > self.q:
            return 0.0
        return self.rho[n]

    def max_abs(self):
        return max((abs(x) for x in self.rho[1:]), default=0.0)

    def toeplitz(self, size):
        r = np.zeros(size)
        m = min(size, self.q + 1)
        r[:m] = self.rho[:m]
        idx = np.abs(np.subtract.outer(np.arange(size), np.arange(size)))
        return r[idx]


def correlations(ma: MovingAverage) -> CorrelationProfile:
    a = ma.coeffs
    q = ma.q
    rho = [math.fsum(a[k] * a[k + n] for k in range(q - n + 1)) for n in range(q + 1)]
    rho[0] = 1.0
    return CorrelationProfile(tuple(rho))


def sample_omega_batch(ma: MovingAverage, n, size, rng):
    """``size`` independent paths ``(omega_1..omega_n)``, shape ``(size, n)``."""
    eps = rng.standard_normal((size, n + ma.q))
    a = np.asarray(ma.coeffs)
    # omega_{i+1} = sum_k a_k eps[i + q - k]
    out = np.zeros((size, n))
    for k, ak in enumerate(a):
        out += ak * eps[:, ma.q - k: ma.q - k + n]
    return out


def sample_omega(ma: MovingAverage, n, seed):
    if n < 1:
        raise InvalidParameter("path length must be positive")
    return sample_omega_batch(ma, n, 1, make_rng(seed))[0]
