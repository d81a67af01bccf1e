"""Ground-truth evaluations of the constrained annealed partition function

    Z_N = E[ exp((h + beta^2/2) i_N + beta^2 sum_{i<j<=N} rho_{j-i} delta_i delta_j) delta_N ]

by exhaustive enumeration, by a forward recursion over capped gap states, and
by averaging exact quenched partition functions over sampled disorder.
Long recursions keep each row as mantissas times a power of two; short
ones work directly with log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disorder import CorrelationProfile, MovingAverage, make_rng, sample_omega_batch
from .errors import InvalidParameter
from .kernels import STAR, InterArrivalLaw
from .transfer import _successors, decode, encode, n_states

MAX_ENUM_N = 22
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PartitionValue:
    N: int
    beta: float
    h: float
    log_value: float
    method: str
    stderr: float = 0.0

    @property
    def value(self):
        return math.exp(self.log_value)


def _logsumexp(x, axis=None):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else float(out.ravel()[0])


def _log_pmf(law, N):
    # K(n) > 0 for n >= 1; index 0 maps to -inf
    with np.errstate(divide="ignore"):
        return np.log(law.pmf(N))


def exact_enum_z(law: InterArrivalLaw, rho: CorrelationProfile, beta, h, N) -> PartitionValue:
    """Sum over every contact set ``A subset {1..N}`` with ``N in A``."""
    if not 1 <= N <= MAX_ENUM_N:
        raise InvalidParameter(f"enumeration is limited to 1 <= N <= {MAX_ENUM_N}")
    free = N - 1
    codes = np.arange(2 ** free, dtype=np.int64)
    bits = np.ones((codes.size, N), dtype=bool)
    for i in range(free):
        bits[:, i] = (codes >> i) & 1
    logK = _log_pmf(law, N)
    b2 = beta * beta
    logw = (h + 0.5 * b2) * bits.sum(axis=1)
    for k in range(1, min(rho.q, N - 1) + 1):
        logw = logw + b2 * rho(k) * np.sum(bits[:, :-k] & bits[:, k:], axis=1)
    last = np.zeros(codes.size, dtype=np.int64)
    for n in range(1, N + 1):
        on = bits[:, n - 1]
        logw = logw + np.where(on, logK[n - last], 0.0)
        last = np.where(on, n, last)
    return PartitionValue(N, float(beta), float(h), _logsumexp(logw), "enum")


def _reversed_g(rho: CorrelationProfile):
    """Correlation of a new contact with the q previous ones, indexed by the new state.

    For state ``(s_1, ..., s_{q-1}, g)`` this is
    ``rho_g + rho_{g + s_{q-1}} + ... + rho_{g + s_{q-1} + ... + s_1}``.
    """
    q = rho.q
    out = np.zeros(n_states(q))
    for i in range(out.size):
        acc = 0
        total = 0.0
        for t in reversed(decode(i, q)):
            acc = STAR if (acc == STAR or t == STAR) else acc + t
            total += rho(acc)
        out[i] = total
    return out


def dp_scaled_z_all(law: InterArrivalLaw, rho: CorrelationProfile, beta, h, N):
    """``Z_n = mant[n] * 2**ex[n]`` for ``n = 0..N`` by the capped-state forward recursion.

    Row ``n`` of the state table is stored as mantissas times ``2**ex[n]``;
    rescaling by powers of two is exact, so rounding does not accumulate with ``n``.
    """
    if N < 0:
        raise InvalidParameter("N must be nonnegative")
    q = rho.q
    S = n_states(q)
    succ = _successors(q)
    b2 = beta * beta
    base = h + 0.5 * b2
    factor = np.exp(base + b2 * _reversed_g(rho))[succ]
    first = math.exp(base)
    K = law.pmf(max(N, 1))
    start = encode((STAR,) * q, q)
    targets = succ.ravel()
    z = np.zeros((N + 1, S))
    ex = np.zeros(N + 1, dtype=np.int64)
    mant = np.zeros(N + 1)
    mant[0] = 1.0
    for n in range(1, N + 1):
        ref = max(int(ex[1:n].max()) if n > 1 else 0, 0)
        scale = np.ldexp(1.0, ex[:n] - ref)
        vals = np.zeros((S, q + 1))
        for e in range(1, min(q, n - 1) + 1):
            vals[:, e - 1] = z[n - e] * (scale[n - e] * K[e])
        if n - q - 1 >= 1:
            vals[:, q] = (scale[1:n - q] * K[n - 1:q:-1]) @ z[1:n - q]
        row = np.bincount(targets, weights=(vals * factor).ravel(), minlength=S)
        row[start] += K[n] * first * math.ldexp(1.0, -ref)
        _, e = math.frexp(row.max())
        z[n] = np.ldexp(row, -e)
        ex[n] = ref + e
        mant[n] = z[n].sum()
    return mant, ex


def to_log(mant, ex):
    return np.log(mant) + ex * _LN2


def relative_gap(a, b):
    """``|Z_a / Z_b - 1|`` for scaled pairs ``(mant, ex)`` without leaving the scaled form."""
    (ma, ea), (mb, eb) = a, b
    return np.abs(np.ldexp(ma, ea - eb) / mb - 1.0)


def dp_log_z_all(law, rho, beta, h, N):
    """``log Z_n`` for ``n = 0..N``."""
    return to_log(*dp_scaled_z_all(law, rho, beta, h, N))


def dp_z(law, rho, beta, h, N) -> PartitionValue:
    return PartitionValue(N, float(beta), float(h), float(dp_log_z_all(law, rho, beta, h, N)[N]), "dp")


def homogeneous_scaled_z(law: InterArrivalLaw, h, N):
    """``Z_n = sum_t K(t) e^h Z_{n-t}``, ``Z_0 = 1``, as ``(mant, ex)`` for ``n = 0..N``."""
    K = law.pmf(max(N, 1))
    w = math.exp(h)
    z = np.zeros(N + 1)
    ex = np.zeros(N + 1, dtype=np.int64)
    z[0] = 1.0
    for n in range(1, N + 1):
        ref = int(ex[:n].max())
        val = np.dot(K[1:n + 1], (z[:n] * np.ldexp(1.0, ex[:n] - ref))[::-1]) * w
        m, e = math.frexp(val)
        z[n], ex[n] = m, ref + e
    return z, ex


def homogeneous_log_z(law, h, N):
    return to_log(*homogeneous_scaled_z(law, h, N))


def quenched_log_z(law: InterArrivalLaw, omega, beta, h, N):
    """Exact quenched ``log Z^c_N`` for each row of ``omega`` (shape ``(B, >=N)``)."""
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if omega.shape[1] < N:
        raise InvalidParameter("disorder path is shorter than N")
    logK = _log_pmf(law, max(N, 1))
    lz = np.full((omega.shape[0], N + 1), -np.inf)
    lz[:, 0] = 0.0
    for n in range(1, N + 1):
        w = lz[:, n - 1::-1] + logK[1:n + 1][None, :]
        lz[:, n] = beta * omega[:, n - 1] + h + _logsumexp(w, axis=1)
    return lz[:, N]


def quenched_dp_z(law, omega, beta, h, N) -> PartitionValue:
    lz = quenched_log_z(law, np.asarray(omega)[None, :N], beta, h, N)
    return PartitionValue(N, float(beta), float(h), float(lz[0]), "quenched")


def mc_annealed_z(law, ma: MovingAverage, beta, h, N, samples, seed, chunk=100_000) -> PartitionValue:
    """Disorder average of the quenched partition function, with its standard error."""
    if samples < 100:
        raise InvalidParameter("at least 100 disorder samples are required")
    rng = make_rng(seed)
    parts = []
    left = samples
    while left > 0:
        m = min(chunk, left)
        omega = sample_omega_batch(ma, N, m, rng)
        parts.append(quenched_log_z(law, omega, beta, h, N))
        left -= m
    lz = np.concatenate(parts)
    shift = lz.max()
    x = np.exp(lz - shift)
    mean = x.mean()
    err = x.std(ddof=1) / math.sqrt(samples)
    return PartitionValue(N, float(beta), float(h), shift + math.log(mean), "mc", float(err * math.exp(shift)))


@dataclass(frozen=True)
class GrowthEstimate:
    estimate: float
    spread: float
    pairs: tuple = field(repr=False)


def growth_rate_detail(law, rho, beta, h, N_grid) -> GrowthEstimate:
    grid = [int(n) for n in N_grid]
    if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("N_grid must be increasing with at least 3 points")
    lz = dp_log_z_all(law, rho, beta, h, grid[-1])
    rates = tuple((lz[b] - lz[a]) / (b - a) for a, b in zip(grid, grid[1:]))
    return GrowthEstimate(rates[-1], max(rates) - min(rates), rates)


def growth_rate(law, rho, beta, h, N_grid):
    """Estimate ``lim log Z_N / N`` by the slope of ``log Z`` between the two largest horizons."""
    return growth_rate_detail(law, rho, beta, h, N_grid).estimate


def pair_energy(contacts, rho: CorrelationProfile, N):
    """``sum_{1 <= i < j <= N} rho_{j-i} delta_i delta_j`` for a set of contact sites."""
    pts = np.asarray([c for c in contacts if 1 <= c <= N])
    total = 0.0
    for k in range(1, rho.q + 1):
        total += rho(k) * np.intersect1d(pts, pts + k).size
    return total


def block_energy(gaps, rho: CorrelationProfile, N):
    """``sum_{n=1}^{i_N} G(T_n, ..., T_{n+q-1})`` along a gap sequence starting at 0."""
    gaps = list(gaps)
    pos = np.cumsum(gaps)
    i_N = int(np.searchsorted(pos, N, side="right"))
    q = rho.q
    total = 0.0
    for n in range(1, i_N + 1):
        acc = 0
        for t in gaps[n:n + q]:
            acc += t
            total += rho(acc)
    return total
