"""Inter-arrival laws of the underlying renewal process.

Two families are provided:

* :class:`ZetaLaw`, ``K(n) = (1 - K(inf)) n^-(1+alpha) / zeta(1+alpha)``;
* :class:`TableLaw`, user supplied masses ``K(1..M)`` extended by a geometric
  tail carrying the leftover mass, so that ``K(n) > 0`` for every ``n``.

Both expose the quantities the transfer-matrix machinery needs: point masses,
tail sums, the conditional law beyond the cemetery threshold and its
Laplace transform.
"""

from __future__ import annotations

import math
from typing import Union

import mpmath
import numpy as np

from .errors import InvalidParameter

STAR = "*"
"""Cemetery state: any gap strictly larger than the correlation range."""

Gap = Union[int, str]

DEFAULT_N_MAX = 10_000

# B_2, B_4, ..., B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
_EM_START = 20


def _em_power_tail(s, N, terms=6):
    """Euler-Maclaurin estimate of sum_{n>=N} n^-s and a bound on its remainder."""
    total = N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    rising = s  # s (s+1) ... (s+2k-2)
    fact = 2.0
    for k in range(1, terms + 1):
        if k > 1:
            rising *= (s + 2 * k - 3) * (s + 2 * k - 2)
            fact *= (2 * k - 1) * (2 * k)
        total += _BERNOULLI[k - 1] / fact * rising * N ** (-s - 2 * k + 1)
    k = terms + 1
    rising *= (s + 2 * k - 3) * (s + 2 * k - 2)
    fact *= (2 * k - 1) * (2 * k)
    remainder = abs(_BERNOULLI[k - 1] / fact * rising * N ** (-s - 2 * k + 1))
    return total, remainder


def power_tail(s, N):
    """Return ``sum_{n >= N} n^-s`` for ``s > 1`` and integer ``N >= 1``."""
    if s <= 1.0:
        raise InvalidParameter(f"power series diverges for exponent {s}")
    N = int(N)
    head = 0.0
    if N < _EM_START:
        head = math.fsum(n ** (-s) for n in range(N, _EM_START))
        N = _EM_START
    tail, _ = _em_power_tail(s, N)
    return head + tail


def zeta(s):
    """Riemann zeta function for real ``s > 1`` (partial sum + Euler-Maclaurin)."""
    return power_tail(s, 1)


def cap(t: Gap, q: int) -> Gap:
    """Map a gap to ``E = {1, ..., q, STAR}``."""
    if q < 0:
        raise InvalidParameter("q must be nonnegative")
    if t == STAR:
        return STAR
    return t if t <= q else STAR


def star_add(a: Gap, b: Gap) -> Gap:
    """Addition on ``E`` in which STAR is absorbing."""
    if a == STAR or b == STAR:
        return STAR
    return a + b


class InterArrivalLaw:
    """Base class. Subclasses define ``pmf``, ``tail`` and the beyond-threshold helpers."""

    alpha: float
    k_infinity: float
    n_max: int

    def mass(self, n):
        """``K(n)`` for an integer or integer array ``n >= 1``."""
        raise NotImplementedError

    def pmf(self, N):
        """Array ``p`` of length ``N + 1`` with ``p[n] = K(n)`` and ``p[0] = 0``."""
        p = np.zeros(N + 1)
        if N >= 1:
            p[1:] = self.mass(np.arange(1, N + 1))
        return p

    def tail(self, T):
        """``sum_{n > T} K(n)``."""
        raise NotImplementedError

    def tail_bound(self, T):
        """Certified upper bound on ``tail(T)``."""
        raise NotImplementedError

    def k_star(self, q):
        """Mass of the cemetery class, ``K(STAR) = sum_{n > q} K(n)``."""
        return self.tail(q)

    def class_mass(self, t: Gap, q: int):
        """``K(t*)`` for ``t*`` in ``{1, ..., q, STAR}``."""
        return self.k_star(q) if t == STAR else float(self.mass(t))

    def beyond_first_moment(self, q):
        """``sum_{n > q} n K(n)``; ``inf`` when the law has no first moment."""
        raise NotImplementedError

    def mean_beyond(self, q):
        """``E[T | q < T < inf]``."""
        return self.beyond_first_moment(q) / self.k_star(q)

    def laplace_tail(self, F, q):
        """``sum_{n > q} exp(-F n) K(n)`` for ``F > 0``."""
        return math.exp(self.log_laplace_tail(F, q))

    def log_laplace_tail(self, F, q):
        """Logarithm of :meth:`laplace_tail`, safe for large ``F``."""
        raise NotImplementedError

    def sample_beyond(self, rng, q, size):
        """Draw ``size`` gaps from ``K(. | T > q)``."""
        raise NotImplementedError

    def hat(self) -> "InterArrivalLaw":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def recurrent(self):
        return self.k_infinity == 0.0

    def total_mass(self):
        """Head mass up to ``n_max`` plus tail plus escape mass; equals 1."""
        head = math.fsum(self.pmf(self.n_max)[1:])
        return head + self.tail(self.n_max) + self.k_infinity

    def _inverse_beyond(self, rng, q, size, far_sampler):
        """Inversion on ``q < n <= n_max`` and ``far_sampler`` for ``n > n_max``."""
        lo = q + 1
        if lo > self.n_max:
            return far_sampler(rng, lo, size)
        head = self.mass(np.arange(lo, self.n_max + 1))
        cdf = np.cumsum(head) / self.k_star(q)
        u = rng.random(size)
        out = np.searchsorted(cdf, u, side="right") + lo
        far = out > self.n_max
        if far.any():
            out[far] = far_sampler(rng, self.n_max + 1, int(far.sum()))
        return out.astype(np.int64)


def _check_common(alpha, k_infinity):
    if not alpha > 0:
        raise InvalidParameter(f"alpha must be positive, got {alpha}")
    if not 0.0 <= k_infinity < 1.0:
        raise InvalidParameter(f"k_infinity must lie in [0, 1), got {k_infinity}")


class ZetaLaw(InterArrivalLaw):
    """``K(n) = (1 - k_infinity) n^-(1+alpha) / zeta(1+alpha)``."""

    family = "zeta"

    def __init__(self, alpha, k_infinity=0.0, n_max=DEFAULT_N_MAX):
        alpha = float(alpha)
        k_infinity = float(k_infinity)
        _check_common(alpha, k_infinity)
        if n_max < 3:
            raise InvalidParameter("n_max must be at least 3")
        self.alpha = alpha
        self.k_infinity = k_infinity
        self.n_max = int(n_max)
        self._s = 1.0 + alpha
        self._c = (1.0 - k_infinity) / zeta(self._s)

    def __repr__(self):
        return f"ZetaLaw(alpha={self.alpha}, k_infinity={self.k_infinity}, n_max={self.n_max})"

    def __eq__(self, other):
        return isinstance(other, ZetaLaw) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.alpha, self.k_infinity, self.n_max))

    def mass(self, n):
        n = np.asarray(n, dtype=float)
        if np.any(n < 1):
            raise InvalidParameter("masses are defined for n >= 1")
        out = self._c * n ** (-self._s)
        return float(out) if out.ndim == 0 else out

    def tail(self, T):
        return self._c * power_tail(self._s, int(T) + 1)

    def tail_bound(self, T):
        N = int(T) + 1
        if N < _EM_START:
            return self.tail(T) * (1 + 1e-15)
        est, rem = _em_power_tail(self._s, N)
        return self._c * (est + rem) * (1 + 1e-15)

    def integral_tail_bound(self, T):
        """Cruder bound ``c * int_T^inf x^-(1+alpha) dx``."""
        return self._c * T ** (-self.alpha) / self.alpha

    def beyond_first_moment(self, q):
        if self.alpha <= 1.0:
            return math.inf
        return self._c * power_tail(self.alpha, q + 1)

    def log_laplace_tail(self, F, q):
        if not F > 0:
            raise InvalidParameter("F must be positive")
        s = self._s
        lo = q + 1
        if F >= 0.05:
            hi = lo + int(math.ceil(45.0 / F)) + 1
            n = np.arange(lo, hi, dtype=float)
            shifted = math.fsum(np.exp(-F * (n - lo)) * n ** (-s))
            return math.log(self._c) - F * lo + math.log(shifted)
        M = max(lo, 200)
        n = np.arange(lo, M, dtype=float)
        head = math.fsum(np.exp(-F * n) * n ** (-s)) if n.size else 0.0
        return math.log(self._c * (head + _em_exp_power_tail(F, s, M)))

    def sample_beyond(self, rng, q, size):
        return self._inverse_beyond(rng, q, size, self._sample_far)

    def _sample_far(self, rng, lo, size):
        # Pareto proposal floor(X), X ~ x^-s on [lo, inf); accept n^-s / (M * int_n^{n+1} x^-s dx).
        s = self._s
        out = np.empty(size, dtype=np.int64)
        filled = 0
        bound = ((lo + 1.0) / lo) ** s
        while filled < size:
            m = size - filled
            x = lo * rng.random(m) ** (-1.0 / self.alpha)
            n = np.floor(x)
            cell = (n ** (1 - s) - (n + 1) ** (1 - s)) / (s - 1)
            accept = rng.random(m) * bound * cell <= n ** (-s)
            k = int(accept.sum())
            out[filled:filled + k] = n[accept].astype(np.int64)
            filled += k
        return out

    def hat(self):
        if self.k_infinity == 0.0:
            return self
        return ZetaLaw(self.alpha, 0.0, self.n_max)

    def to_dict(self):
        return {"family": "zeta", "alpha": self.alpha, "k_infinity": self.k_infinity, "n_max": self.n_max}


def _em_exp_power_tail(F, s, M, terms=5):
    """``sum_{n >= M} exp(-F n) n^-s`` by Euler-Maclaurin; exact incomplete-gamma integral."""
    integral = float(mpmath.power(F, s - 1) * mpmath.gammainc(1 - s, F * M))

    def deriv(m):
        # d^m/dx^m of exp(-F x) x^-s at x = M
        acc = 0.0
        rising = 1.0
        for j in range(m + 1):
            if j > 0:
                rising *= s + j - 1
            acc += math.comb(m, j) * (-F) ** (m - j) * (-1) ** j * rising * M ** (-s - j)
        return math.exp(-F * M) * acc

    total = integral + 0.5 * math.exp(-F * M) * M ** (-s)
    fact = 1.0
    for k in range(1, terms + 1):
        fact *= (2 * k - 1) * (2 * k)
        total -= _BERNOULLI[k - 1] / fact * deriv(2 * k - 1)
    return total


class TableLaw(InterArrivalLaw):
    """Tabulated masses ``K(1..M)`` with a geometric continuation.

    The mass ``r = 1 - K(inf) - sum K(1..M)`` must be positive; it is spread as
    ``K(M + j) = K(M) theta^j`` with ``theta = r / (K(M) + r)``.
    """

    family = "table"

    def __init__(self, masses, k_infinity=0.0, n_max=None):
        head = np.asarray(masses, dtype=float)
        k_infinity = float(k_infinity)
        if head.ndim != 1 or head.size == 0:
            raise InvalidParameter("mass table must be a nonempty list")
        if not np.all(np.isfinite(head)) or np.any(head <= 0):
            raise InvalidParameter("every tabulated mass K(n) must be positive")
        if not 0.0 <= k_infinity < 1.0:
            raise InvalidParameter(f"k_infinity must lie in [0, 1), got {k_infinity}")
        rest = 1.0 - k_infinity - math.fsum(head)
        if rest <= 0:
            raise InvalidParameter(
                "mass table leaves no mass for n > M; K(n) > 0 is required for every n"
            )
        self.head = head
        self.k_infinity = k_infinity
        self.rest = rest
        self.M = head.size
        self.theta = rest / (head[-1] + rest)
        self.n_max = int(n_max) if n_max is not None else max(self.M, DEFAULT_N_MAX)
        self.alpha = math.inf  # exponential tail: every moment is finite

    def __repr__(self):
        return f"TableLaw(M={self.M}, k_infinity={self.k_infinity})"

    def mass(self, n):
        n_arr = np.asarray(n, dtype=np.int64)
        if np.any(n_arr < 1):
            raise InvalidParameter("masses are defined for n >= 1")
        idx = np.minimum(n_arr, self.M) - 1
        out = np.where(
            n_arr <= self.M,
            self.head[idx],
            self.head[-1] * self.theta ** (n_arr - self.M).astype(float),
        )
        return float(out) if out.ndim == 0 else out

    def tail(self, T):
        T = int(T)
        if T >= self.M:
            return self.head[-1] * self.theta ** (T - self.M + 1) / (1 - self.theta)
        return math.fsum(self.head[T:]) + self.rest

    def tail_bound(self, T):
        return self.tail(T) * (1 + 1e-15)

    def beyond_first_moment(self, q):
        km, th, M = self.head[-1], self.theta, self.M
        geo = km * (M * th / (1 - th) + th / (1 - th) ** 2)
        if q >= M:
            # subtract n = M+1..q from the geometric part
            n = np.arange(M + 1, q + 1)
            return geo - math.fsum(n * self.mass(n)) if n.size else geo
        n = np.arange(q + 1, M + 1)
        return math.fsum(n * self.head[q:]) + geo

    def log_laplace_tail(self, F, q):
        if not F > 0:
            raise InvalidParameter("F must be positive")
        km, th, M = self.head[-1], self.theta, self.M
        lo = q + 1
        r = th * math.exp(-F)
        if q >= M:
            # geometric from lo: sum_{n>=lo} K(M) theta^(n-M) exp(-F n)
            return math.log(km) + (lo - M) * math.log(th) - F * lo - math.log1p(-r)
        n = np.arange(lo, M + 1)
        head = math.fsum(np.exp(-F * (n - lo)) * self.head[q:])
        geo = km * math.exp(-F * (M - lo)) * r / (1 - r)
        return -F * lo + math.log(head + geo)

    def sample_beyond(self, rng, q, size):
        return self._inverse_beyond(rng, q, size, self._sample_far)

    def _sample_far(self, rng, lo, size):
        # n > lo - 1 beyond the head is geometric with ratio theta
        if lo <= self.M:
            raise AssertionError("far sampling starts beyond the table")
        return (lo - 1 + rng.geometric(1 - self.theta, size)).astype(np.int64)

    def hat(self):
        if self.k_infinity == 0.0:
            return self
        scale = 1.0 / (1.0 - self.k_infinity)
        return TableLaw(self.head * scale, 0.0, self.n_max)

    def to_dict(self):
        return {"family": "table", "masses": self.head.tolist(), "k_infinity": self.k_infinity}


def build_zeta_law(alpha, k_infinity=0.0, n_max=DEFAULT_N_MAX) -> ZetaLaw:
    return ZetaLaw(alpha, k_infinity, n_max)


def hat(law: InterArrivalLaw) -> InterArrivalLaw:
    """Recurrent normalization ``K / (1 - K(inf))``."""
    return law.hat()


def law_from_dict(doc: dict) -> InterArrivalLaw:
    family = doc.get("family", "zeta")
    if family == "zeta":
        return ZetaLaw(doc["alpha"], doc.get("k_infinity", 0.0), doc.get("n_max", DEFAULT_N_MAX))
    if family == "table":
        return TableLaw(doc["masses"], doc.get("k_infinity", 0.0), doc.get("n_max"))
    raise InvalidParameter(f"unknown law family {family!r}")


def renewal_mass(law_hat: InterArrivalLaw, n: int) -> np.ndarray:
    """``u[m] = P(m in tau)`` for ``m = 0..n`` via ``u_m = sum_k K(k) u_{m-k}``."""
    if not law_hat.recurrent:
        raise InvalidParameter("renewal_mass needs a recurrent law; apply hat() first")
    if n < 0:
        raise InvalidParameter("n must be nonnegative")
    K = law_hat.pmf(n)
    u = np.zeros(n + 1)
    u[0] = 1.0
    for m in range(1, n + 1):
        u[m] = np.dot(K[1:m + 1], u[m - 1::-1])
    return u
