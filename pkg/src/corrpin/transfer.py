"""Transfer matrices over the capped gap space ``E^q``, ``E = {1, ..., q, STAR}``.

A state is the q-tuple of the last q capped gaps. States are indexed in base
``q + 1`` with the first entry as the most significant digit; gap ``t`` maps to
digit ``t - 1`` and STAR to digit ``q``. Every row of a transfer matrix has at
most ``q + 1`` nonzero entries, one per value of the incoming gap, so matrices
are stored as a successor table ``succ[s, e]`` and weight table
``weights[s, e]``; :attr:`TransferMatrix.entries` gives the dense form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .disorder import CorrelationProfile
from .errors import InvalidParameter, NumericalFailure
from .kernels import STAR, InterArrivalLaw, cap, star_add

DEFAULT_TOL = 1e-13
MAX_ITER = 1_000_000
MAX_Q = 5


def n_states(q):
    return (q + 1) ** q


def digit(t, q):
    return q if t == STAR else t - 1


def undigit(d, q):
    return STAR if d == q else d + 1


def encode(state, q):
    idx = 0
    for t in state:
        idx = idx * (q + 1) + digit(cap(t, q), q)
    return idx


def decode(index, q):
    out = []
    for _ in range(q):
        index, d = divmod(index, q + 1)
        out.append(undigit(d, q))
    return tuple(reversed(out))


def shift(state, t, q):
    """``(s_1, ..., s_{q-1}, t*)``."""
    return tuple(state[1:]) + (cap(t, q),) if q > 0 else ()


def state_labels(q):
    return ["(" + ",".join(str(t) for t in decode(i, q)) + ")" for i in range(n_states(q))]


def g_value(state, rho: CorrelationProfile):
    """``G(t) = sum_{k<q} rho_{t_0 + ... + t_k}`` with STAR absorbing and ``rho_STAR = 0``."""
    if len(state) != rho.q:
        raise InvalidParameter("state length must equal the correlation range q")
    total = 0.0
    acc = 0
    for t in state:
        acc = star_add(acc, t)
        total += rho(acc)
    return total


@lru_cache(maxsize=16)
def _successors(q):
    S = n_states(q)
    low = (q + 1) ** (q - 1) if q > 0 else 1
    base = (np.arange(S) % low) * (q + 1)
    succ = base[:, None] + np.arange(q + 1)[None, :]
    succ.setflags(write=False)
    return succ


def g_table(rho: CorrelationProfile):
    q = rho.q
    return np.array([g_value(decode(i, q), rho) for i in range(n_states(q))])


def class_masses(law: InterArrivalLaw, q):
    """``K_hat(t*)`` for ``t* = 1, ..., q, STAR`` in digit order."""
    scale = 1.0 - law.k_infinity
    head = [float(law.mass(t)) / scale for t in range(1, q + 1)]
    return np.array(head + [law.k_star(q) / scale])


@dataclass(frozen=True)
class TransferMatrix:
    q: int
    beta: float
    kind: str
    succ: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.succ.shape[0]

    @property
    def entries(self):
        S = self.size
        dense = np.zeros((S, S))
        rows = np.repeat(np.arange(S), self.succ.shape[1])
        np.add.at(dense, (rows, self.succ.ravel()), self.weights.ravel())
        return dense

    def matvec(self, x):
        return np.sum(self.weights * x[self.succ], axis=1)

    def rmatvec(self, y):
        return np.bincount(
            self.succ.ravel(), weights=(self.weights * y[:, None]).ravel(), minlength=self.size
        )

    def row_sums(self):
        return self.weights.sum(axis=1)

    def scaled(self, factors, kind):
        """Multiply column class ``e`` (incoming gap digit) by ``factors[e]``."""
        return TransferMatrix(self.q, self.beta, kind, self.succ, self.weights * np.asarray(factors)[None, :])


def build_qstar(law: InterArrivalLaw, rho: CorrelationProfile, beta) -> TransferMatrix:
    """``Q*_beta(s, t) = exp(beta^2 G(t)) K_hat(t_{q-1})`` on consistent pairs."""
    if beta < 0:
        raise InvalidParameter("beta must be nonnegative")
    q = rho.q
    if q > MAX_Q:
        raise InvalidParameter(f"q = {q} exceeds the supported maximum {MAX_Q}")
    succ = _successors(q)
    energy = np.exp(beta * beta * g_table(rho))
    weights = energy[succ] * class_masses(law, q)[None, :]
    return TransferMatrix(q, float(beta), "Q*", succ, weights)


@dataclass(frozen=True)
class SpectralData:
    q: int
    beta: float
    lam: float
    nu_star: np.ndarray = field(repr=False)
    mu_star: np.ndarray | None = field(repr=False)
    iterations: int
    residual: float

    def to_dict(self):
        return {
            "q": self.q,
            "beta": self.beta,
            "lambda": self.lam,
            "residual": self.residual,
            "iterations": self.iterations,
            "states": state_labels(self.q),
            "nu_star": self.nu_star.tolist(),
            "mu_star": None if self.mu_star is None else self.mu_star.tolist(),
        }


def _right_power(m: TransferMatrix, tol, max_iter):
    x = np.full(m.size, 1.0 / m.size)
    res = math.inf
    for it in range(1, max_iter + 1):
        y = m.matvec(x)
        lam = y.sum()
        if not lam > 0:
            raise NumericalFailure("matrix annihilated the iterate", residual=res)
        # componentwise relative residual bounds the row-sum error of the tilted kernel
        res = np.max(np.abs(y - lam * x) / (lam * x))
        if res <= tol:
            return lam, x, it, res
        x = y / lam
    raise NumericalFailure(f"power iteration did not converge in {max_iter} steps", residual=res)


def _left_power(p: TransferMatrix, tol, max_iter):
    pi = np.full(p.size, 1.0 / p.size)
    res = math.inf
    for _ in range(max_iter):
        nxt = p.rmatvec(pi)
        nxt /= nxt.sum()
        res = np.sum(np.abs(nxt - pi))
        pi = nxt
        if res <= tol:
            return pi, res
    raise NumericalFailure("invariant measure iteration did not converge", residual=res)


def perron(m: TransferMatrix, tol=DEFAULT_TOL, max_iter=MAX_ITER, invariant=True) -> SpectralData:
    """Perron-Frobenius eigenpair by power iteration with unit-sum normalization.

    With ``invariant=True`` the invariant probability of the tilted kernel is
    computed as well.
    """
    lam, nu, it, res = _right_power(m, tol, max_iter)
    mu = None
    if invariant:
        tilt = _tilt(m, lam, nu)
        mu, _ = _left_power(tilt, tol, max_iter)
    return SpectralData(m.q, m.beta, float(lam), nu, mu, it, float(res))


def _tilt(m, lam, nu):
    w = m.weights * nu[m.succ] / (lam * nu[:, None])
    return TransferMatrix(m.q, m.beta, "tilted", m.succ, w)


def tilted_kernel(m: TransferMatrix, s: SpectralData) -> TransferMatrix:
    """Doob transform ``Q(s, t) nu(t) / (lambda nu(s))``; a stochastic matrix."""
    return _tilt(m, s.lam, s.nu_star)


@dataclass(frozen=True)
class InvariantMeasure:
    q: int
    mu_star: np.ndarray = field(repr=False)
    mean_spacing: float
    residual: float
    law: InterArrivalLaw = field(repr=False)

    def mu(self, state):
        """Invariant probability of a concrete gap tuple in ``(N*)^q``."""
        q = self.q
        ratio = 1.0
        for t in state:
            if t > q:
                ratio *= float(self.law.mass(t)) / self.law.k_star(q)
        return ratio * self.mu_star[encode(state, q)]


def invariant_mu(m_tilde: TransferMatrix, law: InterArrivalLaw, tol=DEFAULT_TOL, max_iter=MAX_ITER):
    q = m_tilde.q
    mu, res = _left_power(m_tilde, tol, max_iter)
    first = np.array([decode(i, q)[0] if q > 0 else STAR for i in range(m_tilde.size)], dtype=object)
    star_mean = law.mean_beyond(q)
    spacing = np.array([star_mean if t == STAR else float(t) for t in first])
    c = math.inf if math.isinf(star_mean) else float(np.dot(mu, spacing))
    return InvariantMeasure(q, mu, c, float(res), law)


def product_measure(law: InterArrivalLaw, q):
    """``K_hat^{(x)q}`` on ``E^q``."""
    k = class_masses(law, q)
    out = np.ones(1)
    for _ in range(q):
        out = np.outer(out, k).ravel()
    return out


def is_primitive(m: TransferMatrix):
    """Check that ``m^q`` (``m`` when ``q <= 1``) is entrywise positive."""
    dense = m.entries
    power = np.linalg.matrix_power(dense, max(m.q, 1))
    return bool(np.all(power > 0))


def permuted_lambda(m: TransferMatrix, perm, tol=DEFAULT_TOL):
    """Eigenvalue after relabelling states by ``perm``; used to test index independence."""
    inv = np.argsort(perm)
    succ = inv[m.succ[perm]]
    weights = m.weights[perm]
    return perron(TransferMatrix(m.q, m.beta, m.kind, succ, weights), tol, invariant=False).lam


def all_states(q):
    return list(itertools.product(list(range(1, q + 1)) + [STAR], repeat=q))
