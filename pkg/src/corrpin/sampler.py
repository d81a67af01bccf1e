"""Simulation of the tilted ("q-correlated") renewal process.

The first q gaps are i.i.d. with law ``K_hat``. Afterwards the capped class of
each new gap is drawn from the row of the tilted kernel ``Q~*_beta`` indexed by
the capped state of the previous q gaps; a STAR class is resolved into an
integer gap drawn from ``K_hat(. | T > q)``. This is exact because for
``t > q`` the tilted transition weight factorizes as ``K_hat(t)`` times a
factor that does not depend on ``t``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .disorder import make_rng
from .errors import InvalidParameter
from .transfer import SpectralData, build_qstar, class_masses, encode, perron, tilted_kernel

_UNIFORM_BLOCK = 1 << 16
_STAR_BLOCK = 1 << 12


@dataclass(frozen=True)
class ContactPath:
    gaps: np.ndarray = field(repr=False)
    horizon: int
    seed: object

    @property
    def contacts(self):
        pos = np.concatenate(([0], np.cumsum(self.gaps)))
        return pos[pos <= self.horizon]

    @property
    def i_N(self):
        """Number of contacts in ``{1, ..., N}``."""
        return len(self.contacts) - 1

    def density(self):
        return self.i_N / self.horizon

    def to_lines(self):
        return "\n".join(str(int(c)) for c in self.contacts) + "\n"


def _draw_hat(law_hat, q, rng, size):
    """Plain ``K_hat`` gaps: class first, then the integer value for STAR."""
    probs = class_masses(law_hat, q)
    cls = np.searchsorted(np.cumsum(probs), rng.random(size) * probs.sum(), side="right")
    cls = np.minimum(cls, q)
    out = cls + 1
    star = cls == q
    if star.any():
        out[star] = law_hat.sample_beyond(rng, q, int(star.sum()))
    return out.astype(np.int64)


def sample_tilde(law, rho, beta, spectral: SpectralData | None, N, seed) -> ContactPath:
    if N < 1:
        raise InvalidParameter("horizon must be positive")
    q = rho.q
    law_hat = law.hat()
    qs = build_qstar(law, rho, beta)
    if spectral is None:
        spectral = perron(qs)
    kernel = tilted_kernel(qs, spectral)
    cum = [list(np.cumsum(row)) for row in kernel.weights]
    for c in cum:
        c[-1] = math.inf  # absorb rounding in the last class
    succ = kernel.succ.tolist()

    rng = make_rng(seed)
    gaps = _draw_hat(law_hat, q, rng, q).tolist()
    total = int(sum(gaps))
    state = encode(tuple(gaps), q)
    if total > N:
        return ContactPath(np.asarray(_trim(gaps, N), dtype=np.int64), N, seed)

    uni = rng.random(_UNIFORM_BLOCK).tolist()
    ui = 0
    stars = law_hat.sample_beyond(rng, q, _STAR_BLOCK).tolist()
    si = 0
    while total <= N:
        if ui == _UNIFORM_BLOCK:
            uni = rng.random(_UNIFORM_BLOCK).tolist()
            ui = 0
        e = bisect_right(cum[state], uni[ui])
        ui += 1
        if e < q:
            g = e + 1
        else:
            if si == _STAR_BLOCK:
                stars = law_hat.sample_beyond(rng, q, _STAR_BLOCK).tolist()
                si = 0
            g = stars[si]
            si += 1
        gaps.append(g)
        total += g
        state = succ[state][e]
    return ContactPath(np.asarray(gaps, dtype=np.int64), N, seed)


def _trim(gaps, N):
    out, total = [], 0
    for g in gaps:
        out.append(g)
        total += g
        if total > N:
            break
    return out


def sample_ensemble(law, rho, beta, N, n_paths, seed, spectral=None):
    """``n_paths`` independent paths; path ``i`` uses the stream keyed by ``(seed, i)``."""
    if spectral is None:
        spectral = perron(build_qstar(law, rho, beta))
    return [sample_tilde(law, rho, beta, spectral, N, [seed, i]) for i in range(n_paths)]


@dataclass(frozen=True)
class ContactDensity:
    mean: float
    stderr: float
    n_paths: int


def lln_contact_density(paths) -> ContactDensity:
    """Ensemble mean of ``i_N / N`` with its standard error."""
    d = np.array([p.density() for p in paths])
    err = d.std(ddof=1) / math.sqrt(d.size) if d.size > 1 else math.nan
    return ContactDensity(float(d.mean()), float(err), int(d.size))
