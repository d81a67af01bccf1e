"""Verification suite: closed forms, asymptotics, oracle agreement and statistics.

Each ``check_*`` function returns a list of :class:`Check` records. The
default parameters reproduce the acceptance criteria of the package; the CLI
``validate`` command runs them and writes a JSON report.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .critical import closed_form_q1, closed_form_q2, curve_point, weak_disorder_slope
from .disorder import CorrelationProfile, MovingAverage, correlations, make_rng
from .free_energy import f_ann
from .kernels import ZetaLaw
from .oracle import (
    dp_scaled_z_all,
    dp_z,
    exact_enum_z,
    growth_rate_detail,
    homogeneous_scaled_z,
    mc_annealed_z,
    relative_gap,
)
from .sampler import lln_contact_density, sample_ensemble
from .transfer import build_qstar, invariant_mu, perron, product_measure, tilted_kernel

Q2_SETS = (
    (0.8, 0.36, 0.48),
    (1 / math.sqrt(3),) * 3,
    (0.6, -0.64, 0.48),
)
DEFAULT_COEFFS = {
    1: (1 / math.sqrt(2), 1 / math.sqrt(2)),
    2: (0.8, 0.36, 0.48),
    3: (0.5, 0.5, 0.5, 0.5),
}


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    seconds: float = 0.0
    note: str = ""

    def as_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} tol={self.tolerance:g} ({self.seconds:.2f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        checks = fn(*args, **kwargs)
        dt = time.perf_counter() - t0
        for c in checks:
            c.seconds = dt
        return checks

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _profile(coeffs):
    return correlations(MovingAverage.normalized(coeffs, tol=1e-12))


@_timed
def check_closed_form_q1(alphas=(0.5, 1.0, 2.0), k_infs=(0.0, 0.3), rho1s=(-0.4, 0.0, 0.5), points=21, tol=1e-10):
    worst = 0.0
    for a in alphas:
        for k in k_infs:
            law = ZetaLaw(a, k)
            for r in rho1s:
                rho = CorrelationProfile((1.0, r))
                for b in np.linspace(0.0, 2.0, points):
                    diff = abs(curve_point(law, rho, b).h_c_ann - closed_form_q1(law, rho, b))
                    worst = max(worst, diff)
    return [Check("closed_form_q1", worst, 0.0, tol, worst <= tol)]


@_timed
def check_closed_form_q2(sets=Q2_SETS, alpha=1.0, k_infinity=0.0, points=21, tol=1e-10):
    law = ZetaLaw(alpha, k_infinity)
    worst = 0.0
    for coeffs in sets:
        rho = _profile(coeffs)
        for b in np.linspace(0.0, 2.0, points):
            diff = abs(curve_point(law, rho, b).Lambda - closed_form_q2(law, rho, b))
            worst = max(worst, diff)
    return [Check("closed_form_q2", worst, 0.0, tol, worst <= tol)]


@_timed
def check_weak_disorder(qs=(1, 2, 3), alphas=(0.5, 1.5), beta=1e-3, tol=1e-4, coeffs=None):
    out = []
    for q in qs:
        rho = _profile(coeffs if coeffs is not None else DEFAULT_COEFFS[q])
        for a in alphas:
            law = ZetaLaw(a)
            lhs = 2.0 * curve_point(law, rho, beta).Lambda / (beta * beta)
            rhs = weak_disorder_slope(law, rho)
            out.append(Check(f"weak_disorder q={rho.q} alpha={a}", lhs, rhs, tol, abs(lhs - rhs) <= tol))
    return out


def _random_case(rng):
    q = int(rng.integers(1, 4))
    coeffs = rng.standard_normal(q + 1)
    coeffs /= np.linalg.norm(coeffs)
    k_inf = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.0, 0.5))
    law = ZetaLaw(float(rng.uniform(0.3, 2.5)), k_inf)
    return law, correlations(MovingAverage(tuple(coeffs))), float(rng.uniform(0.0, 1.5)), float(rng.uniform(-1.0, 1.0))


@_timed
def check_enum_vs_dp(draws=20, n_max=16, seed=2024, tol=1e-12):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(draws):
        law, rho, beta, h = _random_case(rng)
        for N in range(1, n_max + 1):
            a = exact_enum_z(law, rho, beta, h, N).log_value
            b = dp_z(law, rho, beta, h, N).log_value
            worst = max(worst, abs(math.expm1(a - b)))
    return [Check(f"dp_vs_enum N<={n_max}", worst, 0.0, tol, worst <= tol)]


@_timed
def check_dp_vs_convolution(cases=((0.5, 0.0, 0.3), (1.0, 0.0, -0.2), (1.5, 0.2, 0.1), (2.0, 0.0, 1.0)), N=2000, tol=1e-13):
    worst = 0.0
    rho = _profile(DEFAULT_COEFFS[2])
    for a, k, h in cases:
        law = ZetaLaw(a, k)
        gap = relative_gap(dp_scaled_z_all(law, rho, 0.0, h, N), homogeneous_scaled_z(law, h, N))
        worst = max(worst, float(gap[1:].max()))
    return [Check(f"dp_vs_convolution beta=0 N<={N}", worst, 0.0, tol, worst <= tol)]


@_timed
def check_free_energy(alpha=1.0, coeffs=DEFAULT_COEFFS[2], beta=0.8, grid=(1000, 2000, 3000, 4000), tol=1e-3, deloc_bound=5e-3):
    law = ZetaLaw(alpha)
    rho = _profile(coeffs)
    Lam = curve_point(law, rho, beta).Lambda
    h_loc = -Lam + 0.3
    g = growth_rate_detail(law, rho, beta, h_loc, grid).estimate
    f = f_ann(law, rho, beta, h_loc)
    h_del = -Lam - 0.2
    g_del = growth_rate_detail(law, rho, beta, h_del, grid).estimate
    return [
        Check("growth_rate_vs_f_ann localized", g, f, tol, abs(g - f) <= tol),
        Check("growth_rate delocalized", g_del, deloc_bound, deloc_bound, g_del <= deloc_bound),
    ]


@_timed
def check_monte_carlo(alpha=1.0, coeffs=DEFAULT_COEFFS[2], beta=0.5, h=-0.2, N=12, samples=100_000, seed=11, bands=3.0):
    law = ZetaLaw(alpha)
    ma = MovingAverage.normalized(coeffs, tol=1e-12)
    mc = mc_annealed_z(law, ma, beta, h, N, samples, seed)
    exact = dp_z(law, correlations(ma), beta, h, N).value
    ok = mc.stderr > 0 and abs(mc.value - exact) <= bands * mc.stderr
    return [Check("mc_vs_dp", mc.value, exact, bands * mc.stderr, ok, note=f"stderr={mc.stderr:.3g}")]


@_timed
def check_tilted(qs=(1, 2, 3), alphas=(0.5, 1.5), betas=(0.0, 0.5, 1.5)):
    rows = inv = prod = lam0 = 0.0
    for q in qs:
        rho = _profile(DEFAULT_COEFFS[q])
        for a in alphas:
            law = ZetaLaw(a)
            for b in betas:
                m = build_qstar(law, rho, b)
                sp = perron(m)
                p = tilted_kernel(m, sp)
                rows = max(rows, float(np.max(np.abs(p.row_sums() - 1.0))))
                im = invariant_mu(p, law)
                inv = max(inv, float(np.sum(np.abs(p.rmatvec(im.mu_star) - im.mu_star))))
                if b == 0.0:
                    prod = max(prod, float(np.max(np.abs(im.mu_star - product_measure(law, q)))))
                    lam0 = max(lam0, abs(sp.lam - 1.0))
    return [
        Check("tilted row sums", rows, 0.0, 1e-12, rows <= 1e-12),
        Check("mu* invariance residual", inv, 0.0, 1e-12, inv <= 1e-12),
        Check("mu* at beta=0 is product measure", prod, 0.0, 1e-12, prod <= 1e-12),
        Check("lambda(0) = 1", lam0, 0.0, 1e-13, lam0 <= 1e-13),
    ]


@_timed
def check_lln(alpha=2.0, coeffs=DEFAULT_COEFFS[2], beta=1.0, N=1_000_000, n_paths=20, seed=7, rel_tol=0.01):
    law = ZetaLaw(alpha)
    rho = _profile(coeffs)
    m = build_qstar(law, rho, beta)
    sp = perron(m)
    c = invariant_mu(tilted_kernel(m, sp), law).mean_spacing
    if math.isinf(c):
        return [Check("lln contact density", math.nan, 0.0, rel_tol, False, note="null recurrent, skipped")]
    d = lln_contact_density(sample_ensemble(law, rho, beta, N, n_paths, seed, sp))
    target = 1.0 / c
    return [Check("lln contact density", d.mean, target, rel_tol * target, abs(d.mean - target) <= rel_tol * target)]


@_timed
def check_lambda_prime(qs=(1, 2, 3), h=1e-4, bound=1e-3, alpha=1.0):
    out = []
    for q in qs:
        rho = _profile(DEFAULT_COEFFS[q])
        lam = perron(build_qstar(ZetaLaw(alpha), rho, h), invariant=False).lam
        fd = (lam - 1.0) / h
        out.append(Check(f"lambda'(0) q={q}", fd, bound, bound, fd <= bound))
    return out


ACCEPTANCE = (
    ("1 q=1 closed form", check_closed_form_q1),
    ("2 q=2 closed form", check_closed_form_q2),
    ("3 weak-disorder asymptotic", check_weak_disorder),
    ("4a dp vs enumeration", check_enum_vs_dp),
    ("4b dp vs convolution", check_dp_vs_convolution),
    ("5 free-energy consistency", check_free_energy),
    ("6 Monte Carlo disorder average", check_monte_carlo),
    ("7 tilted kernel suite", check_tilted),
    ("8 LLN for the tilted process", check_lln),
    ("9 lambda'(0) = 0", check_lambda_prime),
)
QUICK = {"1 q=1 closed form", "2 q=2 closed form", "3 weak-disorder asymptotic", "4a dp vs enumeration", "7 tilted kernel suite", "9 lambda'(0) = 0"}


def config_checks(law, rho, betas=(0.25, 0.5, 1.0, 2.0)):
    """Checks specialised to a user-supplied law and correlation profile."""
    out = []
    t0 = time.perf_counter()
    if rho.q in (1, 2):
        worst = 0.0
        for b in betas:
            cp = curve_point(law, rho, b)
            ref = closed_form_q1(law, rho, b) if rho.q == 1 else cp.h_c_zero - closed_form_q2(law, rho, b)
            worst = max(worst, abs(cp.h_c_ann - ref))
        out.append(Check(f"config closed form q={rho.q}", worst, 0.0, 1e-10, worst <= 1e-10))
    if rho.q >= 1:
        lhs = 2.0 * curve_point(law, rho, 1e-3).Lambda / 1e-6
        rhs = weak_disorder_slope(law, rho)
        out.append(Check("config weak disorder", lhs, rhs, 1e-4, abs(lhs - rhs) <= 1e-4))
    worst = 0.0
    for N in range(1, 13):
        a = exact_enum_z(law, rho, 0.7, -0.1, N).log_value
        b = dp_z(law, rho, 0.7, -0.1, N).log_value
        worst = max(worst, abs(math.expm1(a - b)))
    out.append(Check("config dp vs enumeration", worst, 0.0, 1e-12, worst <= 1e-12))
    for c in out:
        c.seconds = time.perf_counter() - t0
    return out


def run_suite(quick=False, law=None, rho=None, log=None):
    checks = []
    for label, fn in ACCEPTANCE:
        if quick and label not in QUICK:
            continue
        for c in fn():
            c.name = f"{label} | {c.name}"
            checks.append(c)
            if log:
                log(c.line())
    if law is not None and rho is not None:
        for c in config_checks(law, rho):
            checks.append(c)
            if log:
                log(c.line())
    return checks
