"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The verdict lines are printed in the terminal summary (see conftest.py).
"""

import math
import time
from functools import lru_cache

import numpy as np
import scipy.special as sp

from spherical_dtn.dtn import (
    DtnKind, constant_field, definiteness_report, dtn_bilinear, sobolev_norm,
    fit_boundedness_constant, log_difference, random_wavenumber, surface_pairing, apply_dtn, conjugate,
)
from spherical_dtn.exterior import (
    annulus_h1_norm, annulus_mode_constant, annulus_terms, annulus_terms_quadrature,
    log_derivative_at_boundary, ode_residual, radiation_check,
)
from spherical_dtn.friedrichs import WavenumberGrid, corollary_suite, friedrichs_sweep
from spherical_dtn.harmonics import BoundaryCoefficients, surface_mean
from spherical_dtn.special_functions import hankel_modulus_arrays, nicholson_integral
from spherical_dtn.spectral import (
    Mode, calibrate_c2, check_bounds, ray_point, z_coefficient, z_coefficients,
)

THETAS = (-90, -45, 0, 45, 90)
X_GRID = np.logspace(-2, math.log10(50.0), 40)
MODULUS_ORDERS = [k / 2 for k in range(11)]


def criterion_grid():
    """``0`` plus 13 log-spaced radii in ``[1e-3, 1e3]`` on five rays."""
    pts = [0j]
    for rho in np.logspace(-3, 3, 13):
        pts += [ray_point(float(rho), theta) for theta in THETAS]
    return pts


def imaginary_axis(k, sign=1):
    return np.array([complex(0.0, sign * float(x)) for x in k])


def test_criterion_01_closed_form_n3(record):
    start = time.perf_counter()
    rhos = np.logspace(-3, 3, 20)
    worst = 0.0
    for theta in THETAS:
        for rho in rhos:
            s = ray_point(rho, theta)
            z = z_coefficient(Mode(0, 3), s).z
            worst = max(worst, abs(z + (1 + s)) / abs(1 + s))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    record(1, ok, f"max rel err {worst:.2e} over 100 s, {elapsed:.2f}s")
    assert ok


def test_criterion_02_laplace_limit(record):
    start = time.perf_counter()
    failures = []
    for n in range(2, 8):
        for m in range(21):
            mode = Mode(m, n)
            gaps = [abs(z_coefficient(mode, 10.0**-k).z - mode.laplace_value) for k in range(1, 7)]
            if not all(a > b for a, b in zip(gaps, gaps[1:])):
                failures.append((n, m))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10.0
    record(2, ok, f"{len(failures)} non-monotone modes of 126, {elapsed:.2f}s")
    assert ok, failures[:5]


def test_criterion_03_spectral_bounds(record):
    start = time.perf_counter()
    c2 = calibrate_c2()
    grid = criterion_grid()
    failures = []
    strict_checked = 0
    for n in range(2, 8):
        table = z_coefficients(n, np.array(grid), 30)
        for i, s in enumerate(grid):
            for m in range(31):
                rep = check_bounds(Mode(m, n), s, c2=c2, z=table[m, i])
                strict_checked += rep.im_sign_ok is not None
                if not rep.passed:
                    failures.append((n, m, s, rep.violations))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    record(3, ok, f"{len(failures)} violations, {strict_checked} strict sign checks, {elapsed:.2f}s")
    assert ok, failures[:5]


def test_criterion_04_modulus_chain(record):
    worst_chain = math.inf
    worst_identity = 0.0
    for mu in MODULUS_ORDERS:
        m_sq, dm_sq = hankel_modulus_arrays(mu, X_GRID)
        slope = -X_GRID * dm_sq
        if mu >= 0.5:
            margins = np.minimum(slope - m_sq, 2 * mu * m_sq - slope)
        else:
            margins = np.minimum(slope - 2 * mu * m_sq, m_sq - slope)
        worst_chain = min(worst_chain, float(margins.min()))
        if mu == 0.5:
            worst_identity = float(np.max(np.abs(m_sq + X_GRID * dm_sq) / m_sq))
    small = [
        abs(float(-1e-6 * hankel_modulus_arrays(mu, 1e-6)[1][0] / hankel_modulus_arrays(mu, 1e-6)[0][0]) / (2 * mu) - 1)
        for mu in MODULUS_ORDERS[1:]
    ]
    large = [
        abs(float(-1e4 * hankel_modulus_arrays(mu, 1e4)[1][0] / hankel_modulus_arrays(mu, 1e4)[0][0]) - 1)
        for mu in MODULUS_ORDERS
    ]
    ok = worst_chain >= -1e-9 and worst_identity <= 1e-10 and max(small) <= 0.05 and max(large) <= 0.01
    record(
        4, ok,
        f"chain margin {worst_chain:.2e}, mu=1/2 identity {worst_identity:.1e}, "
        f"limits {max(small):.1e} (x=1e-6) {max(large):.1e} (x=1e4)",
    )
    assert ok


def test_criterion_05_nicholson_oracle(record):
    start = time.perf_counter()
    worst_abs = 0.0
    worst_rel = 0.0
    failures = 0
    for mu in MODULUS_ORDERS:
        m_sq, _ = hankel_modulus_arrays(mu, X_GRID)
        for x, direct in zip(X_GRID, m_sq):
            oracle = nicholson_integral(mu, float(x)).value
            gap = abs(oracle - direct)
            worst_abs = max(worst_abs, gap)
            worst_rel = max(worst_rel, gap / direct)
            failures += gap > 1e-8
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 30.0
    record(
        5, ok,
        f"{failures}/440 points above 1e-8 absolute (max abs {worst_abs:.1e}, "
        f"max rel {worst_rel:.1e}), {elapsed:.2f}s",
    )
    assert ok, "absolute tolerance below double spacing where M^2 is large; see ledger"


def test_criterion_06_imaginary_identity(record):
    k = np.logspace(-2, 2, 41)
    worst_lib = 0.0
    worst_ref = 0.0
    for n in (2, 3, 4):
        nu = (n - 2) / 2
        table = z_coefficients(n, imaginary_axis(k, sign=-1), 10)
        for m in range(11):
            mu = m + nu
            m_sq, _ = hankel_modulus_arrays(mu, k)
            reference = sp.jv(mu, k) ** 2 + sp.yv(mu, k) ** 2
            im = table[m].imag
            worst_lib = max(worst_lib, float(np.max(np.abs(im - 2 / (np.pi * m_sq)) / im)))
            worst_ref = max(worst_ref, float(np.max(np.abs(im - 2 / (np.pi * reference)) / im)))
    ok = worst_lib <= 1e-9 and worst_ref <= 1e-9
    record(6, ok, f"max rel err {worst_lib:.1e} (library M^2), {worst_ref:.1e} (scipy M^2)")
    assert ok


def test_criterion_07_dtn_properties(record):
    rng = np.random.default_rng(2024)
    sym = 0.0
    lower_fail = 0
    sign_fail = 0
    stability = {}
    for n in (2, 3, 4):
        for _ in range(1000):
            g = BoundaryCoefficients.random(n, 1.0, 6, rng, density=rng.choice([0.2, 1.0]))
            h = BoundaryCoefficients.random(n, 1.0, 6, rng)
            s = random_wavenumber(rng)
            kind = DtnKind.helmholtz(s)
            left = surface_pairing(apply_dtn(kind, g), conjugate(h))
            right = surface_pairing(g, apply_dtn(kind, conjugate(h)))
            scale = max(1.0, abs(left))
            sym = max(sym, abs(left - right) / scale, abs(dtn_bilinear(kind, g, h) - dtn_bilinear(kind, h, g)) / scale)
            rep = definiteness_report(kind, g)
            lower_fail += not rep.lower_ok
            im_s = rng.uniform(1e-3, 1e3) * rng.choice([-1.0, 1.0])
            rep_im = definiteness_report(DtnKind.helmholtz(complex(rng.uniform(0, 10), im_s)), g)
            sign_fail += rep_im.im_sign_ok is not True
        c_small = fit_boundedness_constant(n, 1.0, 8, 1000)
        c_big = fit_boundedness_constant(n, 1.0, 8, 2000)
        stability[n] = (c_small, c_big)
    stable = all(abs(b / a - 1) <= 0.10 for a, b in stability.values())
    ok = sym <= 1e-12 and lower_fail == 0 and sign_fail == 0 and stable
    consts = ", ".join(f"n={n}: {a:.3f}->{b:.3f}" for n, (a, b) in stability.items())
    record(7, ok, f"symmetry {sym:.1e}, lower fails {lower_fail}, sign fails {sign_fail}, C(n) {consts}")
    assert ok


def test_criterion_08_log_difference(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for R in (0.5, 2.0, math.e):
        for _ in range(50):
            g = BoundaryCoefficients.random(2, R, 6, rng)
            diff = log_difference(g)
            target = constant_field(2, R, -surface_mean(g) / (R * math.log(R)), band=6)
            worst = max(worst, float(np.max(np.abs(diff.values - target.values))))
    ok = worst <= 1e-12
    record(8, ok, f"max coefficient gap {worst:.1e}")
    assert ok


def _ode_cases(rng, count=20):
    cases = []
    while len(cases) < count:
        n = int(rng.integers(2, 6))
        m = int(rng.integers(0, 11))
        R = float(rng.choice([1.0, 2.0]))
        pick = rng.choice(["helmholtz", "helmholtz", "laplace"])
        if pick == "laplace":
            kind = DtnKind.laplace()
            if n == 2 and m == 0:
                kind = DtnKind.laplace_log()
        else:
            rho = math.exp(rng.uniform(math.log(0.1), math.log(5.0)))
            kind = DtnKind.helmholtz(ray_point(rho / R, float(rng.uniform(-90, 90))))
        cases.append((Mode(m, n), kind, R))
    return cases


def test_criterion_09_exterior(record):
    rng = np.random.default_rng(9)
    ratios = []
    for mode, kind, R in _ode_cases(rng):
        coarse = ode_residual(mode, kind, R, np.linspace(1.2 * R, 2.0 * R, 81))
        fine = ode_residual(mode, kind, R, np.linspace(1.2 * R, 2.0 * R, 161))
        ratios.append(coarse / fine)
    ode_ok = all(3.5 <= r <= 4.5 for r in ratios)

    worst_decay = 0.0
    for n in (2, 3, 4, 5):
        for m in (0, 1, 3, 10):
            for s in (0.1, 0.5, 1.0, 5.0, 20.0):
                res = radiation_check(Mode(m, n), DtnKind.helmholtz(s), 1.0, [4.0 * 2**k for k in range(8)])
                worst_decay = max(worst_decay, float(np.max(np.exp(np.diff(res.log_q)))))
    decay_ok = worst_decay <= 0.6

    worst_key = 0.0
    kinds = [DtnKind.helmholtz(ray_point(rho, th)) for rho in (1e-2, 0.7, 10.0, 300.0) for th in THETAS]
    for n in range(2, 8):
        for m in range(21):
            mode = Mode(m, n)
            for R in (0.5, 1.0, 3.0):
                for kind in kinds + [DtnKind.laplace()]:
                    target = z_coefficient(mode, kind.s * R).z / R
                    got = log_derivative_at_boundary(mode, kind, R)
                    worst_key = max(worst_key, abs(got - target) / max(1.0, abs(target)))
                if n == 2 and m == 0 and R != 1.0:
                    got = log_derivative_at_boundary(mode, DtnKind.laplace_log(), R)
                    worst_key = max(worst_key, abs(got - 1 / (R * math.log(R))))
    key_ok = worst_key <= 1e-10
    ok = ode_ok and decay_ok and key_ok
    record(
        9, ok,
        f"(a) ratios [{min(ratios):.2f}, {max(ratios):.2f}] (b) max q(2r)/q(r) {worst_decay:.3f} "
        f"(c) keystone {worst_key:.1e}",
    )
    assert ok


def test_criterion_10_annulus_norm(record):
    worst = 0.0
    for n in range(2, 6):
        for m in range(21):
            for R, d in ((1.0, 2.0), (2.0, 3.0)):
                exact = annulus_terms(Mode(m, n), R, d)
                quad = annulus_terms_quadrature(Mode(m, n), R, d)
                for a, b in zip(exact, quad):
                    worst = max(worst, abs(a - b) / abs(a) if a else abs(b))
    rng = np.random.default_rng(10)
    fits = []
    for n in range(2, 6):
        for R, d in ((1.0, 2.0), (2.0, 3.0)):
            ratios = []
            for _ in range(200):
                g = BoundaryCoefficients.random(n, R, 20, rng, density=rng.choice([0.1, 1.0]))
                ratios.append(annulus_h1_norm(g, d).total / sobolev_norm(g, 0.5))
            fits.append((max(ratios), annulus_mode_constant(n, R, d, 20)))
    bounded = all(math.isfinite(c) and c <= sharp * (1 + 1e-12) for c, sharp in fits)
    ok = worst <= 1e-10 and bounded
    record(10, ok, f"antiderivative vs quadrature {worst:.1e}, fitted C max {max(c for c, _ in fits):.3f}")
    assert ok


SWEEP_GRID = WavenumberGrid(1e-3, 1e3, 13, THETAS, True, "log", 50.0)
SWEEP_CONFIGS = [(n, R) for n in (3, 4) for R in (0.5, 1.0, 2.0)]


@lru_cache(maxsize=None)
def _sweep(n, R):
    return friedrichs_sweep(n, R, SWEEP_GRID, 10)


def test_criterion_11_friedrichs_sweep(record):
    start = time.perf_counter()
    reports = [_sweep(n, R) for n, R in SWEEP_CONFIGS]
    elapsed = time.perf_counter() - start
    finite = all(math.isfinite(r.max_ratio) for r in reports)
    stable = all(r.stable for r in reports)
    coupling = max(r.max_coupling_residual for r in reports)
    ok = finite and stable and coupling <= 1e-10 and elapsed < 300.0
    change = max(r.relative_change for r in reports)
    record(
        11, ok,
        f"max ratio {max(r.max_ratio for r in reports):.3f}, worst refinement change {change:.1%}, "
        f"coupling {coupling:.1e}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_12_corollary(record):
    failures = 0
    total = 0
    gradient_checked = 0
    worst = math.inf
    for n, R in SWEEP_CONFIGS:
        C_F = _sweep(n, R).max_ratio
        _, reports = corollary_suite(n, R, SWEEP_GRID.points(), 10, C_F)
        for rep in reports:
            total += 1
            failures += not rep.passed
            margins = [rep.l2_margin, rep.trace_margin]
            if rep.gradient_margin is not None:
                gradient_checked += 1
                margins.append(rep.gradient_margin)
            worst = min(worst, min(margins))
    ok = failures == 0 and gradient_checked > 0
    record(12, ok, f"{failures}/{total} failures, {gradient_checked} gradient-variant checks, min margin {worst:.2e}")
    assert ok

