import mpmath as mp
import numpy as np
import pytest
import scipy.special as sp

from spherical_dtn.exceptions import DomainError
from spherical_dtn.spectral import (
    Mode, check_bounds, calibrate_c2, im_w0_margins, laplace_gap, ray_point, w_mu,
    z_coefficient, z_coefficients,
)


def mp_z(m, n, s):
    mp.mp.dps = 60
    nu = mp.mpf(n - 2) / 2
    s = mp.mpc(s)
    mu = m + nu
    return complex(m - s * mp.besselk(mu + 1, s) / mp.besselk(mu, s))


def test_mode_properties():
    mode = Mode(3, 4)
    assert mode.nu == 1 and mode.mu == 4 and mode.laplace_value == -5
    with pytest.raises(DomainError):
        Mode(-1, 3)
    with pytest.raises(DomainError):
        Mode(0, 1)


def test_frozen_examples():
    # n = 3: z_{m,1/2}(s) is a rational function of s
    s = 2.0 + 1.0j
    assert z_coefficient(Mode(0, 3), s).z == pytest.approx(-(1 + s), rel=1e-14)
    assert z_coefficient(Mode(1, 3), s).z == pytest.approx(-2 - s * s / (1 + s), rel=1e-13)
    assert z_coefficient(Mode(4, 2), 0).z == -4
    np.testing.assert_allclose(z_coefficients(6, 0, 3).real, [-4, -5, -6, -7])


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_matches_mpmath(n):
    for s in (1e-3, 0.4 + 0.3j, 1.0, 5 - 2j, 3j, -40j, 200 + 1j):
        table = z_coefficients(n, s, 25)
        for m in (0, 1, 5, 25):
            ref = mp_z(m, n, s)
            assert abs(table[m] - ref) <= 1e-12 * max(1.0, abs(ref)), (n, m, s)


def test_real_axis_gives_real_values():
    table = z_coefficients(5, np.array([0.1, 1.0, 10.0]), 10)
    assert np.all(table.imag == 0)


def test_laplace_gap_small_s():
    mode = Mode(2, 3)
    for s in (1e-4, 1e-6j, 1e-8 + 1e-8j):
        gap = laplace_gap(mode, s)
        # first correction: -s^2 / q_{mu-1}(0) = -s^2 / (2 mu - 2)
        assert gap == pytest.approx(-s * s / (2 * mode.mu - 2), rel=1e-6)


def test_ray_point_exact_axis():
    assert ray_point(2.0, 90) == 2j and ray_point(2.0, -90) == -2j and ray_point(2.0, 0) == 2.0
    assert abs(ray_point(1.0, 45) - np.exp(0.25j * np.pi)) < 1e-15


def test_imaginary_axis_identity_independent():
    k = np.logspace(-1, 1.5, 15)
    for n in (2, 3, 5):
        for m in (0, 2, 7):
            mu = m + (n - 2) / 2
            z = z_coefficients(n, np.array([complex(0, -x) for x in k]), m)[m]
            ref = 2 / (np.pi * (sp.jv(mu, k) ** 2 + sp.yv(mu, k) ** 2))
            np.testing.assert_allclose(z.imag, ref, rtol=1e-11)


def test_c2_calibration():
    c2 = calibrate_c2()
    assert c2 == pytest.approx(1 / 7 + 2 / (np.pi * (sp.j0(1.0) ** 2 + sp.y0(1.0) ** 2)), rel=1e-13)
    assert np.all(im_w0_margins(np.logspace(-3, 3, 200), c2) >= 0)
    with pytest.raises(DomainError):
        calibrate_c2(0.1)


def test_w_mu_imaginary_part():
    k = 1.7
    assert w_mu(0.5, k).imag == pytest.approx(k, rel=1e-13)


def test_check_bounds_detects_perturbation():
    mode = Mode(3, 3)
    s = 0.5 + 2j
    rep = check_bounds(mode, s)
    assert rep.passed and rep.violations == []
    bad = check_bounds(mode, s, z=rep.z + 10.0)
    assert not bad.passed and "re_low" in bad.violations
    bad_im = check_bounds(mode, s, z=rep.z.real + 1j * abs(rep.z.imag))
    assert "im_sign" in bad_im.violations


def test_large_s_asymptote():
    for n in (2, 3):
        for m in (0, 1):
            mode = Mode(m, n)
            if mode.mu > 1:
                continue
            for theta in (-60, 0, 60):
                s = ray_point(1e3, theta)
                assert abs(z_coefficient(mode, s).z / -s - 1) <= 1e-3
    for m in (5, 20, 30):
        mode = Mode(m, 7)
        errs = [abs(z_coefficient(mode, rho).z / -rho - 1) for rho in (1e2, 1e3, 1e4)]
        assert errs[0] > errs[1] > errs[2]


def test_negative_real_part_rejected():
    with pytest.raises(DomainError):
        z_coefficient(Mode(1, 3), -1 + 0j)
    with pytest.raises(DomainError):
        z_coefficients(3, np.array([1.0, -0.5]), 2)
