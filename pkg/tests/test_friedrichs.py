import math

import numpy as np
import pytest

from spherical_dtn.exceptions import DomainError
from spherical_dtn.friedrichs import (
    BOUNDARY_LAYER, COUPLING_TOL, POLYNOMIAL, CorollaryConstants, QuadSpec, WavenumberGrid,
    build_modal, corollary_check, custom_modal, fit_corollary_constants, friedrichs_ratio,
    friedrichs_sweep, volume_norms,
)
from spherical_dtn.spectral import Mode


@pytest.mark.parametrize("family", [POLYNOMIAL, BOUNDARY_LAYER])
def test_coupling(family):
    for s in (0, 1e-3, 0.5 + 2j, 30 - 5j):
        for m in (0, 3, 10):
            v = build_modal(Mode(m, 3), s, 1.3, family)
            assert v.coupling_residual <= COUPLING_TOL


def test_boundary_layer_support():
    v = build_modal(Mode(2, 4), 1 + 1j, 2.0, BOUNDARY_LAYER)
    w, _ = v(np.array([0.3, 0.99]))
    assert w[0] == 0 and v.omega == (1.5, 2.0) and v.helmholtz_harmonic_near_boundary


def test_polynomial_norms_closed_form():
    # m = 0, n = 3, s = 0: z = -1, c = -1/3, w = 1 - r^2/3 on R = 1
    v = build_modal(Mode(0, 3), 0, 1.0, POLYNOMIAL)
    b = volume_norms(v)
    l2_sq = 1 / 3 - 2 / 15 + 1 / 63
    grad_sq = 4 / 9 / 5
    assert b.l2_volume == pytest.approx(math.sqrt(l2_sq), rel=1e-13)
    assert b.grad_l2 == pytest.approx(math.sqrt(grad_sq), rel=1e-13)
    assert b.neumann_h_minus_half == pytest.approx(2 / 3, rel=1e-13)


def test_ratio_scale_invariant_and_quadrature_converged():
    v = build_modal(Mode(3, 3), 2 + 3j, 1.0, BOUNDARY_LAYER)
    a = friedrichs_ratio(v)
    assert friedrichs_ratio(v.scaled(5 - 2j)) == pytest.approx(a, rel=1e-12)
    assert friedrichs_ratio(v, QuadSpec(nodes=96, panels=4)) == pytest.approx(a, rel=1e-10)


def test_custom_modal_rejects_uncoupled():
    with pytest.raises(DomainError):
        custom_modal(Mode(1, 3), 1.0, 1.0, lambda r: (r + 0j, np.ones_like(r) + 0j))
    with pytest.raises(DomainError):
        build_modal(Mode(1, 3), 1.0, 1.0, "spline")


def test_grid_refinement():
    grid = WavenumberGrid(0.1, 10, 3, (-90, 0, 90), True)
    fine = grid.refined()
    assert len(grid.points()) == 1 + 3 * 3
    assert len(fine.points()) == 1 + 5 * 5
    assert set(grid.points()) <= set(fine.points())


def test_sweep_small():
    grid = WavenumberGrid(0.01, 10, 4, (-90, 0, 90), True)
    rep = friedrichs_sweep(3, 1.0, grid, 3)
    assert math.isfinite(rep.max_ratio) and rep.max_coupling_residual <= COUPLING_TOL
    assert rep.summary()["points"] == len(rep.rows)
    with pytest.raises(DomainError):
        friedrichs_sweep(2, 1.0, grid, 3)
    observed = friedrichs_sweep(2, 1.0, grid, 2, observe_only=True)
    assert observed.stable is None


def test_corollary_constants_and_check():
    c = CorollaryConstants(C_F=0.5, C_omega1=2.0, C_Omega0=1.0)
    assert c.C_L2 == pytest.approx(max(1.0, math.sqrt(5) * 0.5))
    assert c.C_tr == pytest.approx(math.sqrt(3 * 2.25 / 2))
    assert c.small_s_limit == pytest.approx(1 / math.sqrt(2))
    corpus = [build_modal(Mode(m, 3), s, 1.0, BOUNDARY_LAYER) for s in (0.01, 1j, 5.0) for m in (0, 2)]
    fitted = fit_corollary_constants(corpus, C_F=0.7)
    assert all(corollary_check(v, fitted).passed for v in corpus)
    with pytest.raises(DomainError):
        corollary_check(build_modal(Mode(0, 3), 1.0, 1.0, POLYNOMIAL), fitted)
