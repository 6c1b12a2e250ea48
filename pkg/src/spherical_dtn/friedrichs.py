"""Friedrichs-type inequality and trace-estimate harness on the ball ``B_R``.

Test functions are single modes ``v = w(r) Y_{m,1}`` on ``B_R`` coupled to the
exterior by ``w'(R) = z_{m,nu}(sR) w(R) / R``.  All norms reduce to radial
integrals.  Two families are used:

``polynomial``
    ``w = (r/R)^m (1 + c (r/R)^2)`` with ``c`` fixed by the coupling.
``boundary-layer``
    the interior continuation of the exterior profile
    ``(R/r)^nu K_mu(s r)/K_mu(s R)`` on ``[3R/4, R]``, cut off by a quintic
    ``C^2`` blend on ``[R/2, 3R/4]`` and zero below ``R/2``.  It solves
    ``-Delta v + s^2 v = 0`` on ``omega = {3R/4 < r < R}``.

Every fitted constant here is a witness from a finite corpus, i.e. a lower
bound for the true optimal constant.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dtn import DtnKind
from .exceptions import DegenerateFamilyError, DomainError
from .exterior import radial_profile
from .harmonics import eigenvalue
from .quadrature import gauss_legendre_nodes
from .spectral import Mode, as_wavenumber, ray_point, z_coefficient

POLYNOMIAL = "polynomial"
BOUNDARY_LAYER = "boundary-layer"
FAMILIES = (POLYNOMIAL, BOUNDARY_LAYER)
COUPLING_TOL = 1e-10
DEGENERATE_TOL = 1e-12
STABILITY_RTOL = 0.05


def _blend(t):
    """Quintic ``C^2`` step and its derivative on ``[0, 1]``."""
    t = np.clip(t, 0.0, 1.0)
    value = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    slope = 30.0 * t * t * (1.0 - t) ** 2
    return value, slope


@dataclass
class ModalTestFunction:
    """``v = w(r) Y_{m,1}(xi)`` on ``B_R`` with exact DtN coupling at ``r = R``."""

    mode: Mode
    s: complex
    R: float
    family: str
    z: complex
    profile: object  # r -> (w, w')
    omega: tuple = None
    breaks: tuple = ()
    scale: complex = 1.0

    @property
    def helmholtz_harmonic_near_boundary(self):
        return self.omega is not None

    def __call__(self, r):
        w, dw = self.profile(np.asarray(r, dtype=float))
        return self.scale * w, self.scale * dw

    def scaled(self, alpha):
        return ModalTestFunction(
            mode=self.mode, s=self.s, R=self.R, family=self.family, z=self.z,
            profile=self.profile, omega=self.omega, breaks=self.breaks, scale=self.scale * alpha,
        )

    @property
    def coupling_residual(self):
        """``|w'(R) - z w(R)/R|`` relative to ``max(1, |w'(R)|)``."""
        w, dw = self(np.array([self.R]))
        target = self.z * w[0] / self.R
        return abs(dw[0] - target) / max(1.0, abs(dw[0]), abs(target))


def _polynomial(mode, s, R, z):
    m = mode.m
    for power in (2, 3):
        denom = m + power - z
        if abs(denom) >= DEGENERATE_TOL:
            c = (z - m) / denom
            break
    else:
        raise DegenerateFamilyError(f"both polynomial corrections degenerate for {mode}, s={s}")

    def profile(r):
        x = r / R
        w = x**m + c * x ** (m + power)
        lead = m * x ** (m - 1) if m else 0.0
        dw = (lead + c * (m + power) * x ** (m + power - 1)) / R
        return w + 0j, dw + 0j

    return profile, (0.0, R)


def _boundary_layer(mode, s, R):
    kind = DtnKind.helmholtz(s) if s != 0 else DtnKind.laplace()
    inner, outer = 0.5 * R, 0.75 * R

    def profile(r):
        w = np.zeros(r.shape, dtype=complex)
        dw = np.zeros(r.shape, dtype=complex)
        live = r > inner
        if np.any(live):
            rl = r[live]
            pv = radial_profile(mode, kind, R, rl)
            chi, dchi = _blend((rl - inner) / (outer - inner))
            dchi = dchi / (outer - inner)
            w[live] = chi * pv.value
            dw[live] = dchi * pv.value + chi * pv.derivative
        return w, dw

    return profile, (0.0, inner, outer, R)


def build_modal(mode, s, R, family):
    """Construct a coupled single-mode test function.

    Raises
    ------
    DomainError
        For an unknown family.
    DegenerateFamilyError
        If no polynomial correction can satisfy the coupling.
    """
    s = as_wavenumber(s)
    R = float(R)
    if not R > 0:
        raise DomainError("R must be positive")
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    z = z_coefficient(mode, s * R).z
    if family == POLYNOMIAL:
        profile, breaks = _polynomial(mode, s, R, z)
        omega = None
    else:
        profile, breaks = _boundary_layer(mode, s, R)
        omega = (0.75 * R, R)
    v = ModalTestFunction(mode=mode, s=s, R=R, family=family, z=z, profile=profile, omega=omega, breaks=breaks)
    return v


def custom_modal(mode, s, R, profile, breaks=None, tol=COUPLING_TOL):
    """Wrap a user profile ``r -> (w, w')``; rejected unless it satisfies the DtN coupling."""
    s = as_wavenumber(s)
    z = z_coefficient(mode, s * R).z
    v = ModalTestFunction(mode=mode, s=s, R=float(R), family="custom", z=z, profile=profile,
                          breaks=tuple(breaks) if breaks else (0.0, float(R)))
    if v.coupling_residual > tol:
        raise DomainError(f"profile violates the DtN coupling (residual {v.coupling_residual:.3e})")
    return v


@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre budget: ``nodes`` per panel, at least ``panels`` per piece."""

    nodes: int = 64
    panels: int = 2


@dataclass(frozen=True)
class VolumeNormBundle:
    l2_volume: float
    grad_l2: float
    neumann_h_minus_half: float
    h1_indexed: float
    l2_omega: float = 0.0
    grad_omega: float = 0.0
    trace_l2: float = 0.0
    trace_h_half: float = 0.0


def _integrate(v, a, b, quad, weight_fn):
    if b <= a:
        return 0.0
    # more panels where the profile oscillates or varies exponentially
    extra = int(math.ceil(abs(v.s) * (b - a) / 4.0))
    panels = max(quad.panels, extra)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre_nodes(lo, hi, quad.nodes)
        total += float(np.sum(w * weight_fn(x)))
    return total


def volume_norms(v, quad=QuadSpec()):
    """Radial-integral norms of ``v`` over ``B_R`` (and over ``omega`` when present)."""
    n, m, R = v.mode.n, v.mode.m, v.R
    lam = eigenvalue(m, n)

    def mass(r):
        w, _ = v(r)
        return np.abs(w) ** 2 * r ** (n - 1)

    def energy(r):
        w, dw = v(r)
        return (np.abs(dw) ** 2 + lam * np.abs(w) ** 2 / r**2) * r ** (n - 1)

    l2_sq = grad_sq = 0.0
    for a, b in zip(v.breaks[:-1], v.breaks[1:]):
        l2_sq += _integrate(v, a, b, quad, mass)
        grad_sq += _integrate(v, a, b, quad, energy)
    l2_om = grad_om = 0.0
    if v.omega is not None:
        l2_om = _integrate(v, v.omega[0], v.omega[1], quad, mass)
        grad_om = _integrate(v, v.omega[0], v.omega[1], quad, energy)
    wR, dwR = v(np.array([R]))
    surface = R ** (n - 1)
    neumann = math.sqrt(surface / (1.0 + m)) * float(abs(dwR[0]))
    trace_l2 = math.sqrt(surface) * float(abs(wR[0]))
    trace_half = math.sqrt(surface * (1.0 + m)) * float(abs(wR[0]))
    h1s = math.sqrt(grad_sq + abs(v.s) ** 2 * l2_sq)
    return VolumeNormBundle(
        l2_volume=math.sqrt(l2_sq), grad_l2=math.sqrt(grad_sq), neumann_h_minus_half=neumann,
        h1_indexed=h1s, l2_omega=math.sqrt(l2_om), grad_omega=math.sqrt(grad_om),
        trace_l2=trace_l2, trace_h_half=trace_half,
    )


def friedrichs_ratio(v, quad=QuadSpec(), norms=None):
    """``||v||_{L^2} / sqrt(||grad v||^2 + ||d_r v||_{H^{-1/2}}^2)``; ``inf`` if the denominator vanishes."""
    b = norms if norms is not None else volume_norms(v, quad)
    denom = math.hypot(b.grad_l2, b.neumann_h_minus_half)
    if denom == 0.0:
        if b.l2_volume == 0.0:
            raise DomainError("zero test function")
        return math.inf
    return b.l2_volume / denom


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WavenumberGrid:
    """``{0}`` (optional) plus ``rho e^{i theta}`` for a radial grid and a set of angles.

    ``spacing`` is ``"log"`` or ``"linear"``; ``rho_max_cut`` drops points with
    ``|s|`` beyond it.  :meth:`refined` doubles the resolution in both ``rho``
    and ``theta`` (midpoints inserted) and keeps the original points.
    """

    rho_min: float
    rho_max: float
    count: int
    thetas: tuple = (0.0,)
    include_zero: bool = False
    spacing: str = "log"
    rho_max_cut: float = math.inf

    def radii(self):
        if self.spacing == "log":
            return np.logspace(math.log10(self.rho_min), math.log10(self.rho_max), self.count)
        return np.linspace(self.rho_min, self.rho_max, self.count)

    def points(self):
        pts = [0j] if self.include_zero else []
        for rho in self.radii():
            if rho > self.rho_max_cut * (1 + 1e-12):
                continue
            if rho == 0:
                if 0j not in pts:
                    pts.append(0j)
                continue
            for theta in self.thetas:
                pts.append(ray_point(float(rho), theta))
        return pts

    def refined(self):
        thetas = sorted(self.thetas)
        fine = []
        for a, b in zip(thetas[:-1], thetas[1:]):
            fine += [a, 0.5 * (a + b)]
        fine.append(thetas[-1])
        return WavenumberGrid(
            rho_min=self.rho_min, rho_max=self.rho_max, count=2 * self.count - 1,
            thetas=tuple(fine), include_zero=self.include_zero, spacing=self.spacing,
            rho_max_cut=self.rho_max_cut,
        )


@dataclass
class SweepRow:
    n: int
    R: float
    m: int
    family: str
    s: complex
    ratio: float
    coupling: float


@dataclass
class SweepReport:
    n: int
    R: float
    m_max: int
    families: tuple
    rows: list
    refined_rows: list
    max_ratio: float
    refined_max_ratio: float
    max_coupling_residual: float
    observe_only: bool = False
    argmax: dict = field(default_factory=dict)

    @property
    def relative_change(self):
        if not math.isfinite(self.max_ratio) or not math.isfinite(self.refined_max_ratio):
            return math.inf
        return abs(self.refined_max_ratio - self.max_ratio) / self.max_ratio

    @property
    def stable(self):
        if self.observe_only:
            return None
        return math.isfinite(self.max_ratio) and self.relative_change <= STABILITY_RTOL

    def summary(self):
        return {
            "n": self.n, "R": self.R, "m_max": self.m_max, "families": list(self.families),
            "points": len(self.rows), "refined_points": len(self.refined_rows),
            "max_ratio": self.max_ratio, "refined_max_ratio": self.refined_max_ratio,
            "relative_change": self.relative_change, "stable": self.stable,
            "observe_only": self.observe_only,
            "max_coupling_residual": self.max_coupling_residual, "argmax": self.argmax,
        }


def _sweep_rows(n, R, s_values, m_max, families, quad, workers=1):
    jobs = [(m, fam, s) for s in s_values for m in range(m_max + 1) for fam in families]

    def run(job):
        m, fam, s = job
        v = build_modal(Mode(m, n), s, R, fam)
        return SweepRow(n=n, R=R, m=m, family=fam, s=s, ratio=friedrichs_ratio(v, quad), coupling=v.coupling_residual)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def friedrichs_sweep(n, R, s_grid, m_max, families=FAMILIES, observe_only=False, quad=QuadSpec(), workers=1):
    """Max Friedrichs ratio over ``s_grid x {0..m_max} x families`` and over the refined grid.

    ``n = 2`` is only allowed with ``observe_only=True`` (no stability verdict).
    """
    if n < 3 and not observe_only:
        raise DomainError("the Friedrichs inequality is only asserted for n >= 3; use observe_only for n = 2")
    rows = _sweep_rows(n, R, s_grid.points(), m_max, families, quad, workers)
    refined = _sweep_rows(n, R, s_grid.refined().points(), m_max, families, quad, workers)
    best = max(rows, key=lambda row: row.ratio)
    return SweepReport(
        n=n, R=R, m_max=m_max, families=tuple(families), rows=rows, refined_rows=refined,
        max_ratio=best.ratio, refined_max_ratio=max(row.ratio for row in refined),
        max_coupling_residual=max(row.coupling for row in rows + refined),
        observe_only=observe_only,
        argmax={"m": best.m, "family": best.family, "re_s": best.s.real, "im_s": best.s.imag},
    )


# ---------------------------------------------------------------------------
# corollary
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CorollaryConstants:
    """Witnessed constants: Friedrichs ``C_F``, normal trace ``C_omega1``, trace ``C_Omega0``."""

    C_F: float
    C_omega1: float
    C_Omega0: float

    @property
    def C_L2(self):
        return max(1.0, math.sqrt(1.0 + self.C_omega1**2) * self.C_F)

    @property
    def C_tr(self):
        k = max(1.0, (1.0 + self.C_omega1**2) * self.C_F**2)
        return math.sqrt(3.0 * (1.0 + k) * self.C_Omega0**2 / 2.0)

    @property
    def small_s_limit(self):
        return 1.0 / math.sqrt(2.0 * max(1.0, self.C_omega1 * self.C_F))


def fit_corollary_constants(functions, C_F, quad=QuadSpec()):
    """Fit ``C_omega1`` and ``C_Omega0`` on boundary-layer functions (``C_F`` supplied)."""
    c1 = c0 = 0.0
    for v in functions:
        if not v.helmholtz_harmonic_near_boundary:
            raise DomainError("corollary constants need Helmholtz-harmonic functions near S_R")
        b = volume_norms(v, quad)
        s_abs = abs(v.s)
        seminorm = math.sqrt(b.grad_omega**2 + s_abs**4 * b.l2_omega**2)
        if seminorm > 0:
            c1 = max(c1, b.neumann_h_minus_half / seminorm)
        h1 = math.hypot(b.grad_l2, b.l2_volume)
        c0 = max(c0, b.trace_h_half / h1)
        c0 = max(c0, b.trace_l2 / math.sqrt(b.l2_volume * h1))
    return CorollaryConstants(C_F=C_F, C_omega1=c1, C_Omega0=c0)


@dataclass
class CorollaryReport:
    s: complex
    l2_margin: float
    trace_margin: float
    gradient_margin: object  # None when the small-|s| precondition fails
    trivial_regime: bool

    @property
    def passed(self):
        ok = self.l2_margin >= 0 and self.trace_margin >= 0
        return ok and (self.gradient_margin is None or self.gradient_margin >= 0)


def corollary_check(v, constants, quad=QuadSpec()):
    """Margins (``rhs - lhs``) of the three corollary inequalities for one function."""
    if not v.helmholtz_harmonic_near_boundary:
        raise DomainError("corollary check needs a boundary-layer test function")
    b = volume_norms(v, quad)
    s_abs = abs(v.s)
    l2_margin = constants.C_L2 * b.h1_indexed - b.l2_volume
    trace_s = math.sqrt(b.trace_h_half**2 + s_abs * b.trace_l2**2)
    trace_margin = constants.C_tr * b.h1_indexed - trace_s
    gradient_margin = None
    if s_abs <= constants.small_s_limit:
        gradient_margin = 2.0 * constants.C_F * math.sqrt(1.0 + constants.C_omega1**2) * b.grad_l2 - b.l2_volume
    return CorollaryReport(
        s=v.s, l2_margin=l2_margin, trace_margin=trace_margin,
        gradient_margin=gradient_margin, trivial_regime=s_abs >= 1.0,
    )


def corollary_suite(n, R, s_values, m_max, C_F, quad=QuadSpec()):
    """Build the boundary-layer corpus, fit its constants and check every member.

    Returns ``(constants, reports)``.
    """
    corpus = [build_modal(Mode(m, n), s, R, BOUNDARY_LAYER) for s in s_values for m in range(m_max + 1)]
    constants = fit_corollary_constants(corpus, C_F, quad)
    return constants, [corollary_check(v, constants, quad) for v in corpus]
