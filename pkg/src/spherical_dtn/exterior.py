"""Exterior solution operators as radial-factor series.

A Dirichlet datum ``g`` on ``S_R`` extends to ``r > R`` by

* Helmholtz: ``u_m(r) = (R/r)^nu K_mu(s r) / K_mu(s R) g_m``,
* Laplace: ``u_m(r) = (R/r)^{m + 2 nu} g_m``,
* logarithmic Laplace (``n = 2``): the ``m = 0`` factor is ``log r / log R``.

Helmholtz factors are carried in log space so that ``Re s (r - R)`` far beyond
the double range only sets an underflow flag.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dtn import HELMHOLTZ, LAPLACE_LOG, DtnKind
from .exceptions import DomainError
from .harmonics import eigenvalue, evaluate, points_to_angles
from .quadrature import gauss_legendre
from .special_functions import q_table
from .spectral import Mode

LOG_TINY = math.log(np.finfo(float).tiny)


class RadialValue(NamedTuple):
    """Radial factor at some radii: value, r-derivative, ``log`` of the value, underflow mask."""

    value: np.ndarray
    derivative: np.ndarray
    log_value: np.ndarray
    underflow: np.ndarray


def _log_k_scaled(mu, z):
    """``log(e^z K_mu(z))`` and the ratios needed for ``K'_mu/K_mu``."""
    base = 0.0 if float(mu).is_integer() else 0.5
    steps = int(round(mu - base))
    table, k_base = q_table(base, max(steps, 0), z)
    log_k = np.log(k_base)
    for k in range(steps):
        log_k = log_k + np.log(table[k] / z)
    up = table[steps] / z  # K_{mu+1}/K_mu
    if steps > 0:
        down = z / table[steps - 1]  # K_{mu-1}/K_mu
    elif base == 0.5:
        down = np.ones_like(z)  # K_{-1/2} = K_{1/2}
    else:
        down = up  # K_{-1} = K_1
    return log_k, up, down


def radial_factor(mode, kind, R, r):
    """Radial factor ``u_m(r)/u_m(R)`` and its derivative for ``r >= R``.

    The Helmholtz derivative uses ``K'_mu = -(K_{mu-1} + K_{mu+1})/2``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < R) or not R > 0:
        raise DomainError("radial factor is defined for r >= R > 0")
    return radial_profile(mode, kind, R, r)


def radial_profile(mode, kind, R, r):
    """Same formulas as :func:`radial_factor` for any ``r > 0`` (also inside ``S_R``)."""
    kind.validate(mode.n, R)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise DomainError("radial profile needs r > 0")
    nu = mode.nu
    m = mode.m
    if kind.variant == HELMHOLTZ and kind.s != 0:
        s = kind.s
        zr = s * r
        zR = np.array([s * R])
        log_r, up_r, down_r = _log_k_scaled(mode.mu, zr)
        log_R, _, _ = _log_k_scaled(mode.mu, zR)
        log_value = nu * np.log(R / r) + (log_r - log_R[0]) - s * (r - R)
        log_value = np.where(r == R, 0j, log_value)
        under = log_value.real < LOG_TINY
        value = np.where(under, 0j, np.exp(np.where(under, 0, log_value)))
        log_deriv = -nu / r - 0.5 * s * (up_r + down_r)
        return RadialValue(value, value * log_deriv, log_value, under)
    if kind.variant == LAPLACE_LOG and m == 0:
        value = np.log(r) / math.log(R) + 0j
        derivative = 1.0 / (r * math.log(R)) + 0j
        with np.errstate(divide="ignore"):
            log_value = np.log(value)
        return RadialValue(value, derivative, log_value, np.zeros(r.shape, bool))
    a = m + 2 * nu
    log_value = a * np.log(R / r) + 0j
    value = np.exp(log_value)
    return RadialValue(value, -a / r * value, log_value, log_value.real < LOG_TINY)


def log_derivative_at_boundary(mode, kind, R):
    """``u_m'(R) / u_m(R)``: must equal the DtN symbol."""
    return complex(radial_factor(mode, kind, R, R).derivative[0])


@dataclass
class ExteriorField:
    """Exterior extension of Dirichlet data ``coefficients`` for a DtN kind."""

    coefficients: object
    kind: DtnKind

    def __post_init__(self):
        self.kind.validate(self.coefficients.n, self.coefficients.R)

    def modal(self, r):
        """Per-mode values and radial derivatives, shape ``(len(r), #entries)``."""
        g = self.coefficients
        r = np.atleast_1d(np.asarray(r, dtype=float))
        value = np.empty((r.size, g.m.size), dtype=complex)
        deriv = np.empty_like(value)
        cache = {}
        for col, m in enumerate(g.m):
            m = int(m)
            if m not in cache:
                cache[m] = radial_factor(Mode(m, g.n), self.kind, g.R, r)
            value[:, col] = cache[m].value * g.values[col]
            deriv[:, col] = cache[m].derivative * g.values[col]
        return value, deriv


def evaluate_exterior(field, r, xi, derivative=False):
    """``u(r xi)`` (and optionally ``d_r u``) at paired radii and unit directions."""
    g = field.coefficients
    if g.n not in (2, 3):
        raise DomainError("point evaluation is only available for n in {2, 3}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape != (r.size, g.n):
        raise DomainError("need one direction of length n per radius")
    angles = points_to_angles(xi)
    out = np.empty(r.size, dtype=complex)
    dout = np.empty(r.size, dtype=complex)
    for k in range(r.size):
        value, deriv = field.modal(r[k])
        out[k] = evaluate(g.with_values(value[0]), angles[k : k + 1])[0]
        if derivative:
            dout[k] = evaluate(g.with_values(deriv[0]), angles[k : k + 1])[0]
    return (out, dout) if derivative else out


# ---------------------------------------------------------------------------
# checks on a single mode
# ---------------------------------------------------------------------------
def ode_residual(mode, kind, R, r_grid):
    """Max centered-difference residual of ``-r^{1-n}(r^{n-1}u')' + (lambda/r^2 + s^2) u``.

    ``r_grid`` must be uniform with spacing at most ``min(r)/10``.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.size < 3:
        raise DomainError("need at least three grid points")
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-9, atol=0):
        raise DomainError("grid must be uniform")
    if h > r[0] / 10:
        raise DomainError(f"grid too coarse: h = {h} > r_min/10")
    if r[0] < R:
        raise DomainError("grid must lie in r >= R")
    n = mode.n
    u = radial_factor(mode, kind, R, r).value
    rc = r[1:-1]
    flux_hi = (rc + 0.5 * h) ** (n - 1) * (u[2:] - u[1:-1])
    flux_lo = (rc - 0.5 * h) ** (n - 1) * (u[1:-1] - u[:-2])
    s_sq = kind.s**2 if kind.variant == HELMHOLTZ else 0.0
    lam = eigenvalue(mode.m, n)
    res = -(flux_hi - flux_lo) / (h * h * rc ** (n - 1)) + (lam / rc**2 + s_sq) * u[1:-1]
    return float(np.max(np.abs(res)))


class RadiationResult(NamedTuple):
    r: np.ndarray
    q: np.ndarray
    log_q: np.ndarray


def radiation_check(mode, kind, R, r_list):
    """``q(r) = r^{(n-1)/2} |u_m'(r) + s u_m(r)|`` (computed through logs)."""
    if kind.variant != HELMHOLTZ or kind.s == 0:
        raise DomainError("radiation check needs a Helmholtz kind with s != 0")
    r = np.asarray(r_list, dtype=float)
    if np.any(np.diff(r) <= 0):
        raise DomainError("radii must be ascending")
    rv = radial_factor(mode, kind, R, r)
    s = kind.s
    nu, mu = mode.nu, mode.mu
    zr = s * r
    _, up, down = _log_k_scaled(mu, zr)
    bracket = -nu / r - 0.5 * s * (up + down) + s
    with np.errstate(divide="ignore"):
        log_q = 0.5 * (mode.n - 1) * np.log(r) + rv.log_value.real + np.log(np.abs(bracket))
    return RadiationResult(r=r, q=np.exp(log_q), log_q=log_q)


# ---------------------------------------------------------------------------
# annulus norm of the Laplace extension
# ---------------------------------------------------------------------------
def _expm1_ratio(c, L):
    """``(e^{cL} - 1)/c`` with the ``c -> 0`` limit ``L``."""
    if c == 0:
        return L
    return math.expm1(c * L) / c


def annulus_terms(mode, R, d):
    """Exact ``(F^2, G^2, H^2)`` for the Laplace extension of one mode on ``R < r < d``.

    ``F^2 = int (R/r)^{2m+4nu} r^{n-1}``, ``G^2 = int |((R/r)^{m+2nu})'|^2 r^{n-1}``,
    ``H^2 = int m^2 r^{-2} (R/r)^{2m+4nu} r^{n-1}``.
    """
    if not d > R > 0:
        raise DomainError("need d > R > 0")
    n, m, mu = mode.n, mode.m, mode.mu
    L = math.log(d / R)
    a = m + 2 * mode.nu
    f2 = R**n * _expm1_ratio(2.0 - 2.0 * mu, L)
    tail = _expm1_ratio(-2.0 * mu, L)  # R^{2mu} int_R^d r^{-1-2mu} dr
    g2 = a * a * R ** (n - 2) * tail
    h2 = m * m * R ** (n - 2) * tail
    return f2, g2, h2


def annulus_terms_quadrature(mode, R, d, nodes=200):
    """Gauss-Legendre oracle for :func:`annulus_terms` (on a log-spaced variable)."""
    n, m = mode.n, mode.m
    a = m + 2 * mode.nu

    def integrate(f):
        # r = R e^t, dr = r dt
        return gauss_legendre(lambda t: f(R * np.exp(t)) * R * np.exp(t), 0.0, math.log(d / R), nodes)

    f2 = integrate(lambda r: (R / r) ** (2 * a) * r ** (n - 1))
    g2 = integrate(lambda r: (a / r * (R / r) ** a) ** 2 * r ** (n - 1))
    h2 = integrate(lambda r: m * m / r**2 * (R / r) ** (2 * a) * r ** (n - 1))
    return float(f2), float(g2), float(h2)


@dataclass
class AnnulusNorm:
    d: float
    R: float
    m: np.ndarray
    F2: np.ndarray
    G2: np.ndarray
    H2: np.ndarray
    total: float


def annulus_h1_norm(g, d, kind=None):
    """``|||u|||`` of the Laplace extension of ``g`` on ``R < r < d``."""
    if kind is not None and kind.variant != "laplace":
        raise DomainError("annulus norm is defined for the Laplace extension")
    terms = np.array([annulus_terms(Mode(int(m), g.n), g.R, d) for m in g.m]).reshape(-1, 3)
    weights = np.abs(g.values) ** 2
    total = math.sqrt(float(np.sum(terms.sum(axis=1) * weights)))
    return AnnulusNorm(d=d, R=g.R, m=g.m.copy(), F2=terms[:, 0], G2=terms[:, 1], H2=terms[:, 2], total=total)


def annulus_mode_constant(n, R, d, band):
    """``max_m sqrt((F^2+G^2+H^2) / (R^{n-1}(1+m)))``: the sharp constant for bands up to ``band``."""
    best = 0.0
    for m in range(band + 1):
        f2, g2, h2 = annulus_terms(Mode(m, n), R, d)
        best = max(best, math.sqrt((f2 + g2 + h2) / (R ** (n - 1) * (1 + m))))
    return best
