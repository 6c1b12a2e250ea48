r"""Modified Bessel functions of half-integer order in the closed right half-plane.

All evaluations are organised around the ratio sequence

.. math::
    q_\mu(z) = z \frac{K_{\mu+1}(z)}{K_\mu(z)}, \qquad
    q_\mu = 2\mu + \frac{z^2}{q_{\mu-1}},

which is the forward (stable) direction for :math:`K`.  The recurrence is
started from a closed form for half-integer orders
(:math:`q_{1/2} = 1 + z`) and from :math:`K_1/K_0` for integer orders.
:math:`K_0, K_1` come from three regimes:

* ascending series with the logarithmic term for :math:`|z| \le 2`,
* Steed's continued fraction (Temme's CF2 normalisation) in between,
* the Hankel asymptotic series for :math:`|z| \ge 25`.

Values of :math:`K` are carried exponentially scaled, :math:`e^{z} K_\mu(z)`,
so that ratios never divide two underflowing numbers.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import AccuracyError, ConvergenceError, DomainError, RegimeError
from .quadrature import _leggauss

EULER_GAMMA = 0.57721566490153286061
DIRECT_RTOL = 1e-12
ORACLE_TOL = 1e-8

SERIES_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 25.0
_SERIES_TERMS = 30
_CF_MAXIT = 20000
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Order:
    """Nonnegative order ``mu`` of a Bessel function."""

    mu: float

    def __post_init__(self):
        mu = float(self.mu)
        if not math.isfinite(mu) or mu < 0:
            raise DomainError(f"order must be finite and nonnegative, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    @property
    def kind(self):
        if self.mu.is_integer():
            return "integer"
        if (2 * self.mu).is_integer():
            return "half-integer"
        return "other"


@dataclass(frozen=True)
class ModulusPoint:
    """Squared Hankel modulus and its derivative at one point."""

    x: float
    mu: float
    m_sq: float
    dm_sq: float

    @property
    def log_slope(self):
        """The quotient ``-x M'(x)^2 / M(x)^2`` bounded by the modulus estimates."""
        return -self.x * self.dm_sq / self.m_sq


def as_order(mu):
    """Coerce ``mu`` to a half-integer :class:`Order`."""
    order = mu if isinstance(mu, Order) else Order(mu)
    if order.kind == "other":
        raise DomainError(f"only integer and half-integer orders are supported, got {order.mu}")
    return order


def _prepare(z):
    arr = np.asarray(z)
    real_input = not np.iscomplexobj(arr)
    arr = arr.astype(complex)
    if np.any(~np.isfinite(arr)):
        raise DomainError("argument must be finite")
    if np.any(arr.real < 0):
        raise DomainError("argument must satisfy Re z >= 0")
    if np.any(arr == 0):
        raise DomainError("argument must be nonzero")
    return arr, real_input


def _finish(values, z, real_input, scalar):
    values = np.asarray(values, dtype=complex)
    if real_input:
        values = values.real + 0j
    else:
        on_axis = z.imag == 0
        if np.any(on_axis):
            values = np.where(on_axis, values.real + 0j, values)
    if scalar:
        return complex(values.reshape(()))
    return values


# ---------------------------------------------------------------------------
# K_0 and K_1
# ---------------------------------------------------------------------------
def _k01_series(z):
    t = 0.25 * z * z
    term0 = np.ones_like(z)
    term1 = np.ones_like(z)
    i0 = np.zeros_like(z)
    s0 = np.zeros_like(z)
    i1 = np.zeros_like(z)
    s1 = np.zeros_like(z)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        if k:
            term0 = term0 * t / (k * k)
            term1 = term1 * t / (k * (k + 1))
        harmonic_next = harmonic + 1.0 / (k + 1)
        i0 += term0
        s0 += harmonic * term0
        i1 += term1
        s1 += (harmonic + harmonic_next - 2 * EULER_GAMMA) * term1
        harmonic = harmonic_next
    log_half = np.log(0.5 * z)
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / z + log_half * (0.5 * z) * i1 - 0.25 * z * s1
    return np.exp(z) * k0, k1 / k0


def _k01_continued_fraction(x):
    # Steed's algorithm for CF2 with mu = 0; converges for Re x >= 0, |x| > 0.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) <= _EPS * np.abs(s)) and np.all(np.abs(delh) <= _EPS * np.abs(h)):
            break
    else:
        raise AccuracyError("continued fraction for K_1/K_0 did not converge")
    h = a1 * h
    k0e = np.sqrt(np.pi / (2.0 * x)) / s
    return k0e, (x + 0.5 - h) / x


def asymptotic_coefficient(mu, k):
    """Coefficient ``a_k(mu)`` of the large-argument expansion of ``K_mu``.

    ``a_1(mu) = (4 mu**2 - 1) / 8``.
    """
    four_mu_sq = 4.0 * float(mu) ** 2
    value = 1.0
    for j in range(1, k + 1):
        value *= (four_mu_sq - (2 * j - 1) ** 2) / (8.0 * j)
    return value


def _asymptotic_scaled(mu, z, terms=None):
    # e^z K_mu(z) / sqrt(pi / (2 z)) summed until terms stop decreasing.
    four_mu_sq = 4.0 * mu * mu
    total = np.ones_like(z)
    term = np.ones_like(z)
    limit = terms if terms is not None else 200
    for j in range(1, limit):
        new = term * (four_mu_sq - (2 * j - 1) ** 2) / (8.0 * j * z)
        if terms is None:
            if np.all(np.abs(new) <= _EPS * np.abs(total)):
                total = total + new
                break
            if np.any(np.abs(new) > np.abs(term)) and j > 1:
                raise AccuracyError("asymptotic series diverged before reaching precision")
        term = new
        total = total + term
    return np.sqrt(np.pi / (2.0 * z)) * total


def _k01_asymptotic(z):
    k0e = _asymptotic_scaled(0.0, z)
    k1e = _asymptotic_scaled(1.0, z)
    return k0e, k1e / k0e


def _k01_scaled(z):
    """Return ``(e^z K_0(z), K_1(z)/K_0(z))`` for a complex array ``z``."""
    k0e = np.empty_like(z)
    ratio = np.empty_like(z)
    modulus = np.abs(z)
    regimes = (
        (modulus <= SERIES_RADIUS, _k01_series),
        ((modulus > SERIES_RADIUS) & (modulus < ASYMPTOTIC_RADIUS), _k01_continued_fraction),
        (modulus >= ASYMPTOTIC_RADIUS, _k01_asymptotic),
    )
    for mask, method in regimes:
        if np.any(mask):
            k0e[mask], ratio[mask] = method(z[mask])
    return k0e, ratio


# ---------------------------------------------------------------------------
# Ratio sequence and K_mu
# ---------------------------------------------------------------------------
def q_table(base, steps, z):
    """Rows ``q[k] = z K_{mu+1}(z) / K_mu(z)`` for ``mu = base + k``.

    ``base`` is 0 or 1/2 and ``z`` a complex array (validated by the caller).
    Returns the table together with ``e^z K_base(z)``.
    """
    out = np.empty((steps + 1,) + z.shape, dtype=complex)
    if base == 0:
        k_base, ratio = _k01_scaled(z)
        out[0] = z * ratio
    else:
        k_base = np.sqrt(np.pi / (2.0 * z))
        out[0] = 1.0 + z
    z_sq = z * z
    for k in range(1, steps + 1):
        out[k] = 2.0 * (base + k) + z_sq / out[k - 1]
    return out, k_base


def _split(mu):
    order = as_order(mu)
    base = 0.0 if order.kind == "integer" else 0.5
    return order.mu, base, int(round(order.mu - base))


def bessel_k_ratio(mu, z):
    """``K_{mu+1}(z) / K_mu(z)`` by forward recurrence of the ratio itself.

    Never forms the quotient of two separately evaluated ``K`` values, so the
    result stays accurate where ``K`` underflows (large ``Re z``).
    """
    mu, base, steps = _split(mu)
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    table, _ = q_table(base, steps, arr)
    return _finish(table[steps] / arr, arr, real_input, scalar)


def bessel_k_scaled(mu, z):
    """Exponentially scaled ``e^z K_mu(z)``."""
    mu, base, steps = _split(mu)
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    table, value = q_table(base, max(steps - 1, 0), arr)
    for k in range(steps):
        value = value * (table[k] / arr)
    return _finish(value, arr, real_input, scalar)


def bessel_k(mu, z):
    """Modified Bessel function ``K_mu(z)`` for ``Re z >= 0``, ``z != 0``.

    Relative accuracy is about 1e-13 or better for ``|z| <= 1e3``, ``mu <= 40``,
    as long as the value is representable (``e^{-z}`` underflows past
    ``Re z ~ 745``; use :func:`bessel_k_scaled` there).

    Raises
    ------
    DomainError
        If ``z == 0``, ``Re z < 0`` or ``mu`` is not a half-integer.
    AccuracyError
        If an internal expansion cannot reach double precision.
    """
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    value = np.exp(-arr) * bessel_k_scaled(mu, arr)
    return _finish(value, arr, real_input, scalar)


def bessel_k_asymptotic(mu, z, terms):
    """Truncated large-argument series ``sqrt(pi/2z) e^{-z} sum_{k<terms} a_k/z^k``.

    Only meant as a cross-check; requires ``|z| >= 10 (mu**2 + 1)``.
    """
    mu = as_order(mu).mu
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    if np.any(np.abs(arr) < 10.0 * (mu * mu + 1.0)):
        raise RegimeError("asymptotic series requires |z| >= 10 (mu^2 + 1)")
    if terms < 1:
        raise RegimeError("at least one term is required")
    value = np.exp(-arr) * _asymptotic_scaled(mu, arr, terms=terms)
    return _finish(value, arr, real_input, scalar)


# ---------------------------------------------------------------------------
# I_mu
# ---------------------------------------------------------------------------
def _i_series(mu, z):
    t = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 80):
        term = term * t / (k * (mu + k))
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    prefactor = np.exp(mu * np.log(0.5 * z) - math.lgamma(mu + 1.0))
    return prefactor * total


def _i_ratio_cf(mu, z):
    # I_{mu+1}/I_mu = 1/(b_1 + 1/(b_2 + ...)), b_k = 2 (mu + k)/z, modified Lentz.
    tiny = 1e-300
    inv_z = 1.0 / z
    f = np.full_like(z, tiny)
    c = f.copy()
    d = np.zeros_like(z)
    for k in range(1, _CF_MAXIT):
        b = 2.0 * (mu + k) * inv_z
        d = b + d
        d = np.where(d == 0, tiny, d)
        c = b + 1.0 / c
        c = np.where(c == 0, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            return f
    raise AccuracyError("continued fraction for I_{mu+1}/I_mu did not converge")


def bessel_i_scaled(mu, z):
    """Exponentially scaled ``e^{-z} I_mu(z)``."""
    order = as_order(mu)
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = np.abs(arr) <= SERIES_RADIUS
    if np.any(small):
        out[small] = np.exp(-arr[small]) * _i_series(order.mu, arr[small])
    big = ~small
    if np.any(big):
        zb = arr[big]
        ke = bessel_k_scaled(order, zb)
        kr = bessel_k_ratio(order, zb)
        ir = _i_ratio_cf(order.mu, zb)
        out[big] = 1.0 / (zb * ke * (kr + ir))
    return _finish(out, arr, real_input, scalar)


def bessel_i(mu, z):
    """Modified Bessel function ``I_mu(z)`` for ``Re z >= 0``, ``z != 0``.

    Power series for ``|z| <= 2``; otherwise the Wronskian
    ``I_mu (K_{mu+1} + (I_{mu+1}/I_mu) K_mu) = 1/z`` with the ``I`` ratio from
    its continued fraction.
    """
    scalar = np.ndim(z) == 0
    arr, real_input = _prepare(z)
    arr = np.atleast_1d(arr)
    value = np.exp(arr) * bessel_i_scaled(mu, arr)
    return _finish(value, arr, real_input, scalar)


# ---------------------------------------------------------------------------
# Hankel modulus
# ---------------------------------------------------------------------------
def hankel_modulus_arrays(mu, x):
    """Vectorised ``(M_mu^2(x), d/dx M_mu^2(x))`` for positive real ``x``.

    Uses ``H^(1)_mu(x) = (2/pi) i^{-mu-1} K_mu(-i x)`` so that
    ``M^2 = (4/pi^2) |K_mu(-ix)|^2`` and
    ``x d/dx log M^2 = 2 Re(mu - q_mu(-ix))``.
    """
    mu, base, steps = _split(mu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("Hankel modulus requires x > 0")
    z = -1j * x
    z = z.real * 0.0 + 1j * z.imag
    table, value = q_table(base, steps, z)
    for k in range(steps):
        value = value * (table[k] / z)
    m_sq = (4.0 / np.pi**2) * (value.real**2 + value.imag**2)
    re_w = mu - table[steps].real
    dm_sq = 2.0 * m_sq * re_w / x
    return m_sq, dm_sq


def hankel_modulus_sq(mu, x):
    """``M_mu^2(x) = J_mu^2(x) + Y_mu^2(x)`` and its derivative, as a :class:`ModulusPoint`."""
    x = float(x)
    if not x > 0:
        raise DomainError("Hankel modulus requires x > 0")
    order = as_order(mu)
    m_sq, dm_sq = hankel_modulus_arrays(order, x)
    return ModulusPoint(x=x, mu=order.mu, m_sq=float(m_sq[0]), dm_sq=float(dm_sq[0]))


# ---------------------------------------------------------------------------
# Nicholson's integral
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureSpec:
    """Budget for :func:`nicholson_modulus_sq`.

    ``nodes`` is the Gauss-Legendre order per panel (the error estimate
    compares it with twice as many nodes), ``levels`` the number of dyadic
    panels towards ``u = 0``, ``log_width`` the panel width in ``log u`` on
    ``[1, U]`` and ``rtol`` the relative tolerance on the total error bound.
    """

    nodes: int = 20
    levels: int = 60
    log_width: float = 0.5
    rtol: float = 1e-12
    max_panels: int = 2000


class NicholsonResult(NamedTuple):
    value: float
    abserr: float
    upper: float


def _nicholson_integrand(mu, x):
    def integrand(u):
        t = np.arcsinh(u)
        y = 2.0 * x * u
        k0e, _ = _k01_scaled(y.astype(complex))
        grow = np.exp(2.0 * mu * t - y)
        shrink = np.exp(-2.0 * mu * t - y)
        return 0.5 * (grow + shrink) * k0e.real / np.sqrt(1.0 + u * u)

    return integrand


def _panel_sums(g, edges, n):
    """Per-panel Gauss-Legendre sums with ``2n`` nodes and their gap to ``n`` nodes."""
    a, b = edges[:-1, None], edges[1:, None]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    out = []
    for k in (n, 2 * n):
        x, w = _leggauss(k)
        values = g((mid + half * x).ravel()).reshape(a.shape[0], k)
        out.append(half[:, 0] * (values @ w))
    coarse, fine = out
    return fine, np.abs(fine - coarse)


def nicholson_integral(mu, x, quad=QuadratureSpec()):
    """Nicholson's integral with an error budget; see :func:`nicholson_modulus_sq`."""
    mu = as_order(mu).mu
    x = float(x)
    if not x > 0:
        raise DomainError("Nicholson's integral requires x > 0")
    f = _nicholson_integrand(mu, x)
    n = quad.nodes

    # dyadic panels resolve the logarithmic singularity of K_0 at u = 0
    edges = 2.0 ** -np.arange(quad.levels, -1, -1, dtype=float)
    values, errors = _panel_sums(f, edges, n)
    total = float(np.sum(values))
    err = float(np.sum(errors))
    eps = 2.0 ** (-quad.levels)
    k0_eps = _k01_scaled(np.array([2.0 * x * eps + 0j]))[0][0].real
    err += 2.0 * math.cosh(2.0 * mu * math.asinh(eps)) * eps * (k0_eps + 1.0)

    # exponential map u = e^v on [1, U], processed in chunks of panels
    def g(v):
        u = np.exp(v)
        return f(u) * u

    u_min = max(1.0, 0.5 * (4.0 * mu / x - 1.0))
    h = quad.log_width
    chunk = 16
    v0 = 0.0
    for _ in range(0, quad.max_panels, chunk):
        edges = v0 + h * np.arange(chunk + 1)
        values, errors = _panel_sums(g, edges, n)
        tail = math.inf
        stop = None
        running = total
        for k in range(chunk):
            running += values[k]
            u = math.exp(edges[k + 1])
            if u >= u_min:
                # integrand <= (1+2u)^{2mu} sqrt(pi/(4xu)) e^{-2xu} / u with log-slope <= -x
                log_env = (
                    2.0 * mu * math.log1p(2.0 * u)
                    + 0.5 * math.log(math.pi / (4.0 * x * u))
                    - 2.0 * x * u
                    - math.log(u)
                )
                tail = math.exp(log_env) / x
                if tail <= 1e-3 * quad.rtol * running:
                    stop = k
                    break
        if stop is not None:
            total += float(np.sum(values[: stop + 1]))
            err += float(np.sum(errors[: stop + 1]))
            v0 = edges[stop + 1]
            break
        total += float(np.sum(values))
        err += float(np.sum(errors))
        v0 = edges[-1]
    else:
        raise ConvergenceError("Nicholson tail bound did not drop below tolerance")
    scale = 8.0 / np.pi**2
    abserr = scale * (err + tail)
    value = scale * total
    if abserr > quad.rtol * value:
        raise ConvergenceError(
            f"Nicholson quadrature error estimate {abserr:.3e} exceeds tolerance"
        )
    return NicholsonResult(value=float(value), abserr=float(abserr), upper=math.exp(v0))


def nicholson_modulus_sq(mu, x, quad=QuadratureSpec()):
    """``(8/pi^2) int_0^inf cosh(2 mu t) K_0(2 x sinh t) dt`` by panel quadrature.

    Independent oracle for :func:`hankel_modulus_sq`: it only touches ``K_0``
    on the positive real axis.

    Raises
    ------
    ConvergenceError
        If the panel error estimates plus the analytic tail bound exceed
        ``quad.rtol`` relative to the value.
    """
    return nicholson_integral(mu, x, quad).value
