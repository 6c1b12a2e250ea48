"""DtN spectral coefficients ``z_{m,nu}(s)`` and the bounds they satisfy.

For a mode ``(m, n)`` with ``nu = (n-2)/2`` and ``mu = m + nu``::

    z_{m,nu}(s) = s K'_mu(s)/K_mu(s) - nu = m - s K_{mu+1}(s)/K_mu(s)

continued by ``z_{m,nu}(0) = -(m + 2 nu)``.  In terms of the ratio sequence
``q_mu = s K_{mu+1}/K_mu`` this is ``m - q_mu``; the deviation from the Laplace
value is ``-s^2/q_{mu-1}``, which avoids cancellation near ``s = 0``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .special_functions import Order, hankel_modulus_arrays, hankel_modulus_sq, q_table

BOUND_ATOL = 1e-9
STRICT_IM_MIN = 1e-6


@dataclass(frozen=True)
class Mode:
    """Angular frequency ``m`` in dimension ``n``."""

    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise DomainError(f"m must be a nonnegative integer, got {self.m!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))

    @property
    def nu(self):
        return (self.n - 2) / 2

    @property
    def mu(self):
        return self.m + self.nu

    @property
    def order(self):
        return Order(self.mu)

    @property
    def laplace_value(self):
        return -(self.m + 2 * self.nu)


@dataclass(frozen=True)
class SpectralValue:
    z: complex
    mode: Mode
    s: complex


def as_wavenumber(s):
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise DomainError("wavenumber must be finite")
    if s.real < 0:
        raise DomainError(f"wavenumber must satisfy Re s >= 0, got {s}")
    return s


def ray_point(rho, theta_deg):
    """``rho e^{i theta}`` with the axis directions snapped to exact values.

    On the imaginary axis ``s**2`` is then exactly real, which keeps the
    imaginary part of ``z`` relatively accurate even when it is tiny.
    """
    exact = {0: complex(rho, 0.0), 90: complex(0.0, rho), -90: complex(0.0, -rho)}
    key = float(theta_deg)
    if key.is_integer() and int(key) in exact:
        return exact[int(key)]
    theta = math.radians(theta_deg)
    return complex(rho * math.cos(theta), rho * math.sin(theta))


def _z_and_gap(n, s, m_max):
    """Rows of ``z_{m,nu}(s)`` and ``z - z(0)`` for ``m = 0..m_max`` (``s != 0`` array)."""
    nu = (n - 2) / 2
    base = 0.0 if n % 2 == 0 else 0.5
    shift = int(round(nu - base))
    steps = shift + m_max
    table, _ = q_table(base, steps, s)
    q = table[shift : shift + m_max + 1]
    m = np.arange(m_max + 1).reshape((-1,) + (1,) * s.ndim)
    z = m - q
    # gap = 2 mu - q_mu = -s^2 / q_{mu-1}; at mu = 0 the gap is -q_0 itself
    gap = np.empty_like(z)
    s_sq = s * s
    for row, mu_index in enumerate(range(shift, shift + m_max + 1)):
        if mu_index == 0:
            gap[row] = -table[0] if base == 0 else -s
        else:
            gap[row] = -s_sq / table[mu_index - 1]
    return z, gap


def z_coefficients(n, s, m_max):
    """``z_{m,nu}(s)`` for ``m = 0..m_max``; ``s`` scalar or array, result has a leading ``m`` axis."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    scalar = np.ndim(s) == 0
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s_arr.real < 0):
        raise DomainError("wavenumber must satisfy Re s >= 0")
    nu = (n - 2) / 2
    m = np.arange(m_max + 1).reshape((-1,) + (1,) * s_arr.ndim)
    out = np.broadcast_to(-(m + 2 * nu) + 0j, (m_max + 1,) + s_arr.shape).copy()
    nonzero = s_arr != 0
    if np.any(nonzero):
        z, _ = _z_and_gap(int(n), s_arr[nonzero], m_max)
        out[:, nonzero] = z
    real_axis = s_arr.imag == 0
    out[:, real_axis] = out[:, real_axis].real
    if scalar:
        return out[:, 0]
    return out


def z_coefficient(mode, s):
    """Spectral value ``z_{m,nu}(s)`` of the DtN operator on ``mode``."""
    s = as_wavenumber(s)
    if s == 0:
        return SpectralValue(z=complex(mode.laplace_value), mode=mode, s=s)
    z = z_coefficients(mode.n, s, mode.m)[mode.m]
    return SpectralValue(z=complex(z), mode=mode, s=s)


def laplace_gap(mode, s):
    """``z_{m,nu}(s) - z_{m,nu}(0)`` computed without cancellation."""
    s = as_wavenumber(s)
    if s == 0:
        return 0j
    _, gap = _z_and_gap(mode.n, np.array([s]), mode.m)
    return complex(gap[mode.m, 0])


def w_mu(mu, k):
    """``w_mu(k) = k H'_mu(k) / H_mu(k)`` (first-kind Hankel) from the modulus."""
    k = float(k)
    if not k > 0:
        raise DomainError("w_mu requires k > 0")
    point = hankel_modulus_sq(mu, k)
    return complex(0.5 * k * point.dm_sq / point.m_sq, 2.0 / (np.pi * point.m_sq))


def calibrate_c2(k0=1.0):
    """Witness ``c2 = k0/(8 k0^2 - 1) + 2/(pi M_0^2(k0))`` for the ``(0,0)`` imaginary bound."""
    k0 = float(k0)
    if not k0 > 2.0**-1.5:
        raise DomainError("k0 must exceed 2^(-3/2)")
    return k0 / (8.0 * k0 * k0 - 1.0) + 2.0 / (np.pi * hankel_modulus_sq(0, k0).m_sq)


@dataclass
class BoundReport:
    """Margins of the real- and imaginary-part bounds for one ``(mode, s)``.

    A margin is ``upper - value`` or ``value - lower``; the bound holds when the
    margin is at least ``-tol``.  ``im_sign_ok`` is ``None`` where the strict
    sign statement is not checked.
    """

    mode: Mode
    s: complex
    z: complex
    re_low: float
    re_high: float
    im_sign_ok: object
    im_high: float
    c2: float
    tol: float = BOUND_ATOL
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        ok = self.re_low >= -self.tol and self.re_high >= -self.tol and self.im_high >= -self.tol
        return ok and self.im_sign_ok is not False

    @property
    def violations(self):
        out = []
        if self.re_low < -self.tol:
            out.append("re_low")
        if self.re_high < -self.tol:
            out.append("re_high")
        if self.im_high < -self.tol:
            out.append("im_high")
        if self.im_sign_ok is False:
            out.append("im_sign")
        return out


def check_bounds(mode, s, c2=None, z=None, tol=BOUND_ATOL):
    """Evaluate the real/imaginary bounds on ``z_{m,nu}(s)``.

    ``z`` may be passed to test a perturbed value against the bounds.
    """
    s = as_wavenumber(s)
    if c2 is None:
        c2 = calibrate_c2()
    if z is None:
        z = z_coefficient(mode, s).z
    z = complex(z)
    nu = mode.nu
    re_neg = -z.real
    sign = 1.0 if s.imag > 0 else -1.0
    im_neg = -sign * z.imag  # = ∓Im z
    if mode.m == 0 and nu == 0:
        re_low = re_neg
        re_high = 0.5 + s.real - re_neg
        im_high = c2 + abs(s.imag) - im_neg if s.imag != 0 else float("inf")
        im_sign_ok = None
    else:
        re_low = re_neg - (nu + 0.5)
        re_high = mode.m + 2 * nu + s.real - re_neg
        if s.imag == 0:
            im_high = float("inf")
            im_sign_ok = None
        else:
            im_high = abs(s.imag) - im_neg
            im_sign_ok = bool(im_neg > 0) if abs(s.imag) >= STRICT_IM_MIN else None
    return BoundReport(
        mode=mode, s=s, z=z, re_low=re_low, re_high=re_high,
        im_sign_ok=im_sign_ok, im_high=im_high, c2=c2, tol=tol,
    )


def im_w0_margins(k, c2=None):
    """Margins ``c2 + k - Im w_0(k)`` for an array of ``k > 0``."""
    if c2 is None:
        c2 = calibrate_c2()
    m_sq, _ = hankel_modulus_arrays(0, np.asarray(k, dtype=float))
    return c2 + np.asarray(k, dtype=float) - 2.0 / (np.pi * m_sq)


__all__ = [
    "BOUND_ATOL", "BoundReport", "Mode", "SpectralValue", "as_wavenumber",
    "calibrate_c2", "check_bounds", "im_w0_margins", "laplace_gap", "ray_point",
    "w_mu", "z_coefficient", "z_coefficients",
]
