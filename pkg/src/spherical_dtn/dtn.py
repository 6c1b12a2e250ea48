"""Diagonal DtN operators on ``S_R``, their forms, and trace norms.

Everything acts on :class:`~spherical_dtn.harmonics.BoundaryCoefficients`.  The
``H^t(S_R)`` norms are defined by the Fourier weights::

    ||g||_t^2 = R^{n-1} sum (1 + m)^{2t} |g_{m,j}|^2,   t in {-1/2, 0, 1/2}
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, KindError
from .harmonics import BoundaryCoefficients, mode_indices, sphere_area
from .spectral import Mode, as_wavenumber, laplace_gap, z_coefficients

HELMHOLTZ = "helmholtz"
LAPLACE = "laplace"
LAPLACE_LOG = "laplace_log"


@dataclass(frozen=True)
class DtnKind:
    """Which exterior problem defines the DtN map: Helmholtz, Laplace or logarithmic Laplace."""

    variant: str
    s: complex = 0j

    def __post_init__(self):
        if self.variant not in (HELMHOLTZ, LAPLACE, LAPLACE_LOG):
            raise KindError(f"unknown DtN variant {self.variant!r}")
        object.__setattr__(self, "s", as_wavenumber(self.s) if self.variant == HELMHOLTZ else 0j)

    @classmethod
    def helmholtz(cls, s):
        return cls(HELMHOLTZ, s)

    @classmethod
    def laplace(cls):
        return cls(LAPLACE)

    @classmethod
    def laplace_log(cls):
        return cls(LAPLACE_LOG)

    def validate(self, n, R):
        if self.variant == LAPLACE_LOG:
            if n != 2:
                raise KindError("laplace_log requires n = 2")
            if R == 1.0:
                raise KindError("laplace_log requires R != 1 (log R = 0)")
        return self


def multipliers(kind, n, R, m):
    """Diagonal DtN symbol for each entry of the integer array ``m``."""
    kind.validate(n, R)
    m = np.asarray(m, dtype=int)
    if m.size == 0:
        return np.zeros(0, dtype=complex)
    nu = (n - 2) / 2
    if kind.variant == HELMHOLTZ and kind.s != 0:
        table = z_coefficients(n, kind.s * R, int(m.max()))
        return table[m] / R
    out = (-(m + 2 * nu) / R).astype(complex)
    if kind.variant == LAPLACE_LOG:
        out = np.where(m == 0, 1.0 / (R * math.log(R)), out)
    return out


def apply_dtn(kind, g):
    """``DtN g`` mode by mode."""
    return g.with_values(multipliers(kind, g.n, g.R, g.m) * g.values)


@dataclass(frozen=True)
class FormValue:
    value: complex

    @property
    def re(self):
        return self.value.real

    @property
    def im(self):
        return self.value.imag


def dtn_form(kind, g, h):
    """``<DtN g, conj h>_{S_R} = R^{n-2} sum z(sR) g_{m,j} conj(h_{m,j})``."""
    m, a, b = g.aligned(h)
    z = multipliers(kind, g.n, g.R, m) * g.R
    return FormValue(complex(g.R ** (g.n - 2) * np.sum(z * a * np.conj(b))))


def dtn_bilinear(kind, g, h):
    """Bilinear ``<DtN g, h>_{S_R}`` (no conjugation); symmetric in ``g, h``."""
    m, a, b = g.aligned(h)
    z = multipliers(kind, g.n, g.R, m) * g.R
    return complex(g.R ** (g.n - 2) * np.sum(z * a * b))


def surface_pairing(f, g):
    """Bilinear ``int_{S_R} f g`` in coefficient space (real orthonormal basis)."""
    _, a, b = f.aligned(g)
    return complex(f.R ** (f.n - 1) * np.sum(a * b))


def conjugate(g):
    return g.with_values(np.conj(g.values))


def sobolev_norm(g, order):
    """``sqrt(R^{n-1} sum (1+m)^{2 order} |g|^2)`` for ``order`` in {-1/2, 0, 1/2}."""
    if order not in (-0.5, 0, 0.5):
        raise DomainError("order must be -1/2, 0 or 1/2")
    weights = (1.0 + g.m) ** (2 * order)
    return math.sqrt(g.R ** (g.n - 1) * float(np.sum(weights * np.abs(g.values) ** 2)))


def indexed_trace_norm(g, s):
    """``sqrt(||g||_{1/2}^2 + |s| ||g||_0^2)``."""
    s = as_wavenumber(s)
    return math.sqrt(sobolev_norm(g, 0.5) ** 2 + abs(s) * sobolev_norm(g, 0) ** 2)


@dataclass(frozen=True)
class NormBundle:
    l2_surface: float
    h_half: float
    h_minus_half: float
    h_half_indexed: float


def norm_bundle(g, s):
    return NormBundle(
        l2_surface=sobolev_norm(g, 0),
        h_half=sobolev_norm(g, 0.5),
        h_minus_half=sobolev_norm(g, -0.5),
        h_half_indexed=indexed_trace_norm(g, s),
    )


@dataclass
class DefinitenessReport:
    """Real/imaginary parts of ``<DtN g, conj g>`` against their bounds.

    ``lower_bound`` is ``(n-2)/(2R) ||g||_0^2`` (the scaled form of the
    ``R = 1`` constant ``(n-2)/2``); ``upper_ratio`` is ``-Re / ||g||_{1/2,s}^2``.
    """

    form: FormValue
    l2_sq: float
    lower_bound: float
    lower_margin: float
    indexed_sq: float
    upper_ratio: float
    im_sign_ok: object

    @property
    def lower_ok(self):
        return self.lower_margin >= -1e-12 * max(1.0, self.l2_sq)


def definiteness_report(kind, g):
    if not np.any(g.values):
        raise DomainError("definiteness report needs g != 0")
    form = dtn_form(kind, g, g)
    l2_sq = sobolev_norm(g, 0) ** 2
    lower = (g.n - 2) / (2.0 * g.R) * l2_sq
    s = kind.s
    indexed_sq = indexed_trace_norm(g, s) ** 2
    if s.imag != 0:
        im_sign_ok = bool(-math.copysign(1.0, s.imag) * form.im > 0)
    else:
        im_sign_ok = None
    return DefinitenessReport(
        form=form, l2_sq=l2_sq, lower_bound=lower, lower_margin=-form.re - lower,
        indexed_sq=indexed_sq, upper_ratio=-form.re / indexed_sq, im_sign_ok=im_sign_ok,
    )


# ---------------------------------------------------------------------------
# corpora for fitted constants
# ---------------------------------------------------------------------------
def random_wavenumber(rng, rho_min=1e-3, rho_max=1e3):
    """``rho e^{i theta}``: ``rho`` log-uniform, ``theta`` uniform in ``[-pi/2, pi/2]``."""
    rho = math.exp(rng.uniform(math.log(rho_min), math.log(rho_max)))
    theta = rng.uniform(-0.5 * math.pi, 0.5 * math.pi)
    return complex(rho * math.cos(theta), rho * math.sin(theta))


def coefficient_corpus(n, R, band, size, seed=0):
    """``size`` coefficient vectors: single modes first, then sparse and dense random ones.

    The sequence is deterministic in ``seed`` and a longer corpus extends a
    shorter one.
    """
    rng = np.random.default_rng(seed)
    idx = mode_indices(n, band)
    out = []
    for k in range(size):
        if k < len(idx):
            vals = np.zeros(len(idx), dtype=complex)
            vals[k] = 1.0
            out.append(BoundaryCoefficients.zeros(n, R, band).with_values(vals))
        else:
            density = 0.1 if k % 2 else 1.0
            out.append(BoundaryCoefficients.random(n, R, band, rng, density=density))
    return out


def fit_boundedness_constant(n, R=1.0, band=8, size=1000, seed=0):
    """Witness ``C`` with ``|<DtN(s) g, conj h>| <= C ||g||_{1/2,s} ||h||_{1/2,s}``.

    Each sample draws a wavenumber and a pair ``(g, h)``; returns the maximum
    ratio over the corpus.  Single-mode samples use ``h = g``.
    """
    rng = np.random.default_rng(seed + 7919)
    s_all = np.array([random_wavenumber(rng) for _ in range(size)])
    z_all = z_coefficients(n, s_all * R, band)
    gs = coefficient_corpus(n, R, band, size, seed)
    hs = coefficient_corpus(n, R, band, size, seed + 1)
    singles = len(mode_indices(n, band))
    scale = R ** (n - 2)
    best = 0.0
    for k, (g, h) in enumerate(zip(gs, hs)):
        if k < singles:
            h = g
        s = s_all[k]
        form = scale * np.sum(z_all[g.m, k] * g.values * np.conj(h.values))
        ratio = abs(form) / (indexed_trace_norm(g, s) * indexed_trace_norm(h, s))
        best = max(best, ratio)
    return best


def operator_distance(n, R, s, band):
    """``max_m |z(sR) - z(0)| / (1+m)``; tends to zero as ``s -> 0``."""
    return max(abs(laplace_gap(Mode(m, n), s * R)) / (1 + m) for m in range(band + 1))


def log_difference(g):
    """``(DtN_Delta - DtN_log) g`` in coefficient space (``n = 2``)."""
    a = apply_dtn(DtnKind.laplace(), g)
    b = apply_dtn(DtnKind.laplace_log(), g)
    return a.with_values(a.values - b.values)


def constant_field(n, R, value, band=0):
    """Coefficients of the constant function ``value`` on ``S_R``."""
    g = BoundaryCoefficients.zeros(n, R, band)
    vals = np.zeros(g.values.size, dtype=complex)
    vals[0] = value * math.sqrt(sphere_area(n))
    return g.with_values(vals)
