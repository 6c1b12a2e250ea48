"""Laplace-Beltrami eigendata on the unit sphere and boundary coefficient vectors.

Coefficients are always taken with respect to the ``L^2(S_1)``-orthonormal real
basis, also for traces on ``S_R``; inner products on ``S_R`` carry an explicit
``R^{n-1}``.

Basis conventions (``j`` is 1-based):

* ``n = 2``: ``1/sqrt(2 pi)``; for ``m >= 1`` ``j=1`` is ``cos(m theta)/sqrt(pi)``
  and ``j=2`` is ``sin(m theta)/sqrt(pi)``.
* ``n = 3``: real harmonics without Condon-Shortley phase;
  ``j=1`` is the zonal one, ``j=2k`` the ``cos(k phi)`` and ``j=2k+1`` the
  ``sin(k phi)`` harmonic of azimuthal order ``k``.
"""

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import BandLimitError, DomainError

ALIAS_RTOL = 1e-10


def sphere_area(n, R=1.0):
    """``|S_R| = 2 pi^{n/2} R^{n-1} / Gamma(n/2)``."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2) * R ** (n - 1)


def eigenvalue(m, n):
    """``lambda_m = m (m + n - 2)``."""
    if m < 0 or n < 2:
        raise DomainError("need m >= 0 and n >= 2")
    return m * (m + n - 2)


def multiplicity(m, n):
    """Dimension of the eigenspace of ``lambda_m`` on ``S^{n-1}``.

    ``(2m+n-2)/(m+n-2) * C(m+n-2, n-2)`` for ``m >= 1``, and 1 for ``m = 0``
    (the formula is indeterminate at ``(0, 2)``).
    """
    if m < 0 or n < 2:
        raise DomainError("need m >= 0 and n >= 2")
    if m == 0:
        return 1
    return (2 * m + n - 2) * math.comb(m + n - 2, n - 2) // (m + n - 2)


def mode_indices(n, band):
    """All ``(m, j)`` with ``m <= band`` in storage order."""
    return [(m, j) for m in range(band + 1) for j in range(1, multiplicity(m, n) + 1)]


# ---------------------------------------------------------------------------
# coefficient vectors
# ---------------------------------------------------------------------------
@dataclass
class BoundaryCoefficients:
    """Finite expansion ``g(R xi) = sum g_{m,j} Y_{m,j}(xi)``.

    ``m``, ``j`` are integer arrays and ``values`` the complex amplitudes.
    """

    n: int
    R: float
    m: np.ndarray
    j: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.n = int(self.n)
        self.R = float(self.R)
        if self.n < 2:
            raise DomainError("dimension must be >= 2")
        if not self.R > 0:
            raise DomainError("radius must be positive")
        self.m = np.asarray(self.m, dtype=int).ravel()
        self.j = np.asarray(self.j, dtype=int).ravel()
        self.values = np.asarray(self.values, dtype=complex).ravel()
        if not (self.m.shape == self.j.shape == self.values.shape):
            raise DomainError("m, j and values must have equal length")
        if np.any(self.m < 0):
            raise DomainError("m must be nonnegative")
        mult = np.array([multiplicity(int(mm), self.n) for mm in self.m], dtype=int)
        if np.any(self.j < 1) or np.any(self.j > mult):
            raise DomainError("j outside 1..multiplicity(m, n)")
        if len(set(zip(self.m.tolist(), self.j.tolist()))) != self.m.size:
            raise DomainError("duplicate (m, j) entries")

    @classmethod
    def from_dict(cls, n, R, entries):
        keys = sorted(entries)
        return cls(
            n=n, R=R,
            m=[k[0] for k in keys], j=[k[1] for k in keys],
            values=[entries[k] for k in keys],
        )

    @classmethod
    def zeros(cls, n, R, band):
        idx = mode_indices(n, band)
        return cls(n=n, R=R, m=[i[0] for i in idx], j=[i[1] for i in idx], values=np.zeros(len(idx)))

    @classmethod
    def random(cls, n, R, band, rng, density=1.0):
        """Gaussian complex amplitudes on ``m <= band``; ``density < 1`` zeroes entries."""
        out = cls.zeros(n, R, band)
        size = out.values.size
        vals = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        if density < 1.0:
            vals = vals * (rng.random(size) < density)
            if not np.any(vals):
                vals[rng.integers(size)] = 1.0
        out.values = vals
        return out

    @property
    def band(self):
        return int(self.m.max()) if self.m.size else 0

    def to_dict(self):
        return {(int(a), int(b)): complex(v) for a, b, v in zip(self.m, self.j, self.values)}

    def with_values(self, values):
        return BoundaryCoefficients(n=self.n, R=self.R, m=self.m, j=self.j, values=values)

    def aligned(self, other):
        """Both coefficient arrays on the union of supports (same order)."""
        if self.n != other.n or not math.isclose(self.R, other.R, rel_tol=1e-12):
            raise DomainError("coefficients live on different spheres")
        a, b = self.to_dict(), other.to_dict()
        keys = sorted(set(a) | set(b))
        m = np.array([k[0] for k in keys], dtype=int)
        va = np.array([a.get(k, 0j) for k in keys], dtype=complex)
        vb = np.array([b.get(k, 0j) for k in keys], dtype=complex)
        return m, va, vb


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------
def _fmt(x):
    return repr(float(x))


def to_csv(coeffs):
    buf = io.StringIO()
    buf.write(f"# n={coeffs.n} R={_fmt(coeffs.R)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "j", "re", "im"])
    for a, b, v in zip(coeffs.m, coeffs.j, coeffs.values):
        writer.writerow([int(a), int(b), _fmt(v.real), _fmt(v.imag)])
    return buf.getvalue()


def to_json(coeffs):
    entries = [
        {"m": int(a), "j": int(b), "re": float(v.real), "im": float(v.imag)}
        for a, b, v in zip(coeffs.m, coeffs.j, coeffs.values)
    ]
    return json.dumps({"n": coeffs.n, "R": coeffs.R, "entries": entries}, indent=1) + "\n"


def _parse_meta(lines):
    meta = {}
    for line in lines:
        for token in line.lstrip("#").split():
            if "=" in token:
                key, value = token.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def from_csv(text):
    lines = text.splitlines()
    meta = _parse_meta([ln for ln in lines if ln.startswith("#")])
    body = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if "n" not in meta or "R" not in meta:
        raise DomainError("coefficient CSV needs '# n=<int> R=<float>' metadata")
    reader = csv.DictReader(body)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["m", "j", "re", "im"]:
        raise DomainError("coefficient CSV header must be m,j,re,im")
    entries = {}
    for row in reader:
        key = (int(row["m"]), int(row["j"]))
        entries[key] = complex(float(row["re"]), float(row["im"]))
    return BoundaryCoefficients.from_dict(int(meta["n"]), float(meta["R"]), entries)


def from_json(text):
    data = json.loads(text)
    try:
        entries = {(int(e["m"]), int(e["j"])): complex(float(e["re"]), float(e["im"])) for e in data["entries"]}
        return BoundaryCoefficients.from_dict(int(data["n"]), float(data["R"]), entries)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed coefficient JSON: {exc}") from exc


def load_coefficients(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).lower().endswith(".json") or text.lstrip().startswith("{"):
        return from_json(text)
    return from_csv(text)


# ---------------------------------------------------------------------------
# point evaluation (n = 2, 3)
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SurfaceGrid:
    """Quadrature on ``S_1`` exact for products of harmonics up to ``band``.

    ``points`` has shape ``(N, n)``; ``angles`` holds ``theta`` (n=2) or
    ``(theta, phi)`` columns (n=3).
    """

    n: int
    band: int
    points: np.ndarray
    weights: np.ndarray
    angles: np.ndarray


def surface_grid(n, band):
    """Product grid resolving band ``band`` (products up to ``2*band`` integrated exactly)."""
    if n == 2:
        count = 2 * band + 2
        theta = 2.0 * np.pi * np.arange(count) / count
        weights = np.full(count, 2.0 * np.pi / count)
        points = np.column_stack([np.cos(theta), np.sin(theta)])
        return SurfaceGrid(n=2, band=band, points=points, weights=weights, angles=theta[:, None])
    if n == 3:
        x, wx = np.polynomial.legendre.leggauss(band + 1)
        count = 2 * band + 2
        phi = 2.0 * np.pi * np.arange(count) / count
        theta = np.arccos(x)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        weights = np.outer(wx, np.full(count, 2.0 * np.pi / count)).ravel()
        tt, pp = tt.ravel(), pp.ravel()
        points = np.column_stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)])
        return SurfaceGrid(n=3, band=band, points=points, weights=weights, angles=np.column_stack([tt, pp]))
    raise DomainError("point evaluation is only available for n in {2, 3}")


def points_to_angles(points):
    """Angles of unit vectors (rows); ``(theta,)`` for n=2, ``(theta, phi)`` for n=3."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    norm = np.linalg.norm(pts, axis=1, keepdims=True)
    pts = pts / norm
    if pts.shape[1] == 2:
        return np.arctan2(pts[:, 1], pts[:, 0])[:, None]
    if pts.shape[1] == 3:
        theta = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        return np.column_stack([theta, phi])
    raise DomainError("point evaluation is only available for n in {2, 3}")


def _legendre_table(band, x):
    """Normalised ``Pbar_l^k(x)`` with ``int_{-1}^1 Pbar^2 dx = 1/(2 pi)``, shape (band+1, band+1, N)."""
    x = np.asarray(x, dtype=float)
    sin_t = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    table = np.zeros((band + 1, band + 1) + x.shape)
    table[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for k in range(1, band + 1):
        table[k, k] = math.sqrt((2 * k + 1) / (2.0 * k)) * sin_t * table[k - 1, k - 1]
    for k in range(0, band):
        table[k + 1, k] = math.sqrt(2 * k + 3) * x * table[k, k]
    for k in range(0, band + 1):
        for ell in range(k + 2, band + 1):
            a = math.sqrt((4.0 * ell * ell - 1) / (ell * ell - k * k))
            b = math.sqrt(((ell - 1) ** 2 - k * k) / (4.0 * (ell - 1) ** 2 - 1))
            table[ell, k] = a * (x * table[ell - 1, k] - b * table[ell - 2, k])
    return table


def basis_matrix(n, band, angles):
    """Real basis values ``Y_{m,j}`` at the angles, shape ``(N, #modes)``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    idx = mode_indices(n, band)
    out = np.empty((angles.shape[0], len(idx)))
    if n == 2:
        theta = angles[:, 0]
        for col, (m, j) in enumerate(idx):
            if m == 0:
                out[:, col] = 1.0 / math.sqrt(2.0 * math.pi)
            elif j == 1:
                out[:, col] = np.cos(m * theta) / math.sqrt(math.pi)
            else:
                out[:, col] = np.sin(m * theta) / math.sqrt(math.pi)
        return out
    if n == 3:
        theta, phi = angles[:, 0], angles[:, 1]
        leg = _legendre_table(band, np.cos(theta))
        root2 = math.sqrt(2.0)
        for col, (m, j) in enumerate(idx):
            k = j // 2
            if k == 0:
                out[:, col] = leg[m, 0]
            elif j % 2 == 0:
                out[:, col] = root2 * leg[m, k] * np.cos(k * phi)
            else:
                out[:, col] = root2 * leg[m, k] * np.sin(k * phi)
        return out
    raise DomainError("point evaluation is only available for n in {2, 3}")


def _basis_for(coeffs, angles, band):
    matrix = basis_matrix(coeffs.n, band, angles)
    position = {key: col for col, key in enumerate(mode_indices(coeffs.n, band))}
    cols = [position[(int(a), int(b))] for a, b in zip(coeffs.m, coeffs.j)]
    return matrix[:, cols]


def evaluate(coeffs, angles):
    """Series ``sum g_{m,j} Y_{m,j}`` at explicit angles."""
    if coeffs.n not in (2, 3):
        raise DomainError("point evaluation is only available for n in {2, 3}")
    if coeffs.m.size == 0:
        return np.zeros(np.atleast_2d(angles).shape[0], dtype=complex)
    return _basis_for(coeffs, angles, coeffs.band) @ coeffs.values


def synthesize(coeffs, grid):
    """Sample the expansion at the grid points."""
    if grid.n != coeffs.n:
        raise DomainError("grid and coefficients have different dimensions")
    if coeffs.m.size and coeffs.band > grid.band:
        raise BandLimitError(f"band {coeffs.band} exceeds grid band {grid.band}")
    return evaluate(coeffs, grid.angles)


def analyze(values, grid, band=None, R=1.0):
    """Quadrature inner products of sampled values against ``Y_{m,j}``, ``m <= band``.

    Warns when the sample energy not captured by the band exceeds
    ``ALIAS_RTOL`` of the total.
    """
    band = grid.band if band is None else band
    if band > grid.band:
        raise BandLimitError(f"band {band} exceeds grid band {grid.band}")
    values = np.asarray(values, dtype=complex)
    basis = basis_matrix(grid.n, band, grid.angles)
    amplitudes = basis.T @ (grid.weights * values)
    total = float(np.sum(grid.weights * np.abs(values) ** 2))
    captured = float(np.sum(np.abs(amplitudes) ** 2))
    if total > 0 and (total - captured) > ALIAS_RTOL * total:
        warnings.warn(
            f"energy beyond band {band}: {(total - captured) / total:.3e} of total",
            RuntimeWarning,
            stacklevel=2,
        )
    idx = mode_indices(grid.n, band)
    return BoundaryCoefficients(
        n=grid.n, R=R, m=[i[0] for i in idx], j=[i[1] for i in idx], values=amplitudes,
    )


def surface_mean(coeffs):
    """``(1/|S_R|) int_{S_R} g`` from the ``(0,1)`` coefficient."""
    value = coeffs.to_dict().get((0, 1), 0j)
    return value / math.sqrt(sphere_area(coeffs.n))
