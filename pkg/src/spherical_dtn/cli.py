"""Command-line front end: ``spherical-dtn {coeffs,bounds,solve,friedrichs}``.

Exit codes: 0 success, 1 a verified bound or stability check failed,
2 invalid configuration or input, 3 special-function failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import dtn as dtn_mod
from . import exterior, friedrichs, harmonics, spectral
from .exceptions import AccuracyError, DtnError
from .special_functions import ORACLE_TOL, hankel_modulus_arrays, nicholson_integral

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_SPECIAL = 0, 1, 2, 3


class ConfigError(DtnError, ValueError):
    """Invalid command-line configuration."""


@dataclass
class RunConfig:
    command: str
    n: int = None
    R: float = 1.0
    s: complex = 0j
    m_max: int = None
    fmt: str = "csv"
    output: str = None
    options: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------
def parse_wavenumber(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"wavenumber must be 're,im', got {text!r}") from None
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2 or not all(math.isfinite(p) for p in parts):
        raise argparse.ArgumentTypeError(f"wavenumber must be 're,im', got {text!r}")
    return complex(parts[0], parts[1])


def parse_grid(text):
    """``start:stop:count`` -> float array (``count >= 1``)."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be 'start:stop:count', got {text!r}") from None
    if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}")
    return (start, stop, count)


def fmt(x):
    return repr(float(x))


def write_output(text, path):
    """Write ``text`` to ``path`` atomically, or to stdout when ``path`` is None or '-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_text(rows, header, meta, fmt_name):
    if fmt_name == "json":
        payload = dict(meta)
        payload["rows"] = [dict(zip(header, row)) for row in rows]
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={fmt(v) if isinstance(v, float) else v}" for k, v in meta.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def worker_count():
    raw = os.environ.get("SPHERICAL_DTN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SPHERICAL_DTN_THREADS must be an integer, got {raw!r}") from None


def _validate_common(cfg):
    if cfg.n is not None and cfg.n < 2:
        raise ConfigError("--dim must be >= 2")
    if not (cfg.R > 0 and math.isfinite(cfg.R)):
        raise ConfigError("--radius must be positive")
    if cfg.s.real < 0:
        raise ConfigError("--wavenumber must have nonnegative real part")
    if cfg.m_max is not None and cfg.m_max < 0:
        raise ConfigError("--max-m must be nonnegative")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_coeffs(cfg):
    """Table of ``z_{m,nu}(sR)`` for ``m <= m_max``."""
    _validate_common(cfg)
    n = cfg.n if cfg.n is not None else 3
    m_max = cfg.m_max if cfg.m_max is not None else 10
    z = spectral.z_coefficients(n, cfg.s * cfg.R, m_max)
    nu = (n - 2) / 2
    rows = [(m, nu, float(z[m].real), float(z[m].imag)) for m in range(m_max + 1)]
    meta = {"n": n, "R": float(cfg.R), "re_s": float(cfg.s.real), "im_s": float(cfg.s.imag)}
    write_output(table_text(rows, ["m", "nu", "re_z", "im_z"], meta, cfg.fmt), cfg.output)
    return EXIT_OK


def _bounds_grid():
    pts = [0j]
    for rho in np.logspace(-3, 3, 13):
        for theta in (-90, -45, 0, 45, 90):
            pts.append(spectral.ray_point(float(rho), theta))
    return pts


def _modulus_rows(n, m_max):
    nu = (n - 2) / 2
    mus = [nu + k for k in range(m_max + 1) if nu + k <= 5] or [nu]
    x = np.logspace(-2, math.log10(50), 40)
    rows = []
    for mu in mus:
        m_sq, dm_sq = hankel_modulus_arrays(mu, x)
        slope = -x * dm_sq
        for xi, ms, sl in zip(x, m_sq, slope):
            if mu >= 0.5:
                lo, hi = ms, 2 * mu * ms
            else:
                lo, hi = 2 * mu * ms, ms
            chain = min(sl - lo, hi - sl) / ms
            oracle = nicholson_integral(mu, float(xi))
            rel = abs(oracle.value - ms) / ms
            ok = chain >= -1e-9 and rel <= ORACLE_TOL
            rows.append(("modulus", "", mu, float(xi), 0.0, float(chain), float(rel), "ok" if ok else "violation"))
    return rows


def cmd_bounds(cfg):
    """Verify the spectral bounds, the modulus chain and the form definiteness."""
    _validate_common(cfg)
    dims = [cfg.n] if cfg.n is not None else list(range(2, 8))
    m_max = cfg.m_max if cfg.m_max is not None else 30
    perturb = cfg.options.get("perturb", 0.0)
    c2 = spectral.calibrate_c2()
    rows = []
    checked = 0
    for n in dims:
        for s in _bounds_grid():
            z_all = spectral.z_coefficients(n, s, m_max)
            for m in range(m_max + 1):
                mode = spectral.Mode(m, n)
                rep = spectral.check_bounds(mode, s, c2=c2, z=complex(z_all[m]) + perturb)
                checked += 1
                if not rep.passed:
                    worst = min(rep.re_low, rep.re_high, rep.im_high)
                    rows.append(("spectral", m, mode.mu, s.real, s.imag, float(worst), 0.0, "+".join(rep.violations)))
        # form definiteness on a small seeded corpus at the given radius
        corpus = dtn_mod.coefficient_corpus(n, cfg.R, min(m_max, 6), 40, seed=n)
        for s in (0.5 + 0j, 2j, -2j, 1 + 1j):
            kind = dtn_mod.DtnKind.helmholtz(s)
            for g in corpus:
                rep = dtn_mod.definiteness_report(kind, g)
                checked += 1
                if not rep.lower_ok or rep.im_sign_ok is False:
                    rows.append(("form", "", "", s.real, s.imag, float(rep.lower_margin), 0.0, "violation"))
        if cfg.options.get("modulus"):
            mod_rows = _modulus_rows(n, m_max)
            checked += len(mod_rows)
            if cfg.options.get("verbose"):
                rows.extend(mod_rows)
            else:
                rows.extend(r for r in mod_rows if r[-1] != "ok")
    violations = sum(1 for r in rows if r[-1] not in ("ok",))
    meta = {
        "dims": ",".join(map(str, dims)), "m_max": m_max, "R": float(cfg.R), "c2": float(c2),
        "perturb": float(perturb), "checked": checked, "violations": violations,
    }
    header = ["suite", "m", "mu", "re_s", "im_s", "margin", "oracle_rel", "status"]
    write_output(table_text(rows, header, meta, cfg.fmt), cfg.output)
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_solve(cfg):
    """Evaluate the exterior field of the input Dirichlet data."""
    path = cfg.options.get("input")
    if not path:
        raise ConfigError("solve needs --input")
    try:
        g = harmonics.load_coefficients(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if cfg.n is not None and cfg.n != g.n:
        raise ConfigError(f"--dim {cfg.n} does not match input dimension {g.n}")
    if cfg.options.get("radius_given") and not math.isclose(cfg.R, g.R, rel_tol=1e-12):
        raise ConfigError(f"--radius {cfg.R} does not match input radius {g.R}")
    cfg.R = g.R
    _validate_common(cfg)
    if g.n not in (2, 3):
        raise ConfigError("point output is only available for n in {2, 3}")
    kind = _kind(cfg.options.get("kind", "helmholtz"), cfg.s)
    field_ = exterior.ExteriorField(g, kind)
    start, stop, count = cfg.options.get("r_grid") or (g.R, 4 * g.R, 7)
    radii = np.linspace(start, stop, count)
    if np.any(radii < g.R):
        raise ConfigError("--r-grid must satisfy r >= R")
    band = cfg.options.get("directions") or max(g.band, 1)
    grid = harmonics.surface_grid(g.n, band)
    rows = []
    for r in radii:
        values = evaluate_on_directions(field_, r, grid)
        for xi, u in zip(grid.points, values):
            rows.append((float(r), *map(float, xi), float(u.real), float(u.imag)))
    header = ["r"] + [f"xi{k + 1}" for k in range(g.n)] + ["re_u", "im_u"]
    meta = {"n": g.n, "R": float(g.R), "kind": kind.variant, "re_s": float(kind.s.real), "im_s": float(kind.s.imag)}
    text = table_text(rows, header, meta, cfg.fmt)
    neumann = dtn_mod.apply_dtn(kind, g)
    neumann_path = cfg.options.get("neumann")
    if neumann_path is None and cfg.output not in (None, "-"):
        neumann_path = os.path.splitext(cfg.output)[0] + ".neumann." + ("json" if cfg.fmt == "json" else "csv")
    write_output(text, cfg.output)
    if neumann_path:
        body = harmonics.to_json(neumann) if cfg.fmt == "json" else harmonics.to_csv(neumann)
        write_output(body, neumann_path)
    return EXIT_OK


def evaluate_on_directions(field_, r, grid):
    """``u(r xi)`` for all grid directions at one radius."""
    g = field_.coefficients
    value, _ = field_.modal(r)
    return harmonics.evaluate(g.with_values(value[0]), grid.angles)


def _kind(name, s):
    if name == "helmholtz":
        return dtn_mod.DtnKind.helmholtz(s)
    if name == "laplace":
        return dtn_mod.DtnKind.laplace()
    if name == "laplace_log":
        return dtn_mod.DtnKind.laplace_log()
    raise ConfigError(f"unknown kind {name!r}")


def cmd_friedrichs(cfg):
    """Friedrichs-ratio sweep with refinement stability verdict."""
    _validate_common(cfg)
    n = cfg.n if cfg.n is not None else 3
    observe = cfg.options.get("observe_only", False)
    if n < 3 and not observe:
        raise ConfigError("the Friedrichs inequality is only asserted for n >= 3; rerun with --observe-only to record ratios anyway")
    m_max = cfg.m_max if cfg.m_max is not None else 10
    spec = cfg.options.get("s_grid")
    if spec is None:
        grid = friedrichs.WavenumberGrid(1e-3, 1e3, 13, (-90, -45, 0, 45, 90), True, "log", 50.0)
    else:
        start, stop, count = spec
        if start < 0 or stop < start:
            raise ConfigError("--s-grid needs 0 <= start <= stop")
        grid = friedrichs.WavenumberGrid(start, stop, count, (0.0,), False, "linear")
    families = cfg.options.get("families") or friedrichs.FAMILIES
    report = friedrichs.friedrichs_sweep(
        n, cfg.R, grid, m_max, families=families, observe_only=observe, workers=worker_count(),
    )
    rows = [
        (r.n, float(r.R), r.m, r.family, float(r.s.real), float(r.s.imag), float(r.ratio))
        for r in report.rows
    ]
    meta = {"n": n, "R": float(cfg.R), "m_max": m_max, "observe_only": str(observe).lower()}
    header = ["n", "R", "m", "family", "re_s", "im_s", "ratio"]
    summary = json.dumps(_jsonable(report.summary()), indent=1, sort_keys=True) + "\n"
    summary_path = cfg.options.get("summary")
    if summary_path is None and cfg.output not in (None, "-"):
        summary_path = os.path.splitext(cfg.output)[0] + ".summary.json"
    write_output(table_text(rows, header, meta, cfg.fmt), cfg.output)
    if summary_path:
        write_output(summary, summary_path)
    else:
        sys.stderr.write(summary)
    if observe:
        return EXIT_OK
    ok = report.stable and report.max_coupling_residual <= friedrichs.COUPLING_TOL
    return EXIT_OK if ok else EXIT_VIOLATION


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# argparse
# ---------------------------------------------------------------------------
def build_parser():
    parser = argparse.ArgumentParser(prog="spherical-dtn", description="Spherical DtN operators for Helmholtz and Laplace.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dim_default=None):
        p.add_argument("--dim", type=int, default=dim_default, help="ambient dimension n >= 2")
        p.add_argument("--radius", type=float, default=None, help="sphere radius R (default 1)")
        p.add_argument("--wavenumber", type=parse_wavenumber, default=0j, help="s as 're,im'")
        p.add_argument("--max-m", type=int, default=None, dest="max_m")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None, help="output path (default stdout)")

    p = sub.add_parser("coeffs", help="table of z_{m,nu}(sR)")
    common(p)
    p = sub.add_parser("bounds", help="verify spectral, modulus and form bounds")
    common(p)
    p.add_argument("--modulus", action="store_true", help="also run the modulus chain and Nicholson oracle")
    p.add_argument("--perturb", type=float, default=0.0, help="add a constant to z before checking (test hook)")
    p.add_argument("--verbose", action="store_true", help="list passing modulus rows too")
    p = sub.add_parser("solve", help="exterior field of Dirichlet data")
    common(p)
    p.add_argument("--input", required=True, help="coefficient file (CSV or JSON)")
    p.add_argument("--kind", choices=("helmholtz", "laplace", "laplace_log"), default="helmholtz")
    p.add_argument("--r-grid", type=parse_grid, default=None, dest="r_grid")
    p.add_argument("--directions", type=int, default=None, help="band of the direction grid")
    p.add_argument("--neumann", default=None, help="path for the Neumann trace coefficients")
    p = sub.add_parser("friedrichs", help="Friedrichs-ratio sweep")
    common(p)
    p.add_argument("--s-grid", type=parse_grid, default=None, dest="s_grid", help="real wavenumbers start:stop:count")
    p.add_argument("--families", default=None, help="comma list of polynomial,boundary-layer")
    p.add_argument("--observe-only", action="store_true", dest="observe_only")
    p.add_argument("--summary", default=None, help="path for the summary JSON")
    return parser


def config_from_args(args):
    options = {}
    for key in ("modulus", "perturb", "verbose", "input", "kind", "r_grid", "directions",
                "neumann", "s_grid", "observe_only", "summary"):
        if hasattr(args, key):
            options[key] = getattr(args, key)
    if getattr(args, "families", None):
        fams = tuple(f.strip() for f in args.families.split(","))
        bad = [f for f in fams if f not in friedrichs.FAMILIES]
        if bad:
            raise ConfigError(f"unknown families {bad}")
        options["families"] = fams
    options["radius_given"] = args.radius is not None
    return RunConfig(
        command=args.command, n=args.dim, R=args.radius if args.radius is not None else 1.0,
        s=args.wavenumber, m_max=args.max_m, fmt=args.format, output=args.output, options=options,
    )


COMMANDS = {"coeffs": cmd_coeffs, "bounds": cmd_bounds, "solve": cmd_solve, "friedrichs": cmd_friedrichs}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except AccuracyError as exc:
        sys.stderr.write(f"spherical-dtn: special-function failure: {exc}\n")
        return EXIT_SPECIAL
    except DtnError as exc:
        sys.stderr.write(f"spherical-dtn: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
