"""Command-line front end: parameter summaries, figure-data CSV emission,
OBJ mesh export (with stereographic projection for sphere-ambient
surfaces), and machine-readable verification reports.

Exit codes: 0 success / all checks pass, 1 verification failure, 2 usage
or inadmissible parameters.  Every failure path prints a single
machine-parsable line `error: <constraint>` to stderr.  Output is
deterministic for a fixed configuration: fixed seeds, sorted JSON keys,
17-significant-digit text floats, no timestamps.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import checks, euclidean, gluing, spherical
from .numerics import DegenerateDomain

__all__ = ["main"]

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _require_sphere_C(C: float) -> None:
    if C <= spherical.C_MIN:
        raise UsageError(
            f"C={_fmt(C)} inadmissible: need C > 4/3^(3/2) = {_fmt(spherical.C_MIN)}")


def _require_cstar(C: float, cstar: float) -> None:
    rng = gluing.cstar_range(C)
    if not rng.contains(cstar):
        raise UsageError(
            f"C*={_fmt(cstar)} inadmissible: need 0 < C* < {_fmt(rng.upper)}")


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_params(args) -> int:
    C = args.C
    _require_sphere_C(C)
    fam = spherical.family(C)
    r = fam.roots
    zm, zp = fam.zeta_limits
    rng = gluing.cstar_range(C)
    print(f"family constant            C    = {_fmt(C)}")
    print(f"curvature-route constant   C1   = {_fmt(fam.params.C1)}")
    print(f"strip roots                xi01 = {_fmt(r.xi01)}")
    print(f"                           xi00 = {_fmt(r.xi00)}")
    print(f"                           xi02 = {_fmt(r.xi02)}")
    print(f"curvature roots            k01  = {_fmt(r.k01)}")
    print(f"                           k02  = {_fmt(r.k02)}")
    print(f"turning-angle limits       zeta-1 = {_fmt(zm)}")
    print(f"                           zeta+1 = {_fmt(zp)}")
    print(f"admissible C* interval     (0, {_fmt(rng.upper)})")
    if args.Cstar is not None:
        _require_cstar(C, args.Cstar)
        at = gluing.atlas(C, args.Cstar)
        m1, p1 = at.h_limits
        print(f"height limits              h-1  = {_fmt(m1)}")
        print(f"                           h+1  = {_fmt(p1)}")
        print(f"profile period             {_fmt(at.period)}")
    return 0


def _clustered_strip_samples(roots, n):
    j = np.arange(1, n + 1)
    return roots.xi01 + (roots.xi02 - roots.xi01) * 0.5 * (
        1.0 - np.cos(math.pi * j / (n + 1)))


def cmd_curves(args) -> int:
    out = Path(args.out)
    n = args.samples
    fig = args.figure
    if fig == "fig1":
        par = euclidean.FamilyParamsR3.from_C(args.C)
        us = np.linspace(-2.2, 2.2, n)
        rows = []
        for u in us:
            p = euclidean.immersion_XC(par, float(u), 0.0)
            rows.append((u, p[0], p[2]))
        _write_csv(out, ["u", "x", "z"], rows)
        return 0
    _require_sphere_C(args.C)
    if args.Cstar is None:
        raise UsageError("this figure requires --cstar")
    _require_cstar(args.C, args.Cstar)
    at = gluing.atlas(args.C, args.Cstar, c0=args.c0)
    m1, p1 = at.h_limits
    if fig in ("fig2", "fig3", "fig4", "fig5"):
        xis = _clustered_strip_samples(at.roots, n)
        h0 = np.array([at.h0(float(x)) for x in xis])
        if fig == "fig2":
            _write_csv(out, ["xi", "h0"], zip(xis, h0))
        elif fig == "fig3":
            _write_csv(out, ["xi", "h0", "h1", "hm1"],
                       zip(xis, h0, 2.0 * p1 - h0, 2.0 * m1 - h0))
        elif fig == "fig4":
            _write_csv(out, ["f", "h0"], zip(at.Cstar / xis, h0))
        else:
            _write_csv(out, ["f", "h0", "h1", "hm1"],
                       zip(at.Cstar / xis, h0, 2.0 * p1 - h0, 2.0 * m1 - h0))
        return 0
    if fig == "fig6":
        if at.k_max < 11:
            raise UsageError("fig6 needs an atlas with k_max >= 11")
        lo = at.grid[-11]
        hi = at.grid[11]
        hs = np.sort(np.append(np.linspace(lo, hi, n), 0.0))  # base point always present
        rows = []
        for h in hs:
            p1c, p2c, _ = at.profile_components(float(h))
            rows.append((h, p1c, p2c))
        _write_csv(out, ["h", "x1", "x2"], rows)
        return 0
    raise UsageError(f"unknown figure {fig!r}")


def _stereographic(points: np.ndarray, pole: np.ndarray) -> np.ndarray:
    """Project unit 4-vectors from `pole` onto the equatorial 3-space."""
    pole = pole / np.linalg.norm(pole)
    target = np.array([0.0, 0.0, 0.0, -1.0])
    v = pole - target
    if np.linalg.norm(v) < 1e-12:
        rotated = points
    else:
        v = v / np.linalg.norm(v)
        rotated = points - 2.0 * np.outer(points @ v, v)
    denom = 1.0 + rotated[:, 3]
    if np.any(np.abs(denom) < 1e-12):
        raise UsageError("a mesh sample coincides with the projection pole")
    return rotated[:, :3] / denom[:, None]


def _grid_positions(args):
    """Evaluate the requested family on its grid; returns (points, nu, nv,
    wrap_v, is_spherical)."""
    nu, nv = args.grid
    family = args.family
    if family == "r3":
        if args.C <= 0.0:
            raise UsageError("C must be positive for the r3 family")
        par = euclidean.FamilyParamsR3.from_C(args.C)
        u0, u1 = args.u_range if args.u_range else (-1.5, 1.5)
        v0, v1 = args.v_range if args.v_range else (0.0, 2.0 * math.pi / 3.0)
        us = np.linspace(u0, u1, nu)
        vs = np.linspace(v0, v1, nv, endpoint=False) if args.wrap_v else np.linspace(v0, v1, nv)
        pts = np.array([euclidean.immersion_XC(par, float(u), float(v))
                        for u in us for v in vs])
        return pts, nu, nv, args.wrap_v, False
    _require_sphere_C(args.C)
    if family == "s3-local":
        fam = spherical.family(args.C)
        r = fam.roots
        margin = 1e-3 * (r.xi02 - r.xi01)
        u0, u1 = args.u_range if args.u_range else (r.xi01 + margin, r.xi02 - margin)
        v0, v1 = args.v_range if args.v_range else (0.0, 2.0 * math.pi / math.sqrt(args.C))
        pts = np.array([fam.immersion(float(x), float(t))
                        for x in np.linspace(u0, u1, nu)
                        for t in np.linspace(v0, v1, nv)])
        return pts, nu, nv, False, True
    if args.Cstar is None:
        raise UsageError(f"family {family!r} requires --cstar")
    _require_cstar(args.C, args.Cstar)
    at = gluing.atlas(args.C, args.Cstar, c0=args.c0)
    u0, u1 = args.u_range if args.u_range else (at.grid[-2], at.grid[2])
    if family == "revolution":
        v0, v1 = args.v_range if args.v_range else (0.0, 2.0 * math.pi * at.Cstar)
        vs = np.linspace(v0, v1, nv, endpoint=False) if args.wrap_v else np.linspace(v0, v1, nv)
        pts = np.array([at.immersion_psi(float(h), float(t))
                        for h in np.linspace(u0, u1, nu) for t in vs])
        return pts, nu, nv, args.wrap_v, False
    if family == "s3-complete":
        v0, v1 = args.v_range if args.v_range else (0.0, 2.0 * math.pi / math.sqrt(args.C))
        pts = np.array([at.immersion_phi(float(h), float(t))
                        for h in np.linspace(u0, u1, nu)
                        for t in np.linspace(v0, v1, nv)])
        return pts, nu, nv, False, True
    raise UsageError(f"unknown family {family!r}")


def _obj_lines(vertices: np.ndarray, nu: int, nv: int, wrap_v: bool) -> list[str]:
    lines = [f"# biconsurf mesh: {nu} x {nv} row-major grid"]
    for p in vertices:
        lines.append("v " + " ".join(_fmt(x) for x in p))
    cols = nv if wrap_v else nv - 1
    for i in range(nu - 1):
        for j in range(cols):
            jn = (j + 1) % nv
            a = i * nv + j + 1
            b = i * nv + jn + 1
            c = (i + 1) * nv + jn + 1
            d = (i + 1) * nv + j + 1
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
    return lines


def cmd_mesh(args) -> int:
    pts, nu, nv, wrap_v, is_spherical = _grid_positions(args)
    out = Path(args.out)
    if is_spherical:
        raw = out.with_suffix(".raw.csv")
        _write_csv(raw, ["x1", "x2", "x3", "x4"], pts)
        pole = np.array([float(x) for x in args.pole.split(",")])
        if pole.shape != (4,):
            raise UsageError("pole must be four comma-separated components")
        verts = _stereographic(pts, pole)
    else:
        verts = pts
    if args.format == "csv":
        _write_csv(out, ["x", "y", "z"], verts)
        return 0
    out.write_text("\n".join(_obj_lines(verts, nu, nv, wrap_v)) + "\n")
    return 0


def cmd_verify(args) -> int:
    if args.family not in checks.FAMILIES:
        raise UsageError(f"unknown family {args.family!r}")
    if args.family == "r3":
        if args.C <= 0.0:
            raise UsageError("C must be positive for the r3 family")
    else:
        _require_sphere_C(args.C)
        if args.family in ("s3-complete", "revolution"):
            if args.Cstar is None:
                raise UsageError(f"family {args.family!r} requires --cstar")
            _require_cstar(args.C, args.Cstar)
    report = checks.build_report(args.family, args.C, Cstar=args.Cstar,
                                 c0=args.c0, grid=args.grid_n, seed=args.seed)
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    for name, res in sorted(report["checks"].items()):
        status = "PASS" if res["pass"] else "FAIL"
        print(f"{status} {name}: value={_fmt(res['value'])} tol={_fmt(res['tolerance'])}",
              file=sys.stderr)
    return 0 if report["overall_pass"] else 1


# ----------------------------------------------------------------------
# Argument plumbing
# ----------------------------------------------------------------------

def _add_common(p, cstar_default=None):
    p.add_argument("--C", type=float, default=None, help="family constant")
    p.add_argument("--cstar", dest="Cstar", type=float, default=cstar_default,
                   help="revolution-radius constant")
    p.add_argument("--c0", type=float, default=0.0, help="base phase constant")
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with defaults; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="biconsurf",
        description="Construct, verify and export the complete biconservative "
                    "surfaces of revolution in R^3 and the unit 3-sphere.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print family constants, roots and limits")
    _add_common(p)

    p = sub.add_parser("curves", help="emit figure data as CSV")
    _add_common(p)
    p.add_argument("--figure", choices=FIGURES, required=True)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--out", type=str, required=True)

    p = sub.add_parser("mesh", help="export a surface mesh (OBJ or CSV)")
    _add_common(p)
    p.add_argument("--family", choices=checks.FAMILIES, required=True)
    p.add_argument("--grid", type=int, nargs=2, default=[64, 64],
                   metavar=("NU", "NV"))
    p.add_argument("--u-range", type=float, nargs=2, default=None)
    p.add_argument("--v-range", type=float, nargs=2, default=None)
    p.add_argument("--wrap-v", action="store_true",
                   help="close the mesh in the angular direction")
    p.add_argument("--pole", type=str, default="0,0,0,-1",
                   help="stereographic projection pole (4 components)")
    p.add_argument("--format", choices=("obj", "csv"), default="obj")
    p.add_argument("--out", type=str, required=True)

    p = sub.add_parser("verify", help="run the verification suite, emit JSON")
    _add_common(p)
    p.add_argument("--family", choices=checks.FAMILIES, required=True)
    p.add_argument("--grid-n", type=int, default=10,
                   help="per-strip sample count for grid checks")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", type=str, default=None)

    return ap


def _apply_config(args) -> None:
    """Merge config-file defaults under explicit flags (flags win)."""
    if getattr(args, "config", None) is None:
        return
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"config file unreadable: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        attr = {"cstar": "Cstar"}.get(key, key)
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _apply_config(args)
        if getattr(args, "C", None) is None:
            raise UsageError("--C is required (flag or config file)")
        handler = {
            "params": cmd_params,
            "curves": cmd_curves,
            "mesh": cmd_mesh,
            "verify": cmd_verify,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDomain as exc:
        print(f"error: degenerate domain: {exc}", file=sys.stderr)
        return 2
    except gluing.InvalidC as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
