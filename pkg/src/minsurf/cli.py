"""Command-line front end.

Subcommands:
  catalog   list built-in scenarios
  check     run verification suites (--suite, --scenario, --manifest)
  mesh      discrete checks on a Wavefront OBJ mesh (--obj)
  report    full run with plot-ready CSV output (--out, --format)

Exit codes: 0 all checks pass (inapplicable is not a failure), 1 at least
one verification failure, 2 numeric or configuration error.
"""

from __future__ import annotations

import argparse
import math
import pathlib
import sys

import numpy as np

from . import mesh as mesh_mod
from . import reporting
from .errors import MinsurfError
from .surfaces import builtin_catalog


def _print_records(records, stream=sys.stdout):
    w = max((len(f"{r.suite}/{r.scenario}/{r.check}") for r in records), default=20)
    for r in records:
        tag = f"{r.suite}/{r.scenario}/{r.check}"
        if r.status in ("pass", "fail"):
            detail = f"lhs={r.lhs:.6g} rhs={r.rhs:.6g} margin={r.margin:.3g}"
        else:
            detail = r.note
        stream.write(f"{tag:<{w}}  [{r.status.upper():^12}] {detail}\n")


def _cmd_catalog(args):
    for sc in builtin_catalog():
        amb = sc.ambient
        floors = []
        if amb.scalar_floor is not None:
            floors.append(f"S>={amb.scalar_floor:g}")
        if amb.sectional_floor is not None:
            floors.append(f"K>={amb.sectional_floor:g}")
        kind = "neck-centered" if sc.neck_centered else "pole-centered"
        print(
            f"{sc.name:<16} stable_claim={str(sc.stable_claim).lower():<5} {kind:<13} "
            f"r_max={sc.surface.r_max:g} {' '.join(floors)}"
        )
    return 0


def _manifest_from_args(args):
    if args.manifest:
        text = pathlib.Path(args.manifest).read_text()
        manifest = reporting.parse_manifest(text)
        if args.out:
            manifest = reporting.RunManifest(
                scenarios=manifest.scenarios,
                suites=manifest.suites,
                params=manifest.params,
                out_dir=args.out,
                fmt=args.format or manifest.fmt,
            )
        return manifest
    scenarios = tuple(s.strip() for s in (args.scenario or "plane,catenoid(c=1),h2-in-h3").split(",") if s.strip())
    suites = tuple(s.strip() for s in (args.suite or ",".join(reporting.SUITES)).split(",") if s.strip())
    params = {}
    for kv in args.param or []:
        key, _, value = kv.partition("=")
        if not _:
            raise MinsurfError(f"--param needs key=value, got '{kv}'")
        params[key] = type(reporting.DEFAULT_PARAMS.get(key, 0.0))(float(value))
    return reporting.RunManifest(
        scenarios=scenarios,
        suites=suites,
        params=params,
        out_dir=args.out,
        fmt=args.format or "csv",
    )


def _cmd_check(args):
    manifest = _manifest_from_args(args)
    flush = None
    if manifest.out_dir:
        flush = lambda recs: reporting.write_report(recs, manifest, manifest.out_dir)
    records, code = reporting.run(manifest, flush=flush)
    _print_records(records)
    if manifest.out_dir:
        path = reporting.write_report(records, manifest, manifest.out_dir)
        print(f"report written to {path}")
    return code


def _cmd_report(args):
    manifest = _manifest_from_args(args)
    if not manifest.out_dir:
        raise MinsurfError("report needs --out DIR")
    flush = lambda recs: reporting.write_report(recs, manifest, manifest.out_dir)
    records, code = reporting.run(manifest, flush=flush)
    reporting.write_report(records, manifest, manifest.out_dir)
    written = reporting.emit_plot_data(records, manifest, manifest.out_dir)
    _print_records(records)
    for path in written:
        print(f"wrote {path}")
    return code


def _cmd_mesh(args):
    text = pathlib.Path(args.obj).read_text()
    m = mesh_mod.parse_obj(text)
    print(
        f"mesh: V={m.n_vertices} E={m.n_edges} F={m.n_faces} chi={m.euler_characteristic} "
        f"closed={str(m.is_closed).lower()} h={m.max_edge_length:.6g}"
    )
    seed = args.seed_vertex
    fld = mesh_mod.geodesic_distance(m, seed)
    top = fld.max_finite
    if args.grid:
        lo, hi, n = args.grid.split(":")
        grid = np.linspace(float(lo), float(hi), int(n))
    else:
        grid = np.linspace(0.1 * top, 0.9 * top, 24)
    prof = mesh_mod.discrete_profile(fld, grid)
    check = mesh_mod.fiala_discrete_check(prof, chi_max=args.chi_max)
    print(f"fiala direction: {'pass' if check.passed else 'FAIL'} (tol_discrete={check.tol_discrete:.6g})")
    if not check.passed:
        print(f"  worst interval: {check.worst_interval}")
    if args.out:
        out = pathlib.Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "discrete_profile.csv"
        path.write_text(prof.to_csv())
        print(f"wrote {path}")
    return 0 if check.passed else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="minsurf",
        description="Verification lab for the geometry of stable minimal surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list built-in scenarios")

    p_check = sub.add_parser("check", help="run verification suites")
    p_check.add_argument("--suite", help="comma-separated suites (default: all)")
    p_check.add_argument("--scenario", help="comma-separated scenario names (default: catalog)")
    p_check.add_argument("--manifest", help="manifest file (overrides --suite/--scenario)")
    p_check.add_argument("--out", help="write the report here")
    p_check.add_argument("--format", choices=("csv", "json"))
    p_check.add_argument("--param", action="append", help="override a numeric parameter, key=value")

    p_mesh = sub.add_parser("mesh", help="discrete checks on an OBJ mesh")
    p_mesh.add_argument("--obj", required=True, help="path to a Wavefront OBJ file")
    p_mesh.add_argument("--seed-vertex", type=int, default=0)
    p_mesh.add_argument("--grid", help="radius grid as lo:hi:n")
    p_mesh.add_argument("--chi-max", type=int, default=1)
    p_mesh.add_argument("--out", help="write the discrete profile CSV here")

    p_report = sub.add_parser("report", help="full run with plot-ready data")
    p_report.add_argument("--manifest")
    p_report.add_argument("--suite")
    p_report.add_argument("--scenario")
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--format", choices=("csv", "json"), default="csv")
    p_report.add_argument("--param", action="append")

    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            return _cmd_catalog(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "mesh":
            return _cmd_mesh(args)
        if args.command == "report":
            return _cmd_report(args)
    except MinsurfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
