"""Command-line interface.

Subcommands mirror the library layers: ``validate`` (contact certificate and
trajectory export), ``orbits`` (torus scan), ``twist`` and ``surgery``
(profile transformations with a conditions report), ``integrate`` (one leaf
to CSV + JSON sidecar), ``foliate`` (full region report), and ``lift``
(branched-cover linking arithmetic).  Delimited outputs get a rendered PNG
next to them unless ``--no-figures`` is passed.  Diagnostics go to stderr as
JSON lines; exit code 0 means success, 1 a failed validation, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import cylinders, foliation, orbits, plots, surgery
from .cylinders import IntegrateOptions
from .profile import ContactError, Profile, ProfileError, dumps_profile

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2

_QUIET = False

_TOL_KEYS = {f.name for f in fields(IntegrateOptions)} | {"density"}


def _diag(level: str, event: str, **detail):
    if _QUIET and level != "error":
        return
    print(json.dumps({"level": level, "event": event, **detail}),
          file=sys.stderr)


def _fmt(x):
    if isinstance(x, float):
        return float(format(x, ".17g"))
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _emit_json(payload, out_path: str | None):
    text = json.dumps(_fmt(payload), indent=2, sort_keys=True) + "\n"
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


def _load_profile(path: str) -> Profile:
    prof = Profile.load(path)
    return prof


def _parse_tols(pairs) -> IntegrateOptions:
    opts = IntegrateOptions()
    overrides = {}
    for item in pairs or []:
        if "=" not in item:
            raise ValueError(f"--tol expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        if key not in _TOL_KEYS:
            raise ValueError(
                f"unknown tolerance key {key!r}; known: {sorted(_TOL_KEYS)}"
            )
        if key == "density":
            continue  # handled by the foliate command itself
        value = float(val)
        if value <= 0:
            raise ValueError(f"tolerance {key} must be positive")
        overrides[key] = value if key != "max_samples" else int(value)
    return replace(opts, **overrides)


def _write_trajectory_csv(profile: Profile, path: str, n: int = 1000):
    rho = np.linspace(profile.rho_min, profile.rho_max, n)
    rows = zip(rho, profile.f(rho), profile.g(rho), profile.wronskian(rho))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "f", "g", "D"])
        for row in rows:
            w.writerow([format(v, ".17g") for v in row])


def _figure_path(path: str) -> str:
    return str(Path(path).with_suffix(".png"))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_validate(ns) -> int:
    prof = _load_profile(ns.profile)
    report = prof.validate_contact()
    payload = {"profile": ns.profile, **report.to_dict()}
    _emit_json(payload, ns.out)
    if ns.trajectory:
        _write_trajectory_csv(prof, ns.trajectory)
        _diag("info", "trajectory_written", path=ns.trajectory)
        if not ns.no_figures:
            plots.save_trajectory_figure(prof, _figure_path(ns.trajectory))
            _diag("info", "figure_written", path=_figure_path(ns.trajectory))
    if not report.valid:
        _diag("error", "contact_invalid",
              violations=[v.condition for v in report.violations])
        return EXIT_INVALID
    return EXIT_OK


def _cmd_orbits(ns) -> int:
    prof = _load_profile(ns.profile)
    interval = None
    if ns.interval:
        a, b = (float(x) for x in ns.interval.split(","))
        interval = (a, b)
    tori = orbits.scan_tori(prof, ns.p, ns.q, interval=interval)
    payload = {"pq": [ns.p, ns.q], "tori": [t.to_dict() for t in tori]}
    _emit_json(payload, ns.out if (ns.json or ns.out) else None)
    return EXIT_OK


def _cmd_twist(ns) -> int:
    prof = _load_profile(ns.profile)
    out = surgery.lutz_twist(prof, ns.kind, ns.delta)
    Path(ns.out).write_text(dumps_profile(out))
    rho0, rho1 = surgery.lutz_radii(out, ns.delta)
    report = {
        "kind": ns.kind,
        "delta": ns.delta,
        "contact_valid": out.validate_contact().valid,
        "rho0": rho0,
        "rho1": rho1,
        "winding": surgery.trajectory_winding(out, 0.0, ns.delta),
        "f_at_axis": out.f(0.0),
    }
    _emit_json(report, ns.report)
    if not ns.no_figures:
        plots.save_trajectory_figure(out, _figure_path(ns.out))
        _diag("info", "figure_written", path=_figure_path(ns.out))
    return EXIT_OK


def _cmd_surgery(ns) -> int:
    prof = _load_profile(ns.profile)
    n, q, m, p = (int(x) for x in ns.matrix.split(","))
    plan = surgery.SurgeryPlan(
        base=prof, matrix=surgery.SurgeryMatrix(n, q, m, p),
        delta=ns.delta, epsilon=ns.epsilon, twist=ns.twist, gap=ns.gap,
    )
    out, conditions = surgery.run_plan(plan)
    Path(ns.out).write_text(dumps_profile(out))
    _emit_json({"matrix": [n, q, m, p], **conditions.to_dict()}, ns.report)
    if not ns.no_figures:
        plots.save_trajectory_figure(out, _figure_path(ns.out))
        _diag("info", "figure_written", path=_figure_path(ns.out))
    if not conditions.contact_valid:
        return EXIT_INVALID
    return EXIT_OK


def _cmd_integrate(ns) -> int:
    prof = _load_profile(ns.profile)
    opts = _parse_tols(ns.tol)
    p, q = cylinders.sign_convention(
        prof, _bracket_for(prof, ns.p, ns.q, ns.rho0), ns.p, ns.q
    )
    leaf = cylinders.integrate_cylinder(
        prof, p, q, rho_start=ns.rho0, theta0=ns.theta0, phi0=ns.phi0,
        a_start=ns.a0, opts=opts,
    )
    residual = cylinders.cr_residual(leaf, prof)
    with open(ns.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "a", "rho"])
        for i in range(0, len(leaf.s), max(1, ns.stride)):
            w.writerow([format(v, ".17g")
                        for v in (leaf.s[i], leaf.a[i], leaf.rho[i])])
    sidecar = {
        **leaf.summary(),
        "cr_residual": residual,
        "signed_pq": [p, q],
    }
    _emit_json(sidecar, str(Path(ns.csv).with_suffix(".json")))
    if not ns.no_figures:
        plots.save_leaf_figure(leaf, _figure_path(ns.csv))
        _diag("info", "figure_written", path=_figure_path(ns.csv))
    return EXIT_OK


def _bracket_for(prof, p, q, rho0):
    p, q = orbits.normalize_pq(p, q)
    floor = prof.axis_floor if prof.rho_min == 0.0 else prof.rho_min
    roots = [r for r in orbits.combination_roots(prof, p, q, floor, prof.rho_max)
             if r > 2 * floor]
    lo = max([r for r in roots if r < rho0 - 1e-12], default=floor * 10)
    hi = min([r for r in roots if r > rho0 + 1e-12], default=prof.rho_max)
    return (lo, hi)


def _cmd_foliate(ns) -> int:
    prof = _load_profile(ns.profile)
    opts = _parse_tols(ns.tol)
    report = foliation.build_foliation(
        prof, ns.p, ns.q, density=ns.density, opts=opts, seed=ns.seed,
    )
    _emit_json(report.to_dict(), ns.out)
    if ns.csv_dir:
        outdir = Path(ns.csv_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for i, leaf in enumerate(report.leaves):
            path = outdir / f"leaf_{i:03d}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["s", "a", "rho"])
                step = max(1, len(leaf.s) // 4000)
                for j in range(0, len(leaf.s), step):
                    w.writerow([format(v, ".17g")
                                for v in (leaf.s[j], leaf.a[j], leaf.rho[j])])
        _diag("info", "leaf_csv_written", count=len(report.leaves),
              dir=str(outdir))
    if not ns.no_figures and ns.out not in (None, "-"):
        plots.save_foliation_figure(report, _figure_path(ns.out))
        _diag("info", "figure_written", path=_figure_path(ns.out))
    _diag("info", "stability", verdict=report.stability,
          reasons=report.reasons)
    return EXIT_OK


def _cmd_lift(ns) -> int:
    lks = [int(x) for x in ns.linking.split(",")]
    arith = surgery.cover_lift(lks)
    _emit_json(arith.to_dict(), ns.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="reebfol",
        description="Rotationally symmetric contact profiles: Reeb orbits, "
                    "twists, surgeries and certified foliation leaves.",
    )
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", action="append", metavar="KEY=VAL",
                    help="override a numeric tolerance (repeatable)")
    ap.add_argument("--quiet", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="contact certificate for a profile")
    v.add_argument("--profile", required=True)
    v.add_argument("--out", default="-")
    v.add_argument("--trajectory", metavar="CSV",
                   help="also export rho,f,g,D samples")
    v.add_argument("--no-figures", action="store_true")
    v.set_defaults(func=_cmd_validate)

    o = sub.add_parser("orbits", help="scan orbit tori of a slope class")
    o.add_argument("--profile", required=True)
    o.add_argument("--p", type=int, required=True)
    o.add_argument("--q", type=int, required=True)
    o.add_argument("--interval", metavar="a,b")
    o.add_argument("--json", action="store_true",
                   help="emit the torus list as JSON (default to stdout)")
    o.add_argument("--out", default=None)
    o.set_defaults(func=_cmd_orbits)

    t = sub.add_parser("twist", help="half or full Lutz twist")
    t.add_argument("--profile", required=True)
    t.add_argument("--kind", choices=["half", "full"], required=True)
    t.add_argument("--delta", type=float, required=True)
    t.add_argument("--out", required=True, help="output profile JSON")
    t.add_argument("--report", default="-")
    t.add_argument("--no-figures", action="store_true")
    t.set_defaults(func=_cmd_twist)

    s = sub.add_parser("surgery", help="twist surgery through an SL(2,Z) matrix")
    s.add_argument("--profile", required=True)
    s.add_argument("--matrix", required=True, metavar="n,q,m,p")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--twist", choices=["half", "full", "none"], default="half")
    s.add_argument("--gap", type=float, default=1e-2)
    s.add_argument("--out", required=True, help="output profile JSON")
    s.add_argument("--report", default="-")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=_cmd_surgery)

    i = sub.add_parser("integrate", help="integrate one foliation leaf")
    i.add_argument("--profile", required=True)
    i.add_argument("--p", type=int, required=True)
    i.add_argument("--q", type=int, required=True)
    i.add_argument("--rho0", type=float, required=True)
    i.add_argument("--theta0", type=float, default=0.0)
    i.add_argument("--phi0", type=float, default=0.0)
    i.add_argument("--a0", type=float, default=0.0)
    i.add_argument("--csv", required=True)
    i.add_argument("--stride", type=int, default=1,
                   help="thin the CSV by this factor")
    i.add_argument("--no-figures", action="store_true")
    i.set_defaults(func=_cmd_integrate)

    f = sub.add_parser("foliate", help="decompose, populate and certify")
    f.add_argument("--profile", required=True)
    f.add_argument("--p", type=int, required=True)
    f.add_argument("--q", type=int, required=True)
    f.add_argument("--density", type=int, default=8)
    f.add_argument("--out", required=True, help="report JSON path")
    f.add_argument("--csv-dir", default=None)
    f.add_argument("--no-figures", action="store_true")
    f.set_defaults(func=_cmd_foliate)

    l = sub.add_parser("lift", help="branched-cover linking arithmetic")
    l.add_argument("--linking", required=True, metavar="l1,l2,...")
    l.add_argument("--out", default="-")
    l.set_defaults(func=_cmd_lift)

    return ap


def main(argv=None) -> int:
    global _QUIET
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    _QUIET = ns.quiet
    try:
        code = ns.func(ns)
    except (ContactError, surgery.ConstructionError,
            surgery.NormalizationError, cylinders.SignConventionError,
            cylinders.NotMorseBottError, orbits.ContinuumError,
            orbits.NonClosingError) as exc:
        _diag("error", "validation_error", detail=str(exc))
        return EXIT_INVALID
    except (ProfileError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        _diag("error", "input_error", detail=str(exc))
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
