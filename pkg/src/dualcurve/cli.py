"""Command-line driver: ``dualcurve {measure, ratio, verify, sweep}``.

Exit codes: 0 success, 1 verification violations, 2 usage/parse errors,
3 engine mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time

import numpy as np

from .bodyspec import BodySpecError, dump_body, load_body, load_json, parse_subspace
from .geometry.bodies import VPolytope
from .geometry.selection import FacetSubset, FullSphere, Subspace, SubspaceCap
from .measures import (
    EngineMismatch,
    cylinder_dcm_subspace,
    cylinder_dcm_total,
    cylinder_ratio_limit,
    dual_curvature,
    moment_integral,
    subspace_concentration_ratio,
)
from .quadrature import DEFAULT_DEGREE, DEFAULT_SAMPLES
from .suites import SUITE_NAMES, jsonable, run_suite

SCHEMA = "dualcurve.run/1"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_ENGINE = 0, 1, 2, 3
ENGINE_CHOICES = ("auto", "facet", "body-mc", "sphere-mc", "closed", "facet-exact", "closed-form")
CSV_COLUMNS = ("parameter", "subspace_measure", "total_measure", "ratio", "bound", "margin")


class UsageError(Exception):
    pass


# ------------------------------------------------------------- output


def fmt_float(x: float) -> str:
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    conv = jsonable(obj)
    return dumps(str(obj)) if conv is obj else dumps(conv, indent, _level)


def _compact(obj) -> str:
    return dumps(obj, indent=0).replace("\n", "")


def run_report(args, config: dict, results: list, t0: float) -> dict:
    return {
        "schema": SCHEMA,
        "command": args.argv,
        "config": config,
        "results": jsonable(results),
        "wall_time": time.perf_counter() - t0,
    }


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------- parsing


def _default_seed() -> int:
    raw = os.environ.get("DUALCURVE_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DUALCURVE_SEED must be an integer, got {raw!r}")


def _int_list(text: str, what: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}")
    if not vals:
        raise UsageError(f"{what}: empty list")
    return vals


def _selection(tokens, K):
    if not tokens or tokens == ["all"]:
        return FullSphere()
    kind, rest = tokens[0], tokens[1:]
    if kind == "facets" and len(rest) == 1:
        return FacetSubset(tuple(_int_list(rest[0], "--eta facets")))
    if kind == "subspace" and len(rest) == 1:
        return SubspaceCap(parse_subspace(load_json(rest[0]), K.dim, rest[0]))
    raise UsageError("--eta expects 'all', 'facets i,j,...' or 'subspace FILE'")


def _subspace_arg(args, K) -> Subspace:
    if args.subspace and args.axes:
        raise UsageError("give either --subspace or --axes, not both")
    if args.subspace:
        return parse_subspace(load_json(args.subspace), K.dim, args.subspace)
    if args.axes:
        idx = _int_list(args.axes, "--axes")
        if any(not 1 <= i <= K.dim for i in idx):
            raise UsageError(f"--axes entries must lie in 1..{K.dim}")
        return Subspace.axes(K.dim, [i - 1 for i in idx])
    raise UsageError("one of --subspace or --axes is required")


_GRID = re.compile(r"^\s*(geomspace|linspace)\s*\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)\s*$")


def parse_grid(text: str) -> np.ndarray:
    """``geomspace(a,b,m)``, ``linspace(a,b,m)`` or a comma-separated list."""
    m = _GRID.match(text)
    try:
        if m:
            a, b, k = float(m.group(2)), float(m.group(3)), int(m.group(4))
            if k < 1:
                raise ValueError
            if m.group(1) == "geomspace" and not (a > 0 and b > 0):
                raise ValueError
            grid = (np.geomspace if m.group(1) == "geomspace" else np.linspace)(a, b, k)
        else:
            grid = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise UsageError(f"bad grid {text!r}")
    if len(grid) == 0 or not np.all(np.isfinite(grid)):
        raise UsageError(f"bad grid {text!r}")
    return grid


# ------------------------------------------------------------- commands


def cmd_measure(args) -> int:
    t0 = time.perf_counter()
    K = load_body(args.body)
    eta = _selection(args.eta, K)
    if args.q == 0 and args.engine != "sphere-mc":
        raise UsageError("q = 0 needs --engine sphere-mc")
    est = dual_curvature(K, eta, args.q, args.engine, samples=args.samples, seed=args.seed, degree=args.degree)
    config = {
        "body": dump_body(K),
        "q": args.q,
        "eta": eta.describe(),
        "engine": est.engine,
        "seed": args.seed,
        "samples": args.samples,
        "degree": args.degree,
    }
    _emit(dumps(run_report(args, config, [est.to_dict()], t0)) + "\n", args.out)
    return EXIT_OK


def cmd_ratio(args) -> int:
    t0 = time.perf_counter()
    K = load_body(args.body)
    L = _subspace_arg(args, K)
    rep = subspace_concentration_ratio(K, L, args.q, args.engine, samples=args.samples, seed=args.seed, degree=args.degree)
    config = {
        "body": dump_body(K),
        "q": args.q,
        "subspace_basis": L.basis.T.tolist(),
        "engine": rep.total_measure.engine if rep.total_measure else args.engine,
        "seed": args.seed,
        "samples": args.samples,
        "degree": args.degree,
    }
    _emit(dumps(run_report(args, config, [rep.to_dict()], t0)) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    names = SUITE_NAMES if args.suite == "all" else (args.suite,)
    keep = args.report is not None
    results, failed = [], []
    report_fh = open(args.report, "w", encoding="utf-8") if keep else None
    try:
        for name in names:
            res = run_suite(name, args.trials, args.seed, keep)
            results.append(res.to_dict())
            if report_fh:
                for rec in res.records:
                    report_fh.write(_compact(dict(jsonable(rec), suite=name)) + "\n")
            status = "PASS" if res.passed else "FAIL"
            print(f"{status} {name}", file=sys.stderr)
            if not res.passed:
                failed.append(name)
                for v in res.violations[:20]:
                    print(f"  violation {name}: {_compact(jsonable(v))}", file=sys.stderr)
    finally:
        if report_fh:
            report_fh.close()
    config = {"suite": args.suite, "trials": args.trials, "seed": args.seed}
    _emit(dumps(run_report(args, config, results, t0)) + "\n", args.out)
    return EXIT_VIOLATION if failed else EXIT_OK


def _cylinder_rows(args):
    for a in ("q", "n", "k"):
        if getattr(args, a) is None:
            raise UsageError(f"--family cylinder needs --{a}")
    grid = parse_grid(args.l_grid or "geomspace(1,1000,13)")
    if np.any(grid <= 0):
        raise UsageError("l grid must be positive")
    bound = cylinder_ratio_limit(args.q, args.n, args.k)
    for l in grid:
        a = cylinder_dcm_subspace(args.q, args.n, args.k, float(l)).value
        b = cylinder_dcm_total(args.q, args.n, args.k, float(l)).value
        yield float(l), a, b, a / b, bound, bound - a / b


def _tightness_rows(args):
    if args.p is None or args.lam is None:
        raise UsageError("--family tightness needs --p and --lam")
    if args.body:
        C = load_body(args.body)
    else:
        C = VPolytope(np.array([[-1.0], [1.0]]))
    u = np.zeros(C.dim)
    u[0] = 1.0
    if args.u:
        u = np.array([float(t) for t in args.u.split(",")])
        if len(u) != C.dim or not np.linalg.norm(u) > 0:
            raise UsageError("--u must be a nonzero vector of the body's dimension")
    grid = parse_grid(args.rho_grid or "geomspace(10,1000,3)")
    if np.any(grid <= 0):
        raise UsageError("rho grid must be positive")
    bound = abs(2 * args.lam - 1) ** args.p
    u = u / np.linalg.norm(u)
    for rho in grid:
        num = moment_integral(VPolytope(C.vertices + (1 - 2 * args.lam) * rho * u), args.p).value
        den = moment_integral(VPolytope(C.vertices + rho * u), args.p).value
        yield float(rho), num, den, num / den, bound, num / den - bound


def cmd_sweep(args) -> int:
    rows = list(_cylinder_rows(args) if args.family == "cylinder" else _tightness_rows(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([fmt_float(v) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualcurve", description="Dual curvature measures and the inequalities around them.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--engine", choices=ENGINE_CHOICES, default="auto")
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        p.add_argument("--seed", type=int, default=None, help="default: $DUALCURVE_SEED or 0")
        p.add_argument("--degree", type=int, default=DEFAULT_DEGREE, help="simplex rule degree (facet engine)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    m = sub.add_parser("measure", help="dual curvature measure of a body")
    m.add_argument("body", help="BodySpec JSON file")
    m.add_argument("--q", type=float, required=True)
    m.add_argument("--eta", nargs="+", default=["all"], metavar="SEL", help="all | facets i,j,... | subspace FILE")
    common(m)
    m.set_defaults(func=cmd_measure)

    r = sub.add_parser("ratio", help="subspace concentration ratio and its bound")
    r.add_argument("body")
    r.add_argument("--q", type=float, required=True)
    r.add_argument("--subspace", help="JSON file with spanning rows under 'basis'")
    r.add_argument("--axes", help="1-based coordinate axes, e.g. 1,2")
    common(r)
    r.set_defaults(func=cmd_ratio)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=SUITE_NAMES + ("all",), required=True)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--report", help="write per-trial JSONL here")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="parameter sweeps as CSV")
    s.add_argument("--family", choices=("cylinder", "tightness"), required=True)
    s.add_argument("--q", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--l-grid", dest="l_grid")
    s.add_argument("--p", type=float)
    s.add_argument("--lam", type=float)
    s.add_argument("--rho-grid", dest="rho_grid")
    s.add_argument("--body", help="symmetric BodySpec for the tightness family (default [-1, 1])")
    s.add_argument("--u", help="comma-separated translation direction")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    args.argv = argv
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "trials", None) is not None and args.trials < 1:
            raise UsageError("--trials must be >= 1")
        return args.func(args)
    except EngineMismatch as exc:
        print(f"engine mismatch: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except (UsageError, BodySpecError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
