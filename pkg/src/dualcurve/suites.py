"""Named verification suites driving the inequality lab.

Each suite returns a :class:`SuiteResult`; ``passed`` is False iff some
trial violated its claim (or a fixed check failed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import inequalities as lab
from .geometry.ops import segment
from .quadrature import RngSeed

SUITE_NAMES = (
    "karamata",
    "scalar-lemma",
    "alesker",
    "moment-bm",
    "corollary",
    "small-p",
    "anderson",
    "prism",
    "parallelotope",
    "planar",
    "subspace",
    "cylinder",
    "bm",
)

DEFAULT_TRIALS = {
    "karamata": 10_000,
    "scalar-lemma": 100_000,
    "alesker": 20,
    "moment-bm": 10_000,
    "corollary": 2_000,
    "anderson": 2_000,
    "prism": 1_000,
    "parallelotope": 10_000,
    "planar": 10_000,
    "subspace": 10_000,
    "bm": 100,
}

CYLINDER_CASES = ((4.0, 3, 1), (4.0, 3, 2), (5.5, 4, 2))


@dataclass
class SuiteResult:
    name: str
    passed: bool
    summary: dict
    violations: list = field(default_factory=list)
    records: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "summary": self.summary, "violations": self.violations}


def _from_fuzz(name, s: lab.FuzzSummary, checks=None) -> SuiteResult:
    checks = checks or {}
    ok = s.passed and all(checks.values())
    summary = s.to_dict()
    summary.pop("violations")
    summary["checks"] = checks
    return SuiteResult(name, ok, summary, s.violations, s.records)


def _cfg(name, trials, seed, keep, **kw):
    return lab.FuzzConfig(trials=trials or DEFAULT_TRIALS[name], seed=seed, keep_records=keep, **kw)


def _scalar(trials, seed, keep):
    s = lab.scalar_fuzz(_cfg("scalar-lemma", trials, seed, keep))
    bad_cases = []
    for kind, z, zb, lam, p in lab.scalar_equality_cases(1000, seed):
        rep = lab.scalar_combination_check(z, zb, lam, p)
        scale = max(abs(rep.lhs), abs(rep.rhs), 1e-300)
        if rep.equality_case == "none" or abs(rep.margin) > 1e-10 * scale:
            bad_cases.append({"kind": kind, "z": z, "zb": zb, "lam": lam, "p": p, "margin": rep.margin})
    checked, grid_viol, mis = lab.scalar_rational_grid(10_000)
    checks = {"equality_cases": not bad_cases, "rational_grid": not grid_viol and not mis}
    res = _from_fuzz("scalar-lemma", s, checks)
    res.summary["rational_grid_points"] = checked
    res.violations += bad_cases + [{"grid": [str(v) for v in t]} for t in grid_viol + mis]
    return res


def _alesker(trials, seed, keep):
    count = trials or DEFAULT_TRIALS["alesker"]
    rng = RngSeed(seed, 99).generator()
    rows, records = [], []
    r2 = lab.alesker_constancy_check(2, 2.0, rng.standard_normal((count, 2)), seed=RngSeed(seed, 1))
    inv_ok = abs(r2.inverse_constant - math.pi) / math.pi <= 0.005
    rows.append(dict(r2.to_dict(), ok=inv_ok, check="1/c within 0.5% of pi"))
    for i, (n, p) in enumerate(((3, 1.5), (4, 2.5))):
        r = lab.alesker_constancy_check(n, p, rng.standard_normal((count, n)), seed=RngSeed(seed, 2 + i))
        rows.append(dict(r.to_dict(), ok=r.spread < 0.005, check="spread below 0.5%"))
    for row in rows:
        row.pop("ratios")
    ok = all(r["ok"] for r in rows)
    return SuiteResult("alesker", ok, {"cases": rows}, [r for r in rows if not r["ok"]], rows if keep else [])


def _moment(trials, seed, keep):
    s = lab.moment_bm_fuzz(_cfg("moment-bm", trials, seed, keep))
    ex = lab.moment_bm_check(segment([1, 0, 0], [2, 0, 0]), segment([-2, 0, 0], [-1, 0, 0]), 2 / 3, 1)
    ok = abs(ex.lhs - 1) <= 1e-12 and abs(ex.rhs - 1) <= 1e-12 and ex.equality_case == "p1-separated"
    return _from_fuzz("moment-bm", s, {"segment_equality_example": ok})


def _small_p(trials, seed, keep):
    ex = lab.small_p_counterexample(0.01, 0.5)
    scan = lab.small_p_scan()
    guard = [lab.small_p_counterexample(e, 1.0, numeric=False) for e in (0.01, 0.1, 1.0, 10.0)]
    checks = {
        "ratio_eps0.01_p0.5": abs(ex.details["ratio"] - 1.00405) <= 1e-5,
        "scan_finds_eps_for_every_p": all(v is not None for v in scan.values()),
        "no_counterexample_at_p1": all(g.rhs / g.lhs <= 1 + 1e-12 for g in guard),
    }
    summary = {
        "example": ex.to_dict(),
        "scan": {str(k): v for k, v in scan.items()},
        "crossover_p0.5": lab.small_p_crossover(0.5),
        "large_eps_ratio_p0.5": {str(e): lab.small_p_sides(e, 0.5)[1] / lab.small_p_sides(e, 0.5)[0] for e in (1.0, 10.0, 1e3)},
        "checks": checks,
    }
    records = [{"p": k, "eps": v} for k, v in scan.items()] if keep else []
    return SuiteResult("small-p", all(checks.values()), summary, [k for k, v in checks.items() if not v], records)


def _cylinder(trials, seed, keep):
    rows = []
    for q, n, k in CYLINDER_CASES:
        rows.append(lab.cylinder_asymptotics_check(q, n, k).to_dict())
    ok = all(r["below_limit"] and r["final_gap"] <= r["tolerance"] for r in rows)
    summary = {"cases": [{k: v for k, v in r.items() if k != "rows"} for r in rows]}
    records = [dict(q=r["q"], n=r["n"], k=r["k"], l=row[0], ratio=row[3], limit=row[4]) for r in rows for row in r["rows"]]
    return SuiteResult("cylinder", ok, summary, [c for c in summary["cases"] if not c["passed"]], records if keep else [])


def run_suite(name: str, trials: int | None = None, seed: int = 0, keep_records: bool = False) -> SuiteResult:
    """Run one named suite; ``trials`` of None means the suite default."""
    if name not in SUITE_NAMES:
        raise ValueError(f"unknown suite {name!r}")
    if trials is not None and trials < 1:
        raise ValueError("trials must be >= 1")
    if name == "scalar-lemma":
        return _scalar(trials, seed, keep_records)
    if name == "alesker":
        return _alesker(trials, seed, keep_records)
    if name == "moment-bm":
        return _moment(trials, seed, keep_records)
    if name == "small-p":
        return _small_p(trials, seed, keep_records)
    if name == "cylinder":
        return _cylinder(trials, seed, keep_records)
    fuzzers = {
        "karamata": (lab.karamata_fuzz, {}),
        "corollary": (lab.corollary_fuzz, {}),
        "anderson": (lab.anderson_fuzz, {}),
        "prism": (lab.prism_fuzz, {"dims": (2, 3)}),
        "parallelotope": (lab.parallelotope_fuzz, {"dims": (3,), "q_range": (3.0, 7.0)}),
        "planar": (lab.planar_bound_fuzz, {"dims": (2,), "vertex_range": (2, 8), "q_range": (2.0, 6.0)}),
        "subspace": (lab.subspace_bound_fuzz, {}),
        "bm": (lab.bm_fuzz, {"dims": (2, 3)}),
    }
    fn, kw = fuzzers[name]
    return _from_fuzz(name, fn(_cfg(name, trials, seed, keep_records, **kw)))


def jsonable(x):
    """Recursively convert numpy scalars/arrays and tuples into JSON types."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x
