"""The thirteen acceptance criteria, each at its stated tolerance.

Run under pytest for a summary block, or directly as a script for one
PASS/FAIL line per criterion.
"""
import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from dualcurve import inequalities as lab
from dualcurve.geometry import Ball, build_facets, cross_polytope, cube, random_symmetric_polytope
from dualcurve.measures import cylinder_ratio_limit, dual_curvature, facet_values
from dualcurve.quadrature import RngSeed, omega
from dualcurve.suites import CYLINDER_CASES, run_suite

pytestmark = pytest.mark.slow


def _fuzz_line(s):
    return f"{s.trials} trials, {len(s.violations)} violations, worst margin {s.worst_margin:.3e}"


def test_c01_ball_identity(record_criterion):
    exact_bad, mc_bad, cases = [], [], 0
    for n in (2, 3, 4):
        for q in (0.5, 1.0, 2.5, n, n + 1, n + 2.5):
            for r in (0.5, 1.0, 2.0):
                want = omega(n) * r**q
                cf = dual_curvature(Ball(n, r), q=q, engine="closed-form").value
                if abs(cf - want) > 1e-12 * want:
                    exact_bad.append((n, q, r))
                mc = dual_curvature(Ball(n, r), q=q, engine="body-mc", seed=RngSeed(101, cases))
                if abs(mc.value - want) > 3 * mc.abs_error:
                    mc_bad.append((n, q, r, (mc.value - want) / mc.abs_error))
                cases += 1
    ok = not exact_bad and not mc_bad
    record_criterion(1, ok, f"{cases} cases; closed-form misses {len(exact_bad)}, body-MC beyond 3 sigma {mc_bad}")
    assert ok


def test_c02_cone_volume_consistency(record_criterion):
    rng = np.random.default_rng(202)
    bodies = [cube(3), cross_polytope(3)] + [random_symmetric_polytope(rng, 3, int(rng.integers(4, 9))) for _ in range(20)]
    worst, mc_bad = 0.0, []
    for i, K in enumerate(bodies):
        F = build_facets(K)
        total = float(facet_values(F, 3.0)[0].sum())
        vol = ConvexHull(F.vertices).volume
        worst = max(worst, abs(total - vol) / vol)
        mc = dual_curvature(K, q=3.0, engine="body-mc", seed=RngSeed(202, i))
        if abs(mc.value - total) > 3 * mc.abs_error:
            mc_bad.append(i)
    ok = worst <= 1e-9 and not mc_bad
    record_criterion(2, ok, f"22 bodies; worst rel. gap to qhull volume {worst:.1e}; body-MC misses {mc_bad}")
    assert ok


def test_c03_cylinder_asymptotics(record_criterion):
    res = run_suite("cylinder")
    parts = []
    for (q, n, k), case in zip(CYLINDER_CASES, res.summary["cases"]):
        parts.append(f"({q:g},{n},{k}) gap {case['final_gap']:.1e} to {cylinder_ratio_limit(q, n, k):.4f}")
    record_criterion(3, res.passed, "; ".join(parts))
    assert res.passed


def test_c04_subspace_bound_fuzz(record_criterion):
    s = lab.subspace_bound_fuzz(lab.FuzzConfig(trials=10_000, dims=(3, 4)), small_q=False)
    kinds = s.extra["kinds"]
    ok = s.passed and s.trials == 10_000 and set(kinds) == {"q>=n+1"}
    record_criterion(4, ok, _fuzz_line(s))
    assert ok


def test_c05_planar_fuzz(record_criterion):
    res = run_suite("planar", 10_000)
    s = res.summary
    ok = res.passed and s["trials"] == 10_000
    record_criterion(5, ok, f"{s['trials']} trials, {len(res.violations)} violations, worst margin {s['worst_margin']:.3e}")
    assert ok


def test_c06_parallelotope_fuzz(record_criterion):
    res = run_suite("parallelotope", 10_000)
    s = res.summary
    band = s["extra"]["kinds"].get("parallelotope", 0)
    ok = res.passed and s["trials"] == 10_000 and band > 0
    record_criterion(6, ok, f"{s['trials']} trials ({band} with q in (3,4)), {len(res.violations)} violations, worst margin {s['worst_margin']:.3e}")
    assert ok


def test_c07_scalar_lemma(record_criterion):
    res = run_suite("scalar-lemma", 100_000)
    s = res.summary
    ok = res.passed and s["trials"] == 100_000 and all(s["checks"].values())
    record_criterion(7, ok, f"{s['trials']} trials, {len(res.violations)} violations; checks {s['checks']}")
    assert ok


def test_c08_moment_bm(record_criterion):
    res = run_suite("moment-bm", 10_000)
    s = res.summary
    ok = res.passed and s["trials"] == 10_000 and s["checks"]["segment_equality_example"]
    record_criterion(8, ok, f"{s['trials']} trials, {len(res.violations)} violations, worst margin {s['worst_margin']:.3e}; segment example {s['checks']}")
    assert ok


def test_c09_small_p(record_criterion):
    res = run_suite("small-p")
    ratio = res.summary["example"]["details"]["ratio"]
    ok = res.passed and abs(ratio - 1.00405) <= 1e-5
    record_criterion(9, ok, f"rhs/lhs {ratio:.7f} at eps=0.01, p=0.5; scan {res.summary['scan']}")
    assert ok


def test_c10_alesker(record_criterion):
    res = run_suite("alesker")
    rows = res.summary["cases"]
    desc = "; ".join(f"n={r['n']} p={r['p']}: 1/c {r['inverse_constant']:.5f} spread {r['spread']:.1e}" for r in rows)
    record_criterion(10, res.passed, desc)
    assert res.passed


def test_c11_engine_triangle(record_criterion):
    rng = np.random.default_rng(1111)
    total = agree = 0
    for i in range(50):
        P = random_symmetric_polytope(rng, 3, int(rng.integers(4, 7)))
        for j, q in enumerate((2.0, 3.0, 4.5)):
            _, z = lab.engine_triangle(P, q, seed=RngSeed(1111, 3 * i + j))
            total += len(z)
            agree += sum(v <= 3 for v in z.values())
    frac = agree / total
    ok = frac >= 0.99
    record_criterion(11, ok, f"{agree}/{total} pairwise comparisons within 3 combined errors ({100 * frac:.1f}%)")
    assert ok


def test_c12_homogeneity(record_criterion):
    rng = np.random.default_rng(1212)
    worst = 0.0
    n = 3
    for _ in range(10):
        P = random_symmetric_polytope(rng, n, int(rng.integers(4, 7)))
        for q in (1.0, float(n), n + 2.0):
            base = dual_curvature(P, q=q, engine="facet-exact").value
            for lam in (0.5, 2.0):
                v = dual_curvature(P.scaled(lam), q=q, engine="facet-exact").value
                worst = max(worst, abs(v / base - lam**q) / lam**q)
    ok = worst <= 1e-9
    record_criterion(12, ok, f"worst relative deviation from lambda^q {worst:.1e}")
    assert ok


def test_c13_prism(record_criterion):
    res = run_suite("prism", 1000)
    s = res.summary
    ok = res.passed and s["trials"] == 1000
    record_criterion(13, ok, f"{s['trials']} prisms, {len(res.violations)} violations, worst margin {s['worst_margin']:.3e}")
    assert ok


if __name__ == "__main__":
    import sys

    def record(number, ok, detail):
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
        return ok

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn(record)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
