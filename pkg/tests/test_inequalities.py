import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualcurve import inequalities as lab
from dualcurve.geometry import Subspace, VPolytope, cross_polytope, cube, segment
from dualcurve.measures import moment_integral, subspace_concentration_ratio


def seg3(a, b):
    return segment([a, 0, 0], [b, 0, 0])


# --- majorization -----------------------------------------------------------


def test_karamata_examples():
    r = lab.karamata_check([2, 0], [1, 1], "power", 2)
    assert (r.lhs, r.rhs) == (4.0, 2.0) and r.holds
    assert lab.karamata_check([1, 1], [1, 1]).equality_case == "numeric-equal"
    r = lab.karamata_check([3, 1, 0], [2, 1, 1], "power", 3)
    assert (r.lhs, r.rhs) == (28.0, 10.0)


def test_karamata_rejects_non_majorized():
    with pytest.raises(ValueError, match="majorization"):
        lab.karamata_check([1, 1], [2, 0])


def test_karamata_exp_and_table():
    r = lab.karamata_check([2, 0], [1, 1], "exp")
    assert r.lhs == pytest.approx(math.exp(2) + 1) and r.holds
    x = np.linspace(0, 3, 31)
    table = np.column_stack([x, x**2])
    assert lab.karamata_check([3, 1, 0], [2, 1, 1], table).holds


# --- scalar lemma -----------------------------------------------------------


def test_scalar_examples():
    r = lab.scalar_combination_check(1, -1, 0.3, 2)
    assert r.lhs == pytest.approx(0.32) and r.rhs == pytest.approx(0.32)
    assert r.equality_case == "antipodal"
    r = lab.scalar_combination_check(2, -1, Fraction(3, 4), 1)
    assert r.lhs == r.rhs == Fraction(3, 2)
    assert r.equality_case == "threshold"
    r = lab.scalar_combination_check(2, 1, 0.5, 2)
    assert (r.lhs, r.rhs) == (4.5, 0.0) and r.equality_case == "none"
    with pytest.raises(ValueError):
        lab.scalar_combination_check(1, 2, 0.3, 0.5)


def test_scalar_endpoint():
    assert lab.scalar_combination_check(2.0, 0.7, 1.0, 3.0).equality_case == "lambda-endpoint"


def test_threshold_knife_edge_included():
    # max(lam, 1 - lam) equals max|z| / (|z| + |zb|) exactly
    assert lab.classify_scalar_equality(Fraction(3), Fraction(-1), Fraction(3, 4), 1) == "threshold"
    assert lab.classify_scalar_equality(Fraction(3), Fraction(-1), Fraction(74, 100), 1) == "none"


@settings(max_examples=200, deadline=None)
@given(
    z=st.fractions(-5, 5, max_denominator=12),
    zb=st.fractions(-5, 5, max_denominator=12),
    lam=st.fractions(0, 1, max_denominator=12),
)
def test_scalar_p1_exact(z, zb, lam):
    r = lab.scalar_combination_check(z, zb, lam, 1)
    assert r.lhs >= r.rhs
    assert (r.lhs == r.rhs) == (r.equality_case != "none")


def test_scalar_equality_cases_classified():
    for kind, z, zb, lam, p in lab.scalar_equality_cases(200, seed=3):
        rep = lab.scalar_combination_check(z, zb, lam, p)
        assert rep.equality_case != "none", kind
        assert abs(rep.margin) <= 1e-10 * max(abs(rep.lhs), abs(rep.rhs), 1e-300)


def test_scalar_rational_grid_small():
    checked, viol, mis = lab.scalar_rational_grid(500)
    assert checked >= 500 and not viol and not mis


# --- sphere constant ----------------------------------------------------------


def test_alesker_examples():
    ray = np.outer([1.0, 2.5, 7.0], [0.6, 0.8])
    assert lab.alesker_constancy_check(2, 2.0, ray, N=10_000, seed=1).spread == 0.0
    xs = np.random.default_rng(0).standard_normal((6, 2))
    rep = lab.alesker_constancy_check(2, 2.0, xs, N=20_000, seed=1)
    assert rep.inverse_constant == pytest.approx(math.pi, rel=1e-12)
    assert rep.spread <= 1e-12
    # closed form of 1/c: integral of |theta_1|^p over the sphere
    assert lab.alesker_constant_exact(2, 2.0) == pytest.approx(math.pi, rel=1e-12)


def test_alesker_3d_spread():
    xs = np.random.default_rng(5).standard_normal((8, 3))
    rep = lab.alesker_constancy_check(3, 1.5, xs, N=200_000, seed=2)
    assert rep.spread < 0.005
    assert rep.inverse_constant == pytest.approx(lab.alesker_constant_exact(3, 1.5), rel=0.005)


# --- moment inequality --------------------------------------------------------


def test_moment_bm_examples():
    r = lab.moment_bm_check(seg3(1, 2), seg3(-2, -1), 2 / 3, 1)
    assert r.lhs == pytest.approx(1, abs=1e-12) and r.rhs == pytest.approx(1, abs=1e-12)
    assert r.equality_case == "p1-separated"
    r = lab.moment_bm_check(seg3(1, 2), seg3(-2, -1), 1.0, 1)
    assert r.equality_case == "lambda-endpoint" and r.lhs == pytest.approx(r.rhs)
    sq = VPolytope(np.array([[1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0.0]]))
    r = lab.moment_bm_check(sq, sq, 0.5, 2)
    assert r.rhs == 0.0 and r.lhs == pytest.approx(2 * moment_integral(sq, 2).value)


def test_moment_bm_unequal_volume_rejected():
    with pytest.raises(ValueError):
        lab.moment_bm_check(seg3(0, 1), seg3(0, 2), 0.5, 1)


def test_moment_bm_non_parallel_rejected():
    with pytest.raises(ValueError):
        lab.moment_bm_check(seg3(0, 1), segment([0, 0, 0], [0, 1, 0]), 0.5, 1)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), lam=st.floats(0, 1), p=st.floats(1, 4))
def test_parallel_segments_closed_form(a, b, lam, p):
    # 1D closed form of the integral of |t|^p over [lo, lo + 1]
    def M(lo):
        hi = lo + 1
        F = lambda t: math.copysign(abs(t) ** (p + 1), t) / (p + 1)  # noqa: E731
        return F(hi) - F(lo)

    r = lab.moment_bm_check(seg3(a, a + 1), seg3(b, b + 1), lam, p)
    ref_l = M((1 - lam) * a + lam * b) + M(lam * a + (1 - lam) * b)
    ref_r = abs(2 * lam - 1) ** p * (M(a) + M(b))
    assert r.lhs == pytest.approx(ref_l, rel=1e-12, abs=1e-12)
    assert r.rhs == pytest.approx(ref_r, rel=1e-12, abs=1e-12)
    assert r.holds


def test_reflection_corollary_examples():
    r = lab.reflection_corollary_check(cube(2), 0.5, 2)
    assert r.rhs == 0 and r.lhs > 0
    r = lab.reflection_corollary_check(segment([1], [2]), 0.0, 1)
    assert r.lhs == pytest.approx(1.5) and r.rhs == pytest.approx(1.5)
    r = lab.reflection_corollary_check(segment([1], [2]), 0.75, 1)
    assert r.lhs == pytest.approx(0.75) and r.rhs == pytest.approx(0.75)
    assert r.equality_case != "none"


def test_tightness_examples():
    C, u = segment([-1], [1]), np.array([1.0])
    assert lab.tightness_factor_probe(C, u, 10.0, 1.0, 1) == pytest.approx(1.0)
    half = [lab.tightness_factor_probe(C, u, rho, 0.5, 1) for rho in (10.0, 100.0, 1000.0)]
    assert half[0] > half[1] > half[2] and half[2] < 1e-3
    rows = lab.tightness_sweep(C, u, [10.0, 100.0, 1000.0], 0.75, 1)
    gaps = [abs(r[1] - 0.5) for r in rows]
    assert all(g2 <= g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 2e-3


# --- small p ------------------------------------------------------------------


def test_small_p_example():
    r = lab.small_p_counterexample(0.01, 0.5)
    ratio = (1.01**1.5 - 0.01**1.5) / 1.02**0.5
    assert r.details["ratio"] == pytest.approx(ratio, rel=1e-12)
    assert r.details["ratio"] == pytest.approx(1.00405, abs=1e-5)
    assert r.lhs == pytest.approx(1 / 1.5)
    assert not r.holds


def test_small_p_scan_and_guard():
    scan = lab.small_p_scan()
    assert set(np.round(list(scan), 2)) == {round(0.1 * i, 2) for i in range(1, 10)}
    assert all(v is not None and 0 < v <= 0.1 for v in scan.values())
    for eps in (0.01, 0.1, 1.0, 10.0):
        lhs, rhs = lab.small_p_sides(eps, 1.0)
        assert rhs <= lhs * (1 + 1e-12)


def test_small_p_no_crossover_at_large_eps():
    # (p+1)/2^p > 1 on (0,1): the ratio stays above one as eps grows
    p = 0.5
    for eps in (1.0, 10.0, 1e3, 1e6):
        lhs, rhs = lab.small_p_sides(eps, p)
        assert rhs / lhs > 1
    lhs, rhs = lab.small_p_sides(1e8, p)
    assert rhs / lhs == pytest.approx((p + 1) / 2**p, rel=1e-6)
    assert lab.small_p_crossover(p) is None


# --- translates ----------------------------------------------------------------


def test_anderson_examples():
    Q = segment([-1], [1])
    r = lab.anderson_translate_check(Q, [2.0], 0.0, 1)
    assert (r.lhs, r.rhs) == (pytest.approx(4.0), pytest.approx(1.0)) and r.holds
    r = lab.anderson_translate_check(Q, [2.0], 1.0, 1)
    assert r.lhs == pytest.approx(r.rhs) and r.equality_case != "none"
    r = lab.anderson_translate_check(Q, [0.0], 0.3, 1)
    assert r.lhs == pytest.approx(r.rhs) and r.equality_case != "none"


def test_anderson_rejects_unknown_f():
    with pytest.raises(ValueError):
        lab.anderson_translate_check(segment([-1], [1]), [1.0], 0.5, 1, f="sin")


# --- bounds -------------------------------------------------------------------


SQUARE_BASE = np.array([[1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0.0]])


def test_prism_examples():
    r = lab.prism_bound_check(SQUARE_BASE, [0, 0, 1], 4.0)
    # cube: the top pair carries a third of the total
    assert r.lhs == pytest.approx(4 * r.rhs / 3, rel=1e-10)
    assert r.margin > 0
    assert lab.prism_bound_check(SQUARE_BASE, [0.5, 0, 1], 4.0).margin > 0


def test_prism_rejects_v_in_base_plane():
    with pytest.raises(ValueError):
        lab.prism_bound_check(SQUARE_BASE, [1, 0, 0], 4.0)


def test_prism_margin_continuous_near_n():
    margins = [lab.prism_bound_check(SQUARE_BASE, [0.3, 0.2, 1], q).margin for q in (3.2, 3.05, 3.01, 3.001)]
    assert all(m > 0 for m in margins)
    assert abs(margins[-1] - margins[-2]) < abs(margins[0] - margins[1])


def test_parallelotope_examples():
    r = lab.parallelotope_bound_check(np.eye(3), Subspace.axes(3, [0]), 3.5)
    assert r.ratio == pytest.approx(1 / 3) and r.bound == pytest.approx(1.5 / 3.5)
    assert r.bound_kind == "parallelotope" and r.satisfied
    r = lab.parallelotope_bound_check(np.eye(3), Subspace.axes(3, [0, 1]), 5.0)
    assert r.ratio == pytest.approx(2 / 3) and r.bound == pytest.approx(0.8)
    with pytest.raises(ValueError):
        lab.parallelotope_bound_check(np.ones((3, 3)), Subspace.axes(3, [0]), 3.5)


def test_planar_examples():
    for q in (2.5, 3.0, 6.0):
        r = subspace_concentration_ratio(cube(2), Subspace.axes(2, [0]), q)
        assert r.ratio == pytest.approx(0.5) and r.ratio < (q - 1) / q
    thin = VPolytope(np.array([[1, 0.01], [1, -0.01], [-1, 0.01], [-1, -0.01]]))
    r = subspace_concentration_ratio(thin, Subspace.axes(2, [1]), 3.0)
    assert r.ratio < 2 / 3 and r.satisfied
    r = subspace_concentration_ratio(cube(2), Subspace.span([[1, 0.3]]), 3.0)
    assert r.ratio == 0.0


def test_subspace_examples():
    assert subspace_concentration_ratio(cross_polytope(3), Subspace.axes(3, [0]), 4.0).ratio == 0.0
    r = subspace_concentration_ratio(cube(3), Subspace.axes(3, [0, 1]), 4.0)
    assert r.ratio == pytest.approx(2 / 3) and r.bound == pytest.approx(0.75)


@pytest.mark.parametrize("q,n,k,lo", [(4, 3, 1, 0.49), (4, 3, 2, 0.74)])
def test_cylinder_asymptotics(q, n, k, lo):
    c = lab.cylinder_asymptotics_check(q, n, k)
    assert c.passed and c.below_limit and c.monotone
    last = c.rows[-1][3]
    assert lo <= last < (q - n + k) / q
    assert c.rows[0][3] < (q - n + k) / q


# --- Brunn-Minkowski ------------------------------------------------------------


def test_brunn_minkowski_examples():
    r = lab.brunn_minkowski_spot_check(cube(3), cube(3), 0.5, samples=20_000, seed=1)
    assert abs(r.margin) <= 3 * r.error + 1e-12
    r = lab.brunn_minkowski_spot_check(cube(3), cube(3, 2.0), 0.5, samples=20_000, seed=1)
    assert abs(r.margin) <= 3 * r.error + 1e-12
    r = lab.brunn_minkowski_spot_check(cube(3), cross_polytope(3), 0.5, samples=50_000, seed=1)
    assert r.margin > 3 * r.error


# --- fuzz plumbing ---------------------------------------------------------------


def test_fuzz_config_validation():
    with pytest.raises(ValueError):
        lab.FuzzConfig(trials=0)
    with pytest.raises(ValueError):
        lab.FuzzConfig(vertex_range=(6, 4))


@pytest.mark.parametrize(
    "fuzz,kw",
    [
        (lab.karamata_fuzz, {}),
        (lab.scalar_fuzz, {}),
        (lab.corollary_fuzz, {}),
        (lab.anderson_fuzz, {}),
        (lab.prism_fuzz, {"dims": (2, 3)}),
        (lab.parallelotope_fuzz, {"dims": (3,), "q_range": (3.0, 7.0)}),
        (lab.planar_bound_fuzz, {"dims": (2,), "vertex_range": (2, 8), "q_range": (2.0, 6.0)}),
        (lab.subspace_bound_fuzz, {}),
        (lab.moment_bm_fuzz, {}),
    ],
)
def test_small_fuzz_runs_clean_and_deterministic(fuzz, kw):
    cfg = lab.FuzzConfig(trials=60, seed=17, **kw)
    a, b = fuzz(cfg), fuzz(cfg)
    assert a.passed and a.violations == []
    assert a.to_dict() == b.to_dict()
    assert sum(a.histogram["counts"]) == a.trials
