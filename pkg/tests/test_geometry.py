import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from dualcurve.geometry import (
    Ball,
    BudgetError,
    Cylinder,
    DegenerateError,
    FacetSubset,
    Subspace,
    SymHPolytope,
    SymVPolytope,
    UnboundedError,
    VPolytope,
    build_facets,
    contains,
    cross_polytope,
    cube,
    enumerate_vertices,
    minkowski_combination,
    parallelotope,
    prism,
    project,
    radial,
    random_symmetric_polytope,
    reflect,
    reverse_radial_gauss_contains,
    segment,
    support,
)
from dualcurve.geometry.hull import hull_facets, hull_vertices


def as_set(V, decimals=9):
    return {tuple(np.round(v, decimals) + 0.0) for v in np.atleast_2d(V)}


def test_support_examples():
    assert support(cube(3), [1, 2, 3]) == 6
    assert support(Ball(3), [0, 0, 2]) == 2
    assert support(cross_polytope(2), [3, 4]) == 4


def test_radial_examples():
    assert radial(cube(3), [1, 2, 3]) == pytest.approx(1 / 3, rel=1e-15)
    u = np.array([0.6, 0.8, 0.0])
    assert radial(Ball(3, 2.0), u) == pytest.approx(2.0, rel=1e-15)
    x = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    assert radial(Cylinder(3, 1, 5.0), x) == pytest.approx(math.sqrt(2), rel=1e-14)


def test_contains_examples():
    assert contains(cube(2), [0.5, -0.5])
    assert not contains(cube(2), [1.1, 0])
    # boundary midpoint of two vertices
    assert contains(cross_polytope(2), [0.5, 0.5])


def test_minkowski_combination_examples():
    A = segment([1, 0, 0], [2, 0, 0])
    B = segment([-2, 0, 0], [-1, 0, 0])
    M = minkowski_combination(A, B, 2 / 3)
    assert as_set(M.vertices) == {(-1.0, 0.0, 0.0), (0.0, 0.0, 0.0)}
    assert as_set(minkowski_combination(A, B, 0.0).vertices) == as_set(A.vertices)
    C = cube(3)
    assert as_set(minkowski_combination(C, C, 0.5).vertices) == as_set(C.vertices)


def test_reflect_examples():
    assert as_set(reflect(segment([1, 0], [2, 0])).vertices) == {(-1.0, 0.0), (-2.0, 0.0)}
    H = SymHPolytope(np.array([[0.8, 0.6], [0.0, 1.0]]), np.array([1.0, 2.0]))
    R = reflect(H)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 2))
    assert np.allclose([support(R, x) for x in X], [support(H, x) for x in X], rtol=1e-12)
    assert reflect(Ball(3, 2.0)) == Ball(3, 2.0)


def test_project_examples():
    sq = project(cube(3), Subspace.axes(3, [0, 1]))
    assert as_set(sq.vertices) == as_set(cube(2).vertices)
    assert project(Cylinder(3, 1, 7.0), Subspace.axes(3, [0])) == Ball(1, 7.0)
    seg = project(cross_polytope(3), Subspace.axes(3, [0]))
    assert as_set(seg.vertices) == {(-1.0,), (1.0,)}


def test_enumerate_vertices_examples():
    V = enumerate_vertices(SymHPolytope(np.eye(3), np.ones(3))).vertices
    assert as_set(V) == as_set(np.array(np.meshgrid(*[[-1, 1]] * 3)).reshape(3, -1).T)
    rot = SymHPolytope(np.array([[1, 1], [1, -1]]) / math.sqrt(2), np.full(2, 1 / math.sqrt(2)))
    assert as_set(enumerate_vertices(rot).vertices) == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}
    with pytest.raises(UnboundedError):
        enumerate_vertices(SymHPolytope(np.array([[1.0, 0.0]]), np.ones(1)))


def test_enumerate_vertices_random_sliced_cube():
    # cube cut by x+y+z <= 2 (and its mirror): chops two corners into triangles
    N = np.vstack([np.eye(3), np.ones(3) / math.sqrt(3)])
    b = np.array([1, 1, 1, 2 / math.sqrt(3)])
    V = enumerate_vertices(SymHPolytope(N, b)).vertices
    assert len(V) == 12


def test_build_facets_examples():
    F = build_facets(cube(3))
    assert len(F.facets) == 6
    assert np.allclose(F.offsets, 1.0)
    assert all(len(f.vertices) == 4 for f in F.facets)
    X = build_facets(cross_polytope(3))
    assert len(X.facets) == 8
    assert np.allclose(X.offsets, 1 / math.sqrt(3))
    Q = np.array([[1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0.0]])
    assert len(build_facets(prism(Q, [0, 0, 1])).facets) == 6


def test_reverse_radial_gauss_examples():
    F = build_facets(cube(3))
    i = next(j for j, f in enumerate(F.facets) if np.allclose(f.normal, [1, 0, 0]))
    eta = FacetSubset([i])
    assert reverse_radial_gauss_contains(F, eta, np.array([1.0, 0, 0]))
    assert not reverse_radial_gauss_contains(F, eta, np.array([0, 1.0, 0]))
    assert reverse_radial_gauss_contains(F, eta, np.array([1.0, 1.0, 0]) / math.sqrt(2))


def test_facet_areas_match_volume():
    A = np.array([[2.0, 0.3, 0.0], [0.1, 1.0, 0.4], [0.0, -0.2, 1.5]])
    F = build_facets(parallelotope(A))
    cones = sum(f.offset * f.area for f in F.facets) / 3
    assert cones == pytest.approx(8 * abs(np.linalg.det(A)), rel=1e-12)


@pytest.mark.parametrize("n,m", [(2, 5), (3, 6), (3, 12), (4, 7)])
def test_hull_against_qhull(n, m):
    rng = np.random.default_rng(10 * n + m)
    for _ in range(5):
        P = random_symmetric_polytope(rng, n, m)
        F = build_facets(P)
        ref = ConvexHull(P.vertices)
        assert F.volume() == pytest.approx(ref.volume, rel=1e-10)
        assert as_set(hull_vertices(P.vertices), 7) == as_set(P.vertices[ref.vertices], 7)


def test_large_point_sets_pruned_before_brute_force():
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((300, 3))
    V = hull_vertices(pts)
    ref = ConvexHull(pts)
    assert as_set(V, 7) == as_set(pts[ref.vertices], 7)


def test_hull_budget_and_degenerate():
    with pytest.raises(BudgetError):
        hull_facets(np.random.default_rng(0).standard_normal((100, 3)))
    with pytest.raises(DegenerateError):
        hull_facets(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]]))


vec3 = st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(x=vec3, lam=st.floats(0.1, 10), seed=st.integers(0, 2**16))
def test_homogeneity_and_symmetry(x, lam, seed):
    rng = np.random.default_rng(seed)
    for K in (random_symmetric_polytope(rng, 3, 5), Ball(3, 1.7)):
        L = K.scaled(lam)
        assert support(L, x) == pytest.approx(lam * support(K, x), rel=1e-12)
        assert radial(L, x) == pytest.approx(lam * radial(K, x), rel=1e-12)
        assert support(K, x) == pytest.approx(support(K, -np.array(x)), rel=1e-12)
        assert radial(K, x) == pytest.approx(radial(K, -np.array(x)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_radial_facet_duality(seed):
    rng = np.random.default_rng(seed)
    F = build_facets(random_symmetric_polytope(rng, 3, 6))
    u = rng.standard_normal(3)
    u /= np.linalg.norm(u)
    vals = radial(F, u) * (F.normals @ u) - F.offsets
    assert vals.max() == pytest.approx(0.0, abs=1e-10 * F.offsets.max())
    assert np.all(vals <= 1e-10 * F.offsets.max())


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_difference_body_symmetric(seed):
    rng = np.random.default_rng(seed)
    A = VPolytope(rng.standard_normal((5, 3)) + rng.standard_normal(3))
    M = minkowski_combination(A, reflect(A), 0.5)
    assert contains(M, np.zeros(3))
    assert as_set(M.vertices, 8) == as_set(-M.vertices, 8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_projection_support_identity(seed):
    rng = np.random.default_rng(seed)
    K = random_symmetric_polytope(rng, 3, 5)
    L = Subspace.span(rng.standard_normal((2, 3)))
    KL = project(K, L)
    y = rng.standard_normal(2)
    assert support(KL, y) == pytest.approx(support(K, L.basis @ y), rel=1e-10)


def test_subspace_validation():
    with pytest.raises(ValueError):
        Subspace(np.eye(3))
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0], [1.0], [0.0]]))
    L = Subspace.span([[1, 1, 0], [2, 2, 0.0]])
    assert L.dim == 1
    assert L.complement().dim == 2
    assert isinstance(SymVPolytope(np.eye(2)), SymVPolytope)
