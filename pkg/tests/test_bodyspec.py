import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualcurve.bodyspec import BodySpecError, dump_body, load_body, parse_body, parse_subspace
from dualcurve.geometry import Ball, Box, Cylinder, Parallelotope, Prism, SymHPolytope, SymVPolytope

finite = st.floats(0.1, 10, allow_nan=False, allow_infinity=False)


def roundtrip(K):
    spec = dump_body(K)
    return parse_body(json.loads(json.dumps(spec))), spec


@settings(max_examples=50, deadline=None)
@given(hw=st.lists(finite, min_size=1, max_size=4))
def test_box_roundtrip(hw):
    K, spec = roundtrip(Box(np.array(hw)))
    assert isinstance(K, Box) and np.array_equal(K.halfwidths, hw)
    assert dump_body(K) == spec


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**20), n=st.integers(2, 4))
def test_polytope_roundtrips(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 3 * np.eye(n)
    for K in (SymVPolytope(rng.standard_normal((n + 1, n))), Parallelotope(A)):
        R, spec = roundtrip(K)
        assert type(R) is type(K) and R == K
        assert dump_body(R) == spec
    U = rng.standard_normal((n + 1, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    H = SymHPolytope(U, rng.uniform(0.5, 2, n + 1))
    R, spec = roundtrip(H)
    assert np.array_equal(R.normals, H.normals) and np.array_equal(R.offsets, H.offsets)


@settings(max_examples=30, deadline=None)
@given(r=finite, l=finite)
def test_smooth_roundtrips(r, l):
    assert roundtrip(Ball(3, r))[0] == Ball(3, r)
    assert roundtrip(Cylinder(4, 2, l))[0] == Cylinder(4, 2, l)


def test_prism_roundtrip():
    P = Prism(np.array([[1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0.0]]), np.array([0.2, 0, 1]))
    R, spec = roundtrip(P)
    assert np.array_equal(R.base_vertices, P.base_vertices) and np.array_equal(R.apex, P.apex)


@pytest.mark.parametrize(
    "obj,path",
    [
        ([], "$"),
        ({}, "$.type"),
        ({"type": "blob"}, "$.type"),
        ({"type": "box"}, "$.halfwidths"),
        ({"type": "box", "halfwidths": [1, "x"]}, "$.halfwidths[1]"),
        ({"type": "ball", "n": 2.5}, "$.n"),
        ({"type": "parallelotope", "matrix": [[1, 0], [0]]}, "$.matrix[1]"),
        ({"type": "cylinder", "n": 3, "k": 1}, "$.l"),
    ],
)
def test_field_path_errors(obj, path):
    with pytest.raises(BodySpecError) as exc:
        parse_body(obj)
    assert exc.value.path == path
    assert str(exc.value).startswith(path)


def test_semantic_errors_wrapped():
    with pytest.raises(BodySpecError):
        parse_body({"type": "parallelotope", "matrix": [[1, 1], [1, 1]]})
    with pytest.raises(BodySpecError):
        parse_body({"type": "hpolytope_sym", "normals": [[1, 0]], "offsets": [1]})


def test_subspace_parsing():
    L = parse_subspace({"basis": [[2, 0, 0], [0, 3, 0]]}, 3)
    assert L.dim == 2
    assert parse_subspace([[1, 1, 0]]).dim == 1
    with pytest.raises(BodySpecError):
        parse_subspace({"basis": [[1, 0]]}, 3)


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    with pytest.raises(BodySpecError, match="invalid JSON"):
        load_body(bad)
    with pytest.raises(BodySpecError, match="cannot read"):
        load_body(tmp_path / "missing.json")
