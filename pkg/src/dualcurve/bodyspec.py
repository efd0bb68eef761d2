"""JSON body specifications: parsing with field-path errors and lossless dumping."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .geometry.bodies import Ball, Box, ConvexBody, Cylinder, Parallelotope, Prism, SymHPolytope, SymVPolytope
from .geometry.selection import Subspace

BODY_TYPES = ("box", "hpolytope_sym", "vpolytope_sym", "ball", "cylinder", "parallelotope", "prism")


class BodySpecError(ValueError):
    """Malformed body or subspace specification; the message starts with a field path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _field(obj, key, path):
    if key not in obj:
        raise BodySpecError(f"{path}.{key}", "missing field")
    return obj[key]


def _real(x, path) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise BodySpecError(path, f"expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        raise BodySpecError(path, "expected a finite number")
    return float(x)


def _int(x, path) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise BodySpecError(path, f"expected an integer, got {x!r}")
    return x


def _vector(x, path) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise BodySpecError(path, "expected a nonempty list of numbers")
    return np.array([_real(v, f"{path}[{i}]") for i, v in enumerate(x)])


def _matrix(x, path) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise BodySpecError(path, "expected a nonempty list of rows")
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(x)]
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise BodySpecError(f"{path}[{i}]", f"row length {len(r)} differs from {width}")
    return np.vstack(rows)


def parse_body(obj, path: str = "$") -> ConvexBody:
    """Build a body from a decoded BodySpec object.

    Raises
    ------
    BodySpecError
        With the JSON path of the offending field.
    """
    if not isinstance(obj, dict):
        raise BodySpecError(path, "expected an object")
    kind = _field(obj, "type", path)
    if kind not in BODY_TYPES:
        raise BodySpecError(f"{path}.type", f"unknown body type {kind!r}; expected one of {', '.join(BODY_TYPES)}")
    try:
        if kind == "box":
            return Box(_vector(_field(obj, "halfwidths", path), f"{path}.halfwidths"))
        if kind == "hpolytope_sym":
            U = _matrix(_field(obj, "normals", path), f"{path}.normals")
            b = _vector(_field(obj, "offsets", path), f"{path}.offsets")
            return SymHPolytope(U, b)
        if kind == "vpolytope_sym":
            return SymVPolytope(_matrix(_field(obj, "vertices", path), f"{path}.vertices"))
        if kind == "ball":
            n = _int(_field(obj, "n", path), f"{path}.n")
            return Ball(n, _real(obj.get("r", 1.0), f"{path}.r"))
        if kind == "cylinder":
            n = _int(_field(obj, "n", path), f"{path}.n")
            k = _int(_field(obj, "k", path), f"{path}.k")
            return Cylinder(n, k, _real(_field(obj, "l", path), f"{path}.l"))
        if kind == "parallelotope":
            return Parallelotope(_matrix(_field(obj, "matrix", path), f"{path}.matrix"))
        Q = _matrix(_field(obj, "base_vertices", path), f"{path}.base_vertices")
        v = _vector(_field(obj, "apex", path), f"{path}.apex")
        return Prism(Q, v)
    except BodySpecError:
        raise
    except ValueError as exc:
        raise BodySpecError(path, str(exc)) from exc


def dump_body(K: ConvexBody) -> dict:
    """Inverse of :func:`parse_body` (exact float round trip through JSON)."""
    if isinstance(K, Box):
        return {"type": "box", "halfwidths": K.halfwidths.tolist()}
    if isinstance(K, SymHPolytope):
        return {"type": "hpolytope_sym", "normals": K.normals.tolist(), "offsets": K.offsets.tolist()}
    if isinstance(K, SymVPolytope):
        return {"type": "vpolytope_sym", "vertices": K.generators.tolist()}
    if isinstance(K, Ball):
        return {"type": "ball", "n": K.n, "r": float(K.r)}
    if isinstance(K, Cylinder):
        return {"type": "cylinder", "n": K.n, "k": K.k, "l": float(K.l)}
    if isinstance(K, Parallelotope):
        return {"type": "parallelotope", "matrix": K.matrix.tolist()}
    if isinstance(K, Prism):
        return {"type": "prism", "base_vertices": K.base_vertices.tolist(), "apex": K.apex.tolist()}
    raise TypeError(f"{type(K).__name__} has no BodySpec form")


def parse_subspace(obj, n: int | None = None, path: str = "$") -> Subspace:
    """``{"basis": [[...], ...]}`` (spanning rows, orthonormalized) or a bare list of rows."""
    rows = _field(obj, "basis", path) if isinstance(obj, dict) else obj
    V = _matrix(rows, f"{path}.basis" if isinstance(obj, dict) else path)
    if n is not None and V.shape[1] != n:
        raise BodySpecError(path, f"subspace vectors have length {V.shape[1]}, body dimension is {n}")
    try:
        return Subspace.span(V)
    except ValueError as exc:
        raise BodySpecError(path, str(exc)) from exc


def load_json(path) -> object:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BodySpecError(str(p), f"cannot read file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise BodySpecError(str(p), f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def load_body(path) -> ConvexBody:
    return parse_body(load_json(path))
