"""Representations of convex bodies.

All bodies are immutable. Polytopes share :class:`Polytope`, which derives
support values from vertices and radial/membership queries from the
facet-listed form; balls and cylinders use closed forms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hull import (
    DEDUP_TOL,
    DegenerateError,
    HullFacet,
    UnboundedError,
    affine_basis,
    convex_polygon_order,
    dedup_points,
    halfspace_vertices,
    hull_facets,
    hull_vertices,
    linear_basis,
    point_scale,
)

UNIT_TOL = 1e-12
ACTIVE_TOL = 1e-9


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {v.shape[0]}")
    return v


def _as_points(V, name="vertices") -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.ndim != 2 or V.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty list of vectors")
    if not np.all(np.isfinite(V)):
        raise ValueError(f"{name} must be finite")
    return V


class ConvexBody:
    """Common interface; concrete bodies override the ``*_many`` kernels."""

    dim: int
    symmetric: bool = True

    @property
    def intrinsic_dim(self) -> int:
        return self.dim

    def support(self, x) -> float:
        return float(self.support_many(as_vector(x, self.dim)[None])[0])

    def radial(self, x) -> float:
        x = as_vector(x, self.dim)
        if not np.any(x):
            raise ValueError("radial function is undefined at the origin")
        return float(self.radial_many(x[None])[0])

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(self.contains_many(as_vector(x, self.dim)[None], tol)[0])

    def support_many(self, X):
        raise NotImplementedError

    def radial_many(self, X):
        raise NotImplementedError

    def contains_many(self, X, tol: float = 1e-9):
        raise NotImplementedError

    def boundary_normal_mask(self, U, selection, tol: float = ACTIVE_TOL):
        """Whether ``rho(u) u`` has an outer normal in ``selection``, per row of U."""
        raise NotImplementedError

    def inradius(self) -> float:
        raise NotImplementedError

    def reflect(self) -> "ConvexBody":
        if self.symmetric:
            return self
        raise NotImplementedError

    def scaled(self, lam: float) -> "ConvexBody":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    n: int
    r: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.r > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return self.n

    def support_many(self, X):
        return self.r * np.linalg.norm(X, axis=1)

    def radial_many(self, X):
        return self.r / np.linalg.norm(X, axis=1)

    def contains_many(self, X, tol=1e-9):
        return np.linalg.norm(X, axis=1) <= self.r * (1 + tol)

    def boundary_normal_mask(self, U, selection, tol=ACTIVE_TOL):
        return selection.contains_directions(U, tol)

    def bounding_box(self):
        return -self.r * np.ones(self.n), self.r * np.ones(self.n)

    def inradius(self):
        return self.r

    def volume(self):
        from ..quadrature import omega

        return omega(self.n) * self.r**self.n

    def scaled(self, lam):
        return Ball(self.n, self.r * lam)

    def __eq__(self, other):
        return isinstance(other, Ball) and (self.n, self.r) == (other.n, other.r)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Cylinder(ConvexBody):
    """``(l B_k) x B_{n-k}``; the first k coordinates form the axis block."""

    n: int
    k: int
    l: float

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise ValueError("need 1 <= k <= n-1")
        if not self.l > 0:
            raise ValueError("scale l must be positive")

    @property
    def dim(self):
        return self.n

    def _split(self, X):
        return np.linalg.norm(X[:, : self.k], axis=1), np.linalg.norm(X[:, self.k :], axis=1)

    def support_many(self, X):
        a, b = self._split(X)
        return self.l * a + b

    def radial_many(self, X):
        a, b = self._split(X)
        with np.errstate(divide="ignore"):
            return np.minimum(np.where(a > 0, self.l / a, np.inf), np.where(b > 0, 1.0 / b, np.inf))

    def contains_many(self, X, tol=1e-9):
        a, b = self._split(X)
        return (a <= self.l * (1 + tol)) & (b <= 1 + tol)

    def boundary_normal_mask(self, U, selection, tol=ACTIVE_TOL):
        # Lateral points |x1| = l carry normals (x1/|x1|, 0); cap points |x2| = 1
        # carry (0, x2/|x2|); the rim carries the cone spanned by both.
        rho = self.radial_many(U)
        X = rho[:, None] * U
        a, b = self._split(X)
        lateral = a >= self.l * (1 - tol)
        cap = b >= 1 - tol
        n1 = np.zeros_like(X)
        n1[:, : self.k] = X[:, : self.k]
        n2 = np.zeros_like(X)
        n2[:, self.k :] = X[:, self.k :]
        hit = np.zeros(len(U), dtype=bool)
        if np.any(lateral):
            hit[lateral] |= selection.contains_cone(n1[lateral], n2[lateral] * cap[lateral, None], tol)
        only_cap = cap & ~lateral
        if np.any(only_cap):
            hit[only_cap] |= selection.contains_cone(n2[only_cap], np.zeros_like(n2[only_cap]), tol)
        return hit

    def bounding_box(self):
        h = np.ones(self.n)
        h[: self.k] = self.l
        return -h, h

    def inradius(self):
        return min(self.l, 1.0)

    def volume(self):
        from ..quadrature import omega

        return omega(self.k) * self.l**self.k * omega(self.n - self.k)

    def scaled(self, lam):
        raise ValueError("a scaled cylinder is not a cylinder of this family; use a polytope")

    def __eq__(self, other):
        return isinstance(other, Cylinder) and (self.n, self.k, self.l) == (other.n, other.k, other.l)

    __hash__ = None


class Polytope(ConvexBody):
    """Polytope given by a finite vertex set; facets are derived lazily."""

    tag: str = ""

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def chart(self):
        """``(base, basis)`` with ``base`` the point of the affine hull closest to 0."""
        V = self.vertices
        if self.symmetric:
            B = linear_basis(V)
            return np.zeros(V.shape[1]), B
        v0, B = affine_basis(V)
        return v0 - B @ (B.T @ v0), B

    @property
    def intrinsic_dim(self) -> int:
        return self.chart[1].shape[1]

    @property
    def full_dimensional(self) -> bool:
        return self.intrinsic_dim == self.dim

    @cached_property
    def scale(self) -> float:
        return point_scale(self.vertices)

    def support_many(self, X):
        return np.max(X @ self.vertices.T, axis=1)

    @cached_property
    def facet_form(self) -> "FacetListedPolytope":
        return build_facets(self)

    @cached_property
    def chart_facets(self) -> list[HullFacet]:
        """Facets of the body inside its own affine hull (chart coordinates)."""
        base, B = self.chart
        if B.shape[1] == 0:
            return []
        return hull_facets((self.vertices - base) @ B)

    def radial_many(self, X):
        if not self.full_dimensional:
            raise ValueError("origin is not interior to a lower-dimensional body")
        return self.facet_form.radial_many(X)

    def contains_many(self, X, tol=1e-9):
        X = np.atleast_2d(X)
        base, B = self.chart
        Y = X - base
        coords = Y @ B
        resid = np.linalg.norm(Y - coords @ B.T, axis=1)
        ok = resid <= tol * self.scale
        if B.shape[1] == 0:
            return ok
        for f in self.chart_facets:
            ok &= coords @ f.normal <= f.offset + tol * max(abs(f.offset), self.scale)
        return ok

    def boundary_normal_mask(self, U, selection, tol=ACTIVE_TOL):
        return self.facet_form.boundary_normal_mask(U, selection, tol)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def inradius(self):
        return self.facet_form.inradius()

    def volume(self):
        return self.facet_form.volume()

    def reflect(self):
        if self.symmetric:
            return self
        return VPolytope(-self.vertices)

    def scaled(self, lam):
        return VPolytope(lam * self.vertices) if not self.symmetric else SymVPolytope(lam * self.vertices)

    def translate(self, v):
        return VPolytope(self.vertices + as_vector(v, self.dim))

    def linear_image(self, A):
        A = np.asarray(A, dtype=float)
        W = self.vertices @ A.T
        return SymVPolytope(W) if self.symmetric else VPolytope(W)


def _extreme_points(P: np.ndarray) -> np.ndarray:
    P = dedup_points(P)
    v0, B = affine_basis(P)
    k = B.shape[1]
    if k == 0:
        return P[:1]
    coords = (P - v0) @ B
    if k == 1:
        return P[[int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))]]
    if k == 2:
        return P[convex_polygon_order(coords)]
    kept = hull_vertices(coords)
    return kept @ B.T + v0


def _is_symmetric_set(V: np.ndarray, tol: float = 1e-9) -> bool:
    eps = tol * point_scale(V)
    for v in V:
        if np.min(np.max(np.abs(V + v), axis=1)) > eps:
            return False
    return True


@dataclass(frozen=True, eq=False)
class VPolytope(Polytope):
    """``conv(points)``; need not be symmetric or full-dimensional."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points))

    @cached_property
    def vertices(self) -> np.ndarray:
        return _extreme_points(self.points)

    @cached_property
    def symmetric(self) -> bool:  # type: ignore[override]
        return _is_symmetric_set(self.vertices)

    def __eq__(self, other):
        return isinstance(other, VPolytope) and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SymVPolytope(Polytope):
    """``conv({v_j} u {-v_j})``."""

    generators: np.ndarray
    symmetric = True

    def __post_init__(self):
        object.__setattr__(self, "generators", _as_points(self.generators))

    @cached_property
    def vertices(self) -> np.ndarray:
        return _extreme_points(np.vstack([self.generators, -self.generators]))

    def scaled(self, lam):
        return SymVPolytope(lam * self.generators)

    def __eq__(self, other):
        return isinstance(other, SymVPolytope) and np.array_equal(self.generators, other.generators)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SymHPolytope(Polytope):
    """``{x : |<u_i, x>| <= b_i}`` with unit normals ``u_i``."""

    normals: np.ndarray
    offsets: np.ndarray
    symmetric = True

    def __post_init__(self):
        U = _as_points(self.normals, "normals")
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if len(b) != len(U):
            raise ValueError("normals and offsets differ in length")
        if np.any(np.abs(np.linalg.norm(U, axis=1) - 1) > UNIT_TOL):
            raise ValueError("normals must be unit vectors")
        if np.any(b <= 0):
            raise ValueError("offsets must be positive")
        if np.linalg.matrix_rank(U) < U.shape[1]:
            raise UnboundedError("normals must span R^n (unbounded body)")
        for i, j in itertools.combinations(range(len(U)), 2):
            if min(np.max(np.abs(U[i] - U[j])), np.max(np.abs(U[i] + U[j]))) < 1e-12:
                raise ValueError(f"duplicate normal pair at indices {i}, {j}")
        object.__setattr__(self, "normals", U)
        object.__setattr__(self, "offsets", b)

    @property
    def dim(self):
        return self.normals.shape[1]

    @cached_property
    def vertices(self):
        return halfspace_vertices(self.normals, self.offsets)

    @property
    def chart(self):
        return np.zeros(self.dim), np.eye(self.dim)

    def support_many(self, X):
        if self.dim <= 4 and len(self.normals) <= 40:
            return super().support_many(X)
        from scipy.optimize import linprog

        A = np.vstack([self.normals, -self.normals])
        bb = np.concatenate([self.offsets, self.offsets])
        out = []
        for x in X:
            res = linprog(-x, A_ub=A, b_ub=bb, bounds=[(None, None)] * self.dim, method="highs")
            out.append(-res.fun)
        return np.array(out)

    def radial_many(self, X):
        d = np.abs(X @ self.normals.T)
        with np.errstate(divide="ignore"):
            return np.min(np.where(d > 0, self.offsets / d, np.inf), axis=1)

    def contains_many(self, X, tol=1e-9):
        return np.all(np.abs(np.atleast_2d(X) @ self.normals.T) <= self.offsets * (1 + tol), axis=1)

    def scaled(self, lam):
        return SymHPolytope(self.normals, lam * self.offsets)

    def __eq__(self, other):
        return (
            isinstance(other, SymHPolytope)
            and np.array_equal(self.normals, other.normals)
            and np.array_equal(self.offsets, other.offsets)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Box(Polytope):
    """Axis-parallel box ``prod [-w_i, w_i]``."""

    halfwidths: np.ndarray
    symmetric = True
    tag = "box"

    def __post_init__(self):
        w = np.asarray(self.halfwidths, dtype=float).reshape(-1)
        if len(w) == 0 or np.any(~(w > 0)) or not np.all(np.isfinite(w)):
            raise ValueError("halfwidths must be positive and finite")
        object.__setattr__(self, "halfwidths", w)

    @property
    def dim(self):
        return len(self.halfwidths)

    @cached_property
    def vertices(self):
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        return signs * self.halfwidths

    @property
    def chart(self):
        return np.zeros(self.dim), np.eye(self.dim)

    def support_many(self, X):
        return np.abs(X) @ self.halfwidths

    def radial_many(self, X):
        with np.errstate(divide="ignore"):
            return np.min(np.where(X != 0, self.halfwidths / np.abs(X), np.inf), axis=1)

    def contains_many(self, X, tol=1e-9):
        return np.all(np.abs(np.atleast_2d(X)) <= self.halfwidths * (1 + tol), axis=1)

    def bounding_box(self):
        return -self.halfwidths, self.halfwidths.copy()

    def inradius(self):
        return float(self.halfwidths.min())

    def volume(self):
        return float(np.prod(2 * self.halfwidths))

    def scaled(self, lam):
        return Box(lam * self.halfwidths)

    def __eq__(self, other):
        return isinstance(other, Box) and np.array_equal(self.halfwidths, other.halfwidths)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Parallelotope(Polytope):
    """``A [-1, 1]^n`` for an invertible matrix A."""

    matrix: np.ndarray
    symmetric = True
    tag = "parallelotope"

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        if abs(np.linalg.det(A)) <= 1e-12 * max(1.0, np.max(np.abs(A))) ** A.shape[0]:
            raise ValueError("matrix is singular")
        object.__setattr__(self, "matrix", A)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def vertices(self):
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        return signs @ self.matrix.T

    @property
    def chart(self):
        return np.zeros(self.dim), np.eye(self.dim)

    def scaled(self, lam):
        return Parallelotope(lam * self.matrix)

    def __eq__(self, other):
        return isinstance(other, Parallelotope) and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Prism(Polytope):
    """``conv(Q - v, Q + v)`` with ``Q = conv(+-base_vertices)`` of dimension n-1."""

    base_vertices: np.ndarray
    apex: np.ndarray
    symmetric = True
    tag = "prism"

    def __post_init__(self):
        Q = _as_points(self.base_vertices, "base_vertices")
        v = as_vector(self.apex, Q.shape[1])
        n = Q.shape[1]
        B = linear_basis(Q)
        if B.shape[1] != n - 1:
            raise ValueError("base must span an (n-1)-dimensional linear subspace")
        if np.linalg.norm(v - B @ (B.T @ v)) <= 1e-12 * max(1.0, np.linalg.norm(v)):
            raise ValueError("apex lies in the affine hull of the base")
        object.__setattr__(self, "base_vertices", Q)
        object.__setattr__(self, "apex", v)

    @property
    def dim(self):
        return self.base_vertices.shape[1]

    @cached_property
    def axis(self) -> np.ndarray:
        """Unit normal u of the base hyperplane, oriented so <u, apex> > 0."""
        from .hull import orthogonal_complement

        u = orthogonal_complement(linear_basis(self.base_vertices))[:, 0]
        return u if u @ self.apex > 0 else -u

    @cached_property
    def vertices(self):
        Q = np.vstack([self.base_vertices, -self.base_vertices])
        return _extreme_points(np.vstack([Q + self.apex, Q - self.apex]))

    @property
    def chart(self):
        return np.zeros(self.dim), np.eye(self.dim)

    def scaled(self, lam):
        return Prism(lam * self.base_vertices, lam * self.apex)

    def __eq__(self, other):
        return (
            isinstance(other, Prism)
            and np.array_equal(self.base_vertices, other.base_vertices)
            and np.array_equal(self.apex, other.apex)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Facet:
    """Facet ``F = P ∩ {x : <normal, x> = offset}`` with ``offset > 0``."""

    normal: np.ndarray
    offset: float
    vertices: np.ndarray
    faces: tuple | None = None

    def __post_init__(self):
        u = as_vector(self.normal)
        V = _as_points(self.vertices)
        if abs(np.linalg.norm(u) - 1) > UNIT_TOL * 10:
            raise ValueError("facet normal must be a unit vector")
        if not self.offset > 0:
            raise ValueError("facet offset must be positive (origin interior)")
        if np.max(np.abs(V @ u - self.offset)) > 1e-8 * max(1.0, point_scale(V)):
            raise ValueError("facet vertices do not lie in the facet hyperplane")
        object.__setattr__(self, "normal", u)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "vertices", V)

    @cached_property
    def simplices(self) -> np.ndarray:
        """Triangulation as an array of shape (S, n, n)."""
        from ..quadrature import triangulate_facet

        return np.array(triangulate_facet(self))

    @cached_property
    def area(self) -> float:
        from ..quadrature import simplex_volume

        return sum(simplex_volume(s) for s in self.simplices)


@dataclass(frozen=True, eq=False)
class FacetListedPolytope(Polytope):
    """Polytope given by its facets; the canonical form for exact integration."""

    facets: tuple
    symmetric: bool = True  # type: ignore[misc]
    tag: str = ""  # type: ignore[misc]

    def __post_init__(self):
        facets = tuple(self.facets)
        if not facets:
            raise ValueError("need at least one facet")
        object.__setattr__(self, "facets", facets)

    @property
    def dim(self):
        return len(self.facets[0].normal)

    @cached_property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([f.offset for f in self.facets])

    @cached_property
    def vertices(self) -> np.ndarray:
        return dedup_points(np.vstack([f.vertices for f in self.facets]))

    @property
    def chart(self):
        return np.zeros(self.dim), np.eye(self.dim)

    @property
    def facet_form(self):
        return self

    @cached_property
    def chart_facets(self):
        return [HullFacet(f.normal, f.offset, None, f.faces) for f in self.facets]

    def radial_many(self, X):
        d = X @ self.normals.T
        with np.errstate(divide="ignore"):
            return np.min(np.where(d > 0, self.offsets / np.where(d > 0, d, 1.0), np.inf), axis=1)

    def contains_many(self, X, tol=1e-9):
        return np.all(np.atleast_2d(X) @ self.normals.T <= self.offsets * (1 + tol), axis=1)

    def active_facets(self, U, tol=ACTIVE_TOL) -> np.ndarray:
        """Boolean (N, F) array: facet i contains the boundary point rho(u) u."""
        rho = self.radial_many(U)
        X = rho[:, None] * U
        return X @ self.normals.T >= self.offsets * (1 - tol)

    def boundary_normal_mask(self, U, selection, tol=ACTIVE_TOL):
        mask = selection.facet_mask(self)
        return np.any(self.active_facets(U, tol) & mask[None, :], axis=1)

    def inradius(self):
        return float(self.offsets.min())

    def volume(self):
        return float(sum(f.offset * f.area for f in self.facets) / self.dim)

    def reflect(self):
        if self.symmetric:
            return self
        return FacetListedPolytope(
            tuple(Facet(f.normal * -1.0, f.offset, -f.vertices, f.faces) for f in self.facets), False, self.tag
        )

    def scaled(self, lam):
        if not lam > 0:
            raise ValueError("scale factor must be positive")
        return FacetListedPolytope(
            tuple(Facet(f.normal, lam * f.offset, lam * f.vertices, f.faces) for f in self.facets), self.symmetric, self.tag
        )

    def linear_image(self, A):
        A = np.asarray(A, dtype=float)
        Ainv_t = np.linalg.inv(A).T
        out = []
        for f in self.facets:
            u = Ainv_t @ f.normal
            u /= np.linalg.norm(u)
            V = f.vertices @ A.T
            out.append(Facet(u, float(np.mean(V @ u)), V, f.faces))
        return FacetListedPolytope(tuple(out), self.symmetric, self.tag)

    def __eq__(self, other):
        if not isinstance(other, FacetListedPolytope) or len(self.facets) != len(other.facets):
            return False
        return all(
            np.array_equal(a.normal, b.normal) and a.offset == b.offset and np.array_equal(a.vertices, b.vertices)
            for a, b in zip(self.facets, other.facets)
        )

    __hash__ = None


def build_facets(K: Polytope) -> FacetListedPolytope:
    """Facet-listed form of a full-dimensional polytope with the origin inside.

    Raises
    ------
    DegenerateError
        If the polytope is lower-dimensional.
    ValueError
        If the origin is not an interior point.
    """
    if isinstance(K, FacetListedPolytope):
        return K
    V = K.vertices
    n = V.shape[1]
    if np.linalg.matrix_rank(V - V.mean(axis=0), tol=DEDUP_TOL * point_scale(V)) < n:
        raise DegenerateError("build_facets needs a full-dimensional polytope")
    facets = []
    for hf in hull_facets(V):
        if hf.offset <= DEDUP_TOL * point_scale(V):
            raise ValueError("origin is not interior to the polytope")
        facets.append(Facet(hf.normal, hf.offset, V[hf.vertices], hf.faces and _local_faces(hf)))
    return FacetListedPolytope(tuple(facets), K.symmetric, getattr(K, "tag", ""))


def _local_faces(hf: HullFacet):
    pos = {int(v): i for i, v in enumerate(hf.vertices)}
    return tuple(tuple(pos[v] for v in face) for face in hf.faces)
