"""Functional front end for the geometry primitives."""
from __future__ import annotations

import numpy as np

from .bodies import (
    ACTIVE_TOL,
    Ball,
    Box,
    ConvexBody,
    Cylinder,
    FacetListedPolytope,
    Parallelotope,
    Polytope,
    Prism,
    SymHPolytope,
    SymVPolytope,
    VPolytope,
    as_vector,
    build_facets as _build_facets,
)
from .hull import BudgetError, affine_basis, halfspace_vertices
from .selection import NormalSelection, Subspace


def support(K: ConvexBody, x) -> float:
    """Support function ``max_{y in K} <x, y>``."""
    return K.support(x)


def radial(K: ConvexBody, x) -> float:
    """Radial function ``max{rho > 0 : rho x in K}``; needs 0 interior and x != 0."""
    return K.radial(x)


def contains(K: ConvexBody, x, tol: float = 1e-9) -> bool:
    return K.contains(x, tol)


def reflect(K: ConvexBody) -> ConvexBody:
    """The body ``-K``."""
    if isinstance(K, Polytope) and not isinstance(K, FacetListedPolytope) and not K.symmetric:
        return VPolytope(-K.vertices)
    return K.reflect()


def translate(K: Polytope, v) -> VPolytope:
    return K.translate(v)


def linear_image(K: Polytope, A) -> Polytope:
    return K.linear_image(A)


def segment(a, b) -> VPolytope:
    """Segment ``conv{a, b}`` (a 1-dimensional, possibly non-symmetric body)."""
    return VPolytope(np.vstack([as_vector(a), as_vector(b)]))


def _vertex_list(K) -> np.ndarray:
    if isinstance(K, Polytope):
        return K.vertices
    if isinstance(K, np.ndarray) or isinstance(K, (list, tuple)):
        return np.atleast_2d(np.asarray(K, dtype=float))
    raise TypeError(f"{type(K).__name__} is not vertex-representable")


def _direction_space(K: Polytope) -> np.ndarray:
    return affine_basis(K.vertices)[1]


def minkowski_combination(A, B, lam: float) -> VPolytope:
    """``(1 - lam) A + lam B`` as the hull of all pairwise vertex combinations.

    Both inputs must live in parallel affine hulls of the same dimension
    (this includes the full-dimensional case).
    """
    VA, VB = _vertex_list(A), _vertex_list(B)
    if VA.shape[1] != VB.shape[1]:
        raise ValueError("ambient dimension mismatch")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    BA, BB = affine_basis(VA)[1], affine_basis(VB)[1]
    if BA.shape[1] != BB.shape[1]:
        raise ValueError("intrinsic dimension mismatch")
    if BA.shape[1] and np.linalg.norm(BB - BA @ (BA.T @ BB)) > 1e-9:
        raise ValueError("affine hulls are not parallel")
    pts = ((1 - lam) * VA[:, None, :] + lam * VB[None, :, :]).reshape(-1, VA.shape[1])
    return VPolytope(pts)


def project(K: ConvexBody, L: Subspace) -> ConvexBody:
    """Orthogonal projection ``K | L`` in the coordinates of L's basis."""
    if K.dim != L.n:
        raise ValueError("dimension mismatch")
    B = L.basis
    if isinstance(K, Ball):
        return Ball(L.dim, K.r)
    if isinstance(K, Cylinder):
        axis = np.eye(K.n)[:, : K.k]
        comp = np.eye(K.n)[:, K.k :]
        if L.dim == K.k and np.linalg.norm(B - axis @ (axis.T @ B)) < 1e-12:
            return Ball(K.k, K.l)
        if L.dim == K.n - K.k and np.linalg.norm(B - comp @ (comp.T @ B)) < 1e-12:
            return Ball(K.n - K.k, 1.0)
        raise ValueError("cylinder projections are supported only onto the two coordinate blocks")
    if isinstance(K, Polytope):
        W = K.vertices @ B
        return SymVPolytope(W) if K.symmetric else VPolytope(W)
    raise TypeError(f"cannot project {type(K).__name__}")


def enumerate_vertices(K: SymHPolytope) -> SymVPolytope:
    """Vertices of a symmetric H-polytope by brute force (n <= 4, m <= 40)."""
    V = halfspace_vertices(K.normals, K.offsets)
    return SymVPolytope(V)


def build_facets(K: Polytope) -> FacetListedPolytope:
    """Facet-listed form of a full-dimensional polytope containing 0 in its interior."""
    if isinstance(K, SymHPolytope) and (K.dim > 4 or len(K.normals) > 40):
        raise BudgetError("vertex enumeration budget exceeded")
    return _build_facets(K)


def reverse_radial_gauss_contains(
    K: FacetListedPolytope, eta: NormalSelection, u, tol: float = ACTIVE_TOL
) -> bool:
    """Whether ``rho_K(u) u`` lies in a supporting hyperplane with normal in ``eta``."""
    u = as_vector(u, K.dim)
    return bool(K.boundary_normal_mask(u[None], eta, tol)[0])


# ------------------------------------------------------------ constructors


def box(halfwidths) -> Box:
    return Box(halfwidths)


def cube(n: int, halfwidth: float = 1.0) -> Box:
    return Box(np.full(n, float(halfwidth)))


def cross_polytope(n: int, radius: float = 1.0) -> SymVPolytope:
    return SymVPolytope(radius * np.eye(n))


def parallelotope(A) -> Parallelotope:
    return Parallelotope(A)


def prism(base_vertices, apex) -> Prism:
    return Prism(base_vertices, apex)


def random_symmetric_polytope(rng: np.random.Generator, n: int, m: int, radius_range=(0.5, 2.0)) -> SymVPolytope:
    """``conv(+-r_j u_j)`` with uniform directions and log-uniform radii.

    Resamples until the result is full-dimensional.
    """
    lo, hi = np.log(radius_range[0]), np.log(radius_range[1])
    while True:
        U = rng.standard_normal((m, n))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        r = np.exp(rng.uniform(lo, hi, size=m))
        P = SymVPolytope(U * r[:, None])
        if P.full_dimensional:
            return P
