"""Brute-force facet and vertex enumeration for desk-scale polytopes.

Everything here works on plain coordinate arrays. Dimensions up to 4 and a
few dozen points are supported; larger inputs raise :class:`BudgetError`
instead of silently taking minutes.
"""
from __future__ import annotations

import itertools
from math import comb
from typing import NamedTuple

import numpy as np

MAX_DIM = 4
MAX_HULL_POINTS = 80
MAX_CONSTRAINTS = 40
DEDUP_TOL = 1e-9

_CHUNK = 50_000


class BudgetError(ValueError):
    """Input exceeds the brute-force enumeration budget."""


class DegenerateError(ValueError):
    """Point set is lower-dimensional than required."""


class UnboundedError(ValueError):
    """Constraint normals do not span the ambient space."""


class HullFacet(NamedTuple):
    normal: np.ndarray
    offset: float
    vertices: np.ndarray
    faces: tuple | None


def point_scale(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return 1.0
    return max(float(np.max(np.abs(points))), 1e-300)


def affine_basis(points, tol=1e-9):
    """Return ``(base_point, basis)`` of the affine hull of ``points``.

    ``basis`` has orthonormal columns; its column count is the affine rank.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    base = points[0]
    diffs = points - base
    scale = point_scale(points)
    if diffs.shape[0] < 2:
        return base, np.zeros((points.shape[1], 0))
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    rank = int(np.sum(s > tol * scale))
    return base, vt[:rank].T


def linear_basis(points, tol=1e-9):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    scale = point_scale(points)
    _, s, vt = np.linalg.svd(points, full_matrices=False)
    rank = int(np.sum(s > tol * scale))
    return vt[:rank].T


def orthogonal_complement(basis: np.ndarray) -> np.ndarray:
    n, k = basis.shape
    if k == 0:
        return np.eye(n)
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(n)]))
    # QR of [B | I] keeps span(B) in the first k columns.
    return q[:, k:n]


def dedup_points(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop points closer than ``tol * scale`` to an earlier point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return points
    eps = tol * point_scale(points)
    if len(points) <= 2000:
        D = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
        close = np.tril(D <= eps, -1)
        if not close.any():
            return points
    keep: list[int] = []
    for i, p in enumerate(points):
        if not keep or np.min(np.max(np.abs(points[keep] - p), axis=1)) > eps:
            keep.append(i)
    return points[keep]


def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_polygon_order(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Indices of the extreme points of a planar set in counter-clockwise order.

    Andrew's monotone chain; collinear boundary points are dropped.
    """
    points = np.asarray(points, dtype=float)
    eps = tol * point_scale(points) ** 2
    order = sorted(range(len(points)), key=lambda i: (points[i, 0], points[i, 1]))
    if len(order) < 3:
        return np.array(order, dtype=int)

    def chain(idx):
        out: list[int] = []
        for i in idx:
            while len(out) >= 2 and _cross2(points[out[-2]], points[out[-1]], points[i]) <= eps:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=int)


def _hyperplane_normals(pts: np.ndarray) -> np.ndarray:
    # pts: (B, d, d); generalized cross product of the d-1 edge vectors
    edges = pts[:, 1:, :] - pts[:, :1, :]
    d = pts.shape[2]
    out = np.empty((pts.shape[0], d))
    for j in range(d):
        minor = np.delete(edges, j, axis=2)
        out[:, j] = (-1) ** j * np.linalg.det(minor)
    return out


def _fit_normal(pts: np.ndarray) -> np.ndarray:
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    return vt[-1]


def hull_facets(points, tol: float = DEDUP_TOL, structure: bool = True) -> list[HullFacet]:
    """Facets of ``conv(points)`` for a full-dimensional point set.

    Parameters
    ----------
    points : array_like, shape (m, d)
        Points in R^d, ``1 <= d <= 4``, ``m <= MAX_HULL_POINTS``.
    tol : float
        Relative tolerance for incidence and side tests.

    Returns
    -------
    list of HullFacet
        Outward unit normals and offsets ``<normal, x> = offset`` relative
        to the true origin (offsets may be non-positive if the origin is not
        interior). ``vertices`` indexes the extreme points of the facet; for
        d = 3 they are in cyclic order, for d = 4 ``faces`` holds the ordered
        2-faces of the facet. With ``structure=False`` vertices are unordered
        and ``faces`` is None.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = points.shape
    if d < 1 or d > MAX_DIM:
        raise BudgetError(f"dimension {d} outside brute-force range 1..{MAX_DIM}")
    if m > MAX_HULL_POINTS:
        raise BudgetError(f"{m} points exceed brute-force budget {MAX_HULL_POINTS}")
    _, basis = affine_basis(points, tol)
    if basis.shape[1] < d:
        raise DegenerateError(f"point set has affine dimension {basis.shape[1]} < {d}")

    if d == 1:
        x = points[:, 0]
        hi, lo = int(np.argmax(x)), int(np.argmin(x))
        return [
            HullFacet(np.array([1.0]), float(x[hi]), np.array([hi]), None),
            HullFacet(np.array([-1.0]), float(-x[lo]), np.array([lo]), None),
        ]
    if d == 2:
        return _polygon_facets(points, tol)
    return _brute_facets(points, tol, structure)


def _polygon_facets(points, tol):
    order = convex_polygon_order(points, tol)
    facets = []
    for a, b in zip(order, np.roll(order, -1)):
        e = points[b] - points[a]
        nrm = np.array([e[1], -e[0]])
        nrm /= np.linalg.norm(nrm)
        facets.append(HullFacet(nrm, float(nrm @ points[a]), np.array([a, b]), None))
    return facets


def _brute_facets(points, tol, structure=True):
    m, d = points.shape
    ncomb = comb(m, d)
    if ncomb > 2_000_000:
        raise BudgetError(f"{ncomb} candidate hyperplanes exceed budget")
    center = points.mean(axis=0)
    local = points - center
    scale = point_scale(local)
    eps = tol * scale

    seen: dict[bytes, int] = {}
    incidences: list[np.ndarray] = []
    combos = itertools.combinations(range(m), d)
    while True:
        block = np.array(list(itertools.islice(combos, _CHUNK)), dtype=int)
        if block.size == 0:
            break
        normals = _hyperplane_normals(local[block])
        norms = np.linalg.norm(normals, axis=1)
        good = norms > 1e-10 * scale ** (d - 1)
        if not np.any(good):
            continue
        block, normals = block[good], normals[good] / norms[good, None]
        offs = np.einsum("bj,bj->b", normals, local[block[:, 0]])
        side = normals @ local.T - offs[:, None]
        supporting = (side.max(axis=1) <= eps) | (side.min(axis=1) >= -eps)
        for row in np.abs(side[supporting]) <= eps:
            key = np.packbits(row).tobytes()
            if key not in seen:
                seen[key] = len(incidences)
                incidences.append(np.flatnonzero(row))

    facets = []
    for idx in incidences:
        on = local[idx]
        if len(idx) == d:
            # d affinely independent points (their cofactor normal was nonzero)
            nrm = _hyperplane_normals(on[None])[0]
            nrm /= np.linalg.norm(nrm)
        else:
            if affine_basis(on, tol)[1].shape[1] != d - 1:
                continue
            nrm = _fit_normal(on)
        if np.max(local @ nrm - nrm @ on[0]) > eps:
            nrm = -nrm
        offset = float(np.mean(points[idx] @ nrm))
        if not structure:
            facets.append(HullFacet(nrm, offset, idx, None))
            continue
        verts, faces = _facet_structure(points[idx], nrm, tol)
        facets.append(HullFacet(nrm, offset, idx[verts], _remap(faces, idx[verts])))
    return facets


def _remap(faces, idx):
    if faces is None:
        return None
    return tuple(tuple(int(idx[j]) for j in f) for f in faces)


def _facet_structure(pts, normal, tol):
    """Extreme vertices (and 2-faces for 3-dimensional facets) of a facet."""
    d = pts.shape[1]
    if len(pts) == d:
        # simplex facet: every vertex is extreme, every (d-1)-subset a face
        verts = np.arange(d)
        if d == 3:
            return verts, None
        return verts, tuple(itertools.combinations(range(d), d - 1))
    chart = orthogonal_complement(normal[:, None])
    coords = (pts - pts.mean(axis=0)) @ chart
    if coords.shape[1] == 2:
        return convex_polygon_order(coords, tol), None
    sub = hull_facets(coords, tol)
    verts = sorted({int(v) for f in sub for v in f.vertices})
    pos = {v: i for i, v in enumerate(verts)}
    faces = tuple(tuple(pos[int(v)] for v in f.vertices) for f in sub)
    return np.array(verts, dtype=int), faces


def _grow_hull(points: np.ndarray, tol: float) -> np.ndarray:
    """Subset with the same hull, small enough for the brute-force budget.

    Starts from support maximizers over fixed directions (all extreme) and
    adds the farthest outside point of every violated facet until no point
    lies outside.
    """
    d = points.shape[1]
    U = np.random.default_rng(0).standard_normal((64 * d, d))
    idx = set(np.argmax(points @ U.T, axis=0).tolist())
    eps = tol * point_scale(points)
    while True:
        if len(idx) > MAX_HULL_POINTS:
            raise BudgetError(f"more than {MAX_HULL_POINTS} candidate extreme points")
        S = points[sorted(idx)]
        facets = hull_facets(S, tol, structure=False)
        N = np.array([f.normal for f in facets])
        b = np.array([f.offset for f in facets])
        excess = points @ N.T - b
        hit = np.flatnonzero(excess.max(axis=0) > eps)
        if len(hit) == 0:
            return S
        idx.update(np.argmax(excess[:, hit], axis=0).tolist())


def hull_vertices(points, tol: float = DEDUP_TOL) -> np.ndarray:
    """Extreme points of a full-dimensional point set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] == 1:
        return points[[int(np.argmin(points[:, 0])), int(np.argmax(points[:, 0]))]]
    if points.shape[1] == 2:
        return points[convex_polygon_order(points, tol)]
    if len(points) > MAX_HULL_POINTS:
        points = _grow_hull(points, tol)
    facets = hull_facets(points, tol, structure=False)
    d = points.shape[1]
    incident: dict[int, list] = {}
    for f in facets:
        for v in f.vertices:
            incident.setdefault(int(v), []).append(f.normal)
    # extreme iff the incident facet normals span R^d
    idx = sorted(v for v, N in incident.items() if len(N) >= d and np.linalg.matrix_rank(np.array(N), tol=1e-8) == d)
    return points[idx]


def halfspace_vertices(normals, offsets, tol: float = DEDUP_TOL) -> np.ndarray:
    """Vertices of ``{x : |<u_i, x>| <= b_i}`` by intersecting n-subsets.

    Raises
    ------
    BudgetError
        If ``n > 4`` or more than ``MAX_CONSTRAINTS`` normal pairs are given.
    UnboundedError
        If the normals do not span R^n.
    """
    U = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.asarray(offsets, dtype=float)
    m, n = U.shape
    if n > MAX_DIM or m > MAX_CONSTRAINTS:
        raise BudgetError(f"vertex enumeration budget exceeded (n={n}, m={m})")
    if np.linalg.matrix_rank(U) < n:
        raise UnboundedError("constraint normals do not span the ambient space")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    found = []
    combos = itertools.combinations(range(m), n)
    while True:
        block = np.array(list(itertools.islice(combos, _CHUNK // len(signs) + 1)), dtype=int)
        if block.size == 0:
            break
        A = U[block]
        dets = np.linalg.det(A)
        ok = np.abs(dets) > 1e-12
        if not np.any(ok):
            continue
        A, block = A[ok], block[ok]
        rhs = b[block][:, None, :] * signs[None, :, :]
        X = np.linalg.solve(A[:, None, :, :], rhs[..., None])[..., 0].reshape(-1, n)
        slack = np.abs(X @ U.T) - b * (1 + tol)
        found.append(X[np.all(slack <= tol * point_scale(b), axis=1)])
    if not found:
        raise UnboundedError("no vertices found")
    return dedup_points(np.vstack(found), tol)
