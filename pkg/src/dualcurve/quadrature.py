"""Numerical integration engines with error estimates.

Three families live here:

* fixed polynomial-exact rules on simplices (collapsed Gauss-Jacobi
  products, positive weights) and the tensor Gauss-Legendre rule on the
  unit square;
* seeded Monte Carlo over convex bodies and over the unit sphere;
* small helpers (ball volumes, facet triangulation).

Every engine returns a :class:`QuadratureResult`. Monte Carlo errors are
one standard error; deterministic rules report the difference to a lower
order rule.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import factorial, pi

import numpy as np
from scipy.special import roots_jacobi

from .geometry.hull import orthogonal_complement

DEFAULT_SAMPLES = 200_000
DEFAULT_DEGREE = 10
DEFAULT_GL_NODES = 64
MIN_ACCEPTANCE = 1e-4


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error: float
    nodes_or_samples: int
    engine: str


@dataclass(frozen=True)
class RngSeed:
    """Seed plus stream id; equal pairs give identical sample streams."""

    seed: int = 0
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "RngSeed":
        return RngSeed(self.seed, stream)


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    if seed is None:
        return RngSeed()
    return RngSeed(int(seed))


def omega(n: int) -> float:
    """Volume of the n-dimensional Euclidean unit ball."""
    if n < 0:
        raise ValueError("dimension must be non-negative")
    # w_n = 2 pi w_{n-2} / n from w_0 = 1, w_1 = 2; exact at small n
    w, start = (1.0, 2) if n % 2 == 0 else (2.0, 3)
    for m in range(start, n + 1, 2):
        w *= 2 * pi / m
    return w


def sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return n * omega(n)


# ---------------------------------------------------------------- simplices


@lru_cache(maxsize=None)
def reference_simplex_rule(dim: int, points_per_axis: int):
    """Nodes (barycentric, shape (N, dim+1)) and weights summing to 1/dim!.

    Conical product of Gauss-Jacobi rules; exact for total degree
    ``2 * points_per_axis - 1``.
    """
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    axes = []
    for j in range(dim):
        a = dim - 1 - j
        x, w = roots_jacobi(points_per_axis, a, 0)
        axes.append(((x + 1) / 2, w / 2 ** (a + 1)))
    nodes, weights = [], []
    for combo in product(*[range(points_per_axis)] * dim):
        xi = [axes[j][0][c] for j, c in enumerate(combo)]
        w = np.prod([axes[j][1][c] for j, c in enumerate(combo)])
        y, rest = [], 1.0
        for v in xi:
            y.append(rest * v)
            rest *= 1 - v
        nodes.append([1 - sum(y)] + y)
        weights.append(w)
    return np.array(nodes), np.array(weights)


def simplex_volume(vertices) -> float:
    """k-dimensional volume of a k-simplex given by k+1 vertices in R^n."""
    v = np.asarray(vertices, dtype=float)
    k = len(v) - 1
    if k == 0:
        return 1.0
    E = v[1:] - v[0]
    g = E @ E.T
    return float(np.sqrt(max(np.linalg.det(g), 0.0)) / factorial(k))


def _points_for_degree(degree: int) -> int:
    return max(1, (degree + 2) // 2)


def _rule_on(simplices: np.ndarray, degree: int):
    # simplices: (S, k+1, n) -> points (S, Q, n), weights (S, Q)
    k = simplices.shape[1] - 1
    bary, w = reference_simplex_rule(k, _points_for_degree(degree))
    pts = np.matmul(bary[None], simplices)
    if k == 0:
        jac = np.ones(len(simplices))
    else:
        E = simplices[:, 1:, :] - simplices[:, :1, :]
        G = np.einsum("skn,sjn->skj", E, E)
        jac = np.sqrt(np.clip(np.linalg.det(G), 0.0, None))
    return pts, jac[:, None] * w[None, :]


def integrate_simplices(f, simplices, degree: int = DEFAULT_DEGREE) -> QuadratureResult:
    """Integrate ``f`` over a union of k-simplices in R^n.

    ``f`` maps an array of points (..., n) to values (...). The error
    estimate is the difference between the degree ``degree`` and
    ``degree - 2`` rules.
    """
    simplices = np.asarray(simplices, dtype=float)
    if simplices.ndim == 2:
        simplices = simplices[None]
    if not 1 <= degree <= 25:
        raise ValueError("degree must lie in [1, 25]")
    pts, w = _rule_on(simplices, degree)
    value = float(np.sum(w * f(pts)))
    if degree > 2:
        pts2, w2 = _rule_on(simplices, degree - 2)
        coarse = float(np.sum(w2 * f(pts2)))
    else:
        # Degree-1 rule compared with the vertex average (also degree 1).
        vol = w.sum(axis=1)
        coarse = float(np.sum(vol * f(simplices).mean(axis=1)))
    return QuadratureResult(value, abs(value - coarse), int(w.size), "simplex")


def integrate_grouped(f, simplices, owner, groups: int, degree: int = DEFAULT_DEGREE):
    """Per-group integrals over labelled simplices.

    Returns ``(values, errors)``, arrays of length ``groups``; simplex ``s``
    contributes to group ``owner[s]``. Errors are per-group rule differences.
    """
    simplices = np.asarray(simplices, dtype=float)
    owner = np.asarray(owner, dtype=int)
    pts, w = _rule_on(simplices, degree)
    fine = np.bincount(owner, np.sum(w * f(pts), axis=1), minlength=groups)
    pts2, w2 = _rule_on(simplices, max(degree - 2, 1))
    coarse = np.bincount(owner, np.sum(w2 * f(pts2), axis=1), minlength=groups)
    return fine, np.abs(fine - coarse)


def bisect_simplices(simplices: np.ndarray) -> np.ndarray:
    """Split every simplex at the midpoint of its longest edge (2 children each)."""
    S, m, _ = simplices.shape
    i, j = np.triu_indices(m, 1)
    L = np.linalg.norm(simplices[:, i] - simplices[:, j], axis=2)
    e = np.argmax(L, axis=1)
    a, b = i[e], j[e]
    r = np.arange(S)
    mid = (simplices[r, a] + simplices[r, b]) / 2
    c1, c2 = simplices.copy(), simplices.copy()
    c1[r, a] = mid
    c2[r, b] = mid
    return np.concatenate([c1, c2])


def integrate_adaptive(
    f,
    simplices,
    owner,
    groups: int,
    degree: int = DEFAULT_DEGREE,
    rtol: float = 1e-10,
    max_rounds: int = 12,
    max_simplices: int = 100_000,
    weights=None,
):
    """Per-group integrals with local longest-edge bisection.

    Each round estimates every simplex's error as the difference between
    the degree ``degree`` and ``degree - 2`` rules; in groups still above
    ``rtol`` (relative), simplices carrying at least 5% of their group's
    largest local error are bisected. ``weights`` optionally scales each
    simplex's contribution (for signed decompositions).
    """
    S = np.asarray(simplices, dtype=float)
    own = np.asarray(owner, dtype=int)
    wt = np.ones(len(S)) if weights is None else np.asarray(weights, dtype=float)
    done_v = np.zeros(groups)
    done_e = np.zeros(groups)
    for rnd in range(max_rounds + 1):
        pts, w = _rule_on(S, degree)
        fine = wt * np.sum(w * f(pts), axis=1)
        pts2, w2 = _rule_on(S, max(degree - 2, 1))
        err = np.abs(fine - wt * np.sum(w2 * f(pts2), axis=1))
        val = done_v + np.bincount(own, fine, minlength=groups)
        tot = done_e + np.bincount(own, err, minlength=groups)
        bad = tot > rtol * np.abs(val)
        if not bad.any() or rnd == max_rounds or 2 * len(S) > max_simplices:
            return val, tot
        worst = np.zeros(groups)
        np.maximum.at(worst, own, err)
        split = bad[own] & (err >= 0.05 * worst[own])
        carry = bad[own] & ~split
        # converged groups are final; unsplit simplices of open groups are re-scored
        freeze = ~bad[own]
        done_v += np.bincount(own[freeze], fine[freeze], minlength=groups)
        done_e += np.bincount(own[freeze], err[freeze], minlength=groups)
        S = np.concatenate([S[carry], bisect_simplices(S[split])])
        own = np.concatenate([own[carry], np.tile(own[split], 2)])
        wt = np.concatenate([wt[carry], np.tile(wt[split], 2)])


def simplex_integrate(f, simplex, degree: int = DEFAULT_DEGREE) -> QuadratureResult:
    """Integrate ``f`` over one nondegenerate simplex.

    Parameters
    ----------
    f : callable
        Vectorized scalar field, points of shape (..., n) to (...).
    simplex : array_like, shape (k+1, n)
        Vertex list.
    degree : int
        Polynomial exactness of the rule, 1..25.
    """
    simplex = np.asarray(simplex, dtype=float)
    if simplex.ndim != 2:
        raise ValueError("simplex must be a (k+1, n) vertex array")
    k = simplex.shape[0] - 1
    if k > simplex.shape[1] or (k > 0 and simplex_volume(simplex) <= 1e-14 * np.max(np.abs(simplex)) ** k):
        raise ValueError("degenerate simplex")
    return integrate_simplices(f, simplex[None], degree)


def triangulate_facet(facet) -> list[np.ndarray]:
    """Split a facet into (n-1)-simplices.

    Segments and triangles are returned unchanged. Other polygons are fanned
    around their vertex centroid after an angular sort in the facet plane.
    Three-dimensional facets need their ordered 2-faces (``facet.faces``);
    each face is fanned and the triangles are coned to the facet centroid.
    """
    V = np.asarray(facet.vertices, dtype=float)
    n = V.shape[1]
    k = n - 1
    if len(V) == k + 1:
        return [V.copy()]
    if k <= 1:
        return [V[[0, -1]]]
    if k == 2:
        return _fan_polygon(V, facet.normal)
    if k == 3:
        faces = getattr(facet, "faces", None)
        if faces is None:
            raise ValueError("3-dimensional facet needs ordered 2-face cycles")
        apex = V.mean(axis=0)
        out = []
        for face in faces:
            poly = V[list(face)]
            fnormal = _polygon_normal(poly) if len(poly) > 3 else None
            for tri in _fan_polygon(poly, fnormal):
                out.append(np.vstack([tri, apex]))
        return out
    raise ValueError(f"facets of dimension {k} are not supported")


def _polygon_normal(poly):
    c = poly.mean(axis=0)
    _, _, vt = np.linalg.svd(poly - c)
    return vt[-1]


def _fan_polygon(poly, normal):
    if len(poly) == 3:
        return [poly.copy()]
    c = poly.mean(axis=0)
    ndim = poly.shape[1]
    if ndim == 2:
        chart = np.eye(2)
    else:
        # chart of the polygon's own plane inside R^ndim
        _, _, vt = np.linalg.svd(poly - c)
        chart = vt[:2].T
    xy = (poly - c) @ chart
    order = np.argsort(np.arctan2(xy[:, 1], xy[:, 0]))
    ring = poly[order]
    return [np.vstack([c, ring[i], ring[(i + 1) % len(ring)]]) for i in range(len(ring))]


# ------------------------------------------------------------ Gauss-Legendre


@lru_cache(maxsize=None)
def _gl01(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1) / 2, w / 2


def _gl2d_value(f, nodes, box):
    (a, b), (c, d) = box
    s, ws = _gl01(nodes)
    t, wt = _gl01(nodes)
    S, T = np.meshgrid(a + (b - a) * s, c + (d - c) * t, indexing="ij")
    return float(np.sum(np.outer(ws, wt) * f(S, T)) * (b - a) * (d - c))


def gauss_legendre_2d(f, nodes_per_axis: int = DEFAULT_GL_NODES, box=((0.0, 1.0), (0.0, 1.0))) -> QuadratureResult:
    """Tensor-product Gauss-Legendre rule on a rectangle (default [0,1]^2).

    ``f(s, t)`` is evaluated on broadcast grids. The error estimate is the
    change when the node count per axis is doubled; the returned value is
    the finer of the two.
    """
    if not 2 <= nodes_per_axis <= 200:
        raise ValueError("nodes_per_axis must lie in [2, 200]")
    coarse = _gl2d_value(f, nodes_per_axis, box)
    fine = _gl2d_value(f, 2 * nodes_per_axis, box)
    return QuadratureResult(fine, abs(fine - coarse), 4 * nodes_per_axis**2, "gauss-legendre")


def gauss_legendre_1d(f, a: float, b: float, nodes: int = DEFAULT_GL_NODES) -> float:
    x, w = _gl01(nodes)
    return float(np.sum(w * f(a + (b - a) * x)) * (b - a))


# --------------------------------------------------------------- Monte Carlo


def uniform_sphere(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    g = rng.standard_normal((N, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def uniform_ball(rng: np.random.Generator, N: int, n: int, r: float = 1.0) -> np.ndarray:
    u = uniform_sphere(rng, N, n)
    return u * (r * rng.random(N) ** (1.0 / n))[:, None]


def mc_sphere_integrate(f, n: int, N: int = DEFAULT_SAMPLES, seed=None) -> QuadratureResult:
    """Integrate ``f`` over the unit sphere S^{n-1} with uniform samples.

    ``f`` maps unit vectors (N, n) to values (N,).
    """
    if N < 1000:
        raise ValueError("at least 10^3 samples are required")
    rng = as_seed(seed).generator()
    U = uniform_sphere(rng, N, n)
    vals = np.asarray(f(U), dtype=float)
    area = sphere_area(n)
    return QuadratureResult(
        area * float(vals.mean()),
        _mc_error(area * float(vals.std(ddof=1)) / np.sqrt(N), area * float(vals.mean())),
        N,
        "sphere-mc",
    )


def mc_body_integrate(f, body, N: int = DEFAULT_SAMPLES, seed=None, radial_exponent: float | None = None) -> QuadratureResult:
    """Monte Carlo integral of ``f`` over a full-dimensional body.

    Balls, cylinders and boxes are sampled directly; everything else by
    rejection from its bounding box (hit-or-miss, so the body's volume is
    never an input). With ``radial_exponent=a`` half of the samples are
    drawn from the density proportional to ``|x|^(a-n)`` on the largest
    centred ball inside the body, which keeps integrands like
    ``|x|^(q-n)`` with small ``q`` at finite variance (needs ``0 < a < 2q``).
    """
    if N < 1000:
        raise ValueError("at least 10^3 samples are required")
    n = body.dim
    rng = as_seed(seed).generator()
    proposal = _proposal(body)
    if radial_exponent is None:
        X, inv_p = proposal.sample(rng, N)
        inside = proposal.inside(X, body)
        vals = np.zeros(N)
        if np.any(inside):
            vals[inside] = np.asarray(f(X[inside]), dtype=float) * inv_p
        acc = float(np.mean(inside))
    else:
        a = float(radial_exponent)
        r0 = body.inradius()
        half = N // 2
        X1, _ = proposal.sample(rng, half)
        X2 = _radial_ball_sample(rng, N - half, n, r0, a)
        X = np.vstack([X1, X2])
        inside = proposal.inside(X, body)
        dens_u = 1.0 / proposal.volume
        rad = np.linalg.norm(X, axis=1)
        dens_b = np.where(rad <= r0, a * np.power(np.maximum(rad, 1e-300), a - n) / (sphere_area(n) * r0**a), 0.0)
        mix = 0.5 * dens_u * proposal.support_mask(X) + 0.5 * dens_b
        vals = np.zeros(N)
        if np.any(inside):
            vals[inside] = np.asarray(f(X[inside]), dtype=float) / mix[inside]
        acc = float(np.mean(inside[:half])) if half else 1.0
    if acc < MIN_ACCEPTANCE:
        raise ValueError(f"acceptance rate {acc:.2e} below {MIN_ACCEPTANCE}")
    return QuadratureResult(float(vals.mean()), _mc_error(float(vals.std(ddof=1)) / np.sqrt(N), vals.mean()), N, "body-mc")


def _mc_error(sigma, value):
    # constant integrands have zero sample variance; keep a rounding floor
    return max(float(sigma), 8 * np.finfo(float).eps * abs(float(value)))


def _radial_ball_sample(rng, N, n, r0, a):
    u = uniform_sphere(rng, N, n)
    return u * (r0 * rng.random(N) ** (1.0 / a))[:, None]


class _Proposal:
    """Uniform proposal on a region containing the body."""

    def __init__(self, sampler, volume, inside, support_mask):
        self._sampler = sampler
        self.volume = volume
        self._inside = inside
        self._support = support_mask

    def sample(self, rng, N):
        return self._sampler(rng, N), self.volume

    def inside(self, X, body):
        return self._inside(X, body)

    def support_mask(self, X):
        return self._support(X)


def _proposal(body) -> _Proposal:
    from .geometry.bodies import Ball, Box, Cylinder

    n = body.dim
    if isinstance(body, Ball):
        r = body.r
        return _Proposal(
            lambda rng, N: uniform_ball(rng, N, n, r),
            omega(n) * r**n,
            lambda X, K: np.ones(len(X), dtype=bool),
            lambda X: (np.linalg.norm(X, axis=1) <= r * (1 + 1e-12)).astype(float),
        )
    if isinstance(body, Cylinder):
        k, l = body.k, body.l

        def sample(rng, N):
            return np.hstack([uniform_ball(rng, N, k, l), uniform_ball(rng, N, n - k, 1.0)])

        def support(X):
            ok = (np.linalg.norm(X[:, :k], axis=1) <= l * (1 + 1e-12)) & (np.linalg.norm(X[:, k:], axis=1) <= 1 + 1e-12)
            return ok.astype(float)

        return _Proposal(sample, omega(k) * l**k * omega(n - k), lambda X, K: np.ones(len(X), dtype=bool), support)
    lo, hi = body.bounding_box()
    if isinstance(body, Box):
        inside = lambda X, K: np.ones(len(X), dtype=bool)
    else:
        inside = lambda X, K: K.contains_many(X)
    width = hi - lo
    return _Proposal(
        lambda rng, N: lo + width * rng.random((N, n)),
        float(np.prod(width)),
        inside,
        lambda X: np.all((X >= lo - 1e-12 * width) & (X <= hi + 1e-12 * width), axis=1).astype(float),
    )
