"""Dual curvature measures, cone-volume measures, moments and concentration ratios.

For a polytope P with facets F_i (outer unit normal u_i, offset h_i > 0)
the dual curvature measure is atomic on the facet normals,

    C_q(P, {u_i}) = (h_i / n) * integral over F_i of |z|^(q - n),

which follows from the cone substitution x = r z (z in F_i, 0 <= r <= 1,
dx = h_i r^(n-1) dr dz) applied to (q/n) * integral of |x|^(q-n) over the
cone spanned by F_i. Every exact polytope path in this module uses it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy.special import hyp2f1

from .geometry.bodies import (
    Ball,
    Box,
    ConvexBody,
    Cylinder,
    FacetListedPolytope,
    Parallelotope,
    Polytope,
    _local_faces,
)
from .geometry.selection import FacetSubset, FullSphere, NormalSelection, Subspace, SubspaceCap
from .quadrature import (
    DEFAULT_DEGREE,
    DEFAULT_GL_NODES,
    DEFAULT_SAMPLES,
    QuadratureResult,
    as_seed,
    gauss_legendre_2d,
    integrate_adaptive,
    integrate_grouped,
    mc_body_integrate,
    mc_sphere_integrate,
    omega,
    triangulate_facet,
)

ENGINES = ("auto", "closed-form", "facet-exact", "sphere-mc", "body-mc")
_ENGINE_ALIASES = {"closed": "closed-form", "facet": "facet-exact", "exact": "facet-exact"}

BOUND_TOL = 1e-9


class EngineMismatch(ValueError):
    """The requested engine cannot evaluate this body/selection pair."""


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    abs_error: float
    engine: str
    q: float
    body: str = ""
    selection: dict = field(default_factory=dict)
    nodes_or_samples: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "abs_error": self.abs_error,
            "engine": self.engine,
            "q": self.q,
            "body": self.body,
            "selection": self.selection,
            "nodes_or_samples": self.nodes_or_samples,
        }


@dataclass(frozen=True)
class RatioReport:
    ratio: float
    bound: float
    bound_kind: str
    satisfied: bool
    margin: float
    abs_error: float = 0.0
    subspace_measure: MeasureEstimate | None = None
    total_measure: MeasureEstimate | None = None

    def to_dict(self) -> dict:
        out = {
            "ratio": self.ratio,
            "bound": self.bound,
            "bound_kind": self.bound_kind,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "abs_error": self.abs_error,
        }
        if self.subspace_measure is not None:
            out["subspace_measure"] = self.subspace_measure.to_dict()
        if self.total_measure is not None:
            out["total_measure"] = self.total_measure.to_dict()
        return out


def body_id(K: ConvexBody) -> str:
    if isinstance(K, Ball):
        return f"ball(n={K.n}, r={K.r!r})"
    if isinstance(K, Cylinder):
        return f"cylinder(n={K.n}, k={K.k}, l={K.l!r})"
    if isinstance(K, Polytope):
        kind = K.tag or type(K).__name__
        return f"{kind}(n={K.dim}, vertices={len(K.vertices)})"
    return type(K).__name__


def normalize_engine(engine: str) -> str:
    engine = _ENGINE_ALIASES.get(engine, engine)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    return engine


# ------------------------------------------------------------- facet engine


def _facet_form(K) -> FacetListedPolytope:
    if isinstance(K, FacetListedPolytope):
        return K
    if isinstance(K, Polytope):
        return K.facet_form
    raise EngineMismatch(f"facet engine needs a polytope, got {type(K).__name__}")


FACET_RTOL = 1e-8


def facet_values(P: FacetListedPolytope, q: float, degree: int = DEFAULT_DEGREE, rtol: float = FACET_RTOL):
    """Per-facet ``C_q(P, {u_i})`` and error estimates, as two arrays.

    Segments (n = 2) use an exact cone formula; higher-dimensional facets
    use simplex rules with adaptive bisection until each facet's estimated
    relative error is below ``rtol``.
    """
    if not q > 0:
        raise ValueError("the facet engine needs q > 0; use the sphere-mc engine for q <= 0")
    n = P.dim
    e = float(q - n)
    h = P.offsets
    if e == 0.0:
        areas = np.array([f.area for f in P.facets])
        return h * areas / n, np.zeros(len(P.facets))
    if n == 1:
        return h**q, np.zeros(len(P.facets))
    if n == 2:
        vals = _segment_power_integrals(P, e)
        return h * vals / n, 1e-15 * h * np.abs(vals)
    # F_{-i} = -F_i and the integrand is even: integrate one facet per pair
    rep = _antipodal_representatives(P)
    todo = np.unique(rep)
    simp = [P.facets[i].simplices for i in todo]
    owner = np.concatenate([np.full(len(s), j) for j, s in enumerate(simp)])
    vals, errs = integrate_adaptive(
        lambda X: np.power(np.einsum("...i,...i->...", X, X), e / 2),
        np.concatenate(simp),
        owner,
        len(todo),
        degree,
        rtol,
    )
    slot = np.searchsorted(todo, rep)
    vals, errs = vals[slot], errs[slot]
    # rounding floor
    errs = np.maximum(errs, 1e-15 * np.abs(vals))
    return h * vals / n, h * errs / n


def _antipodal_representatives(P: FacetListedPolytope) -> np.ndarray:
    """Index of the facet whose integral stands in for each facet."""
    m = len(P.facets)
    rep = np.arange(m)
    if not P.symmetric:
        return rep
    N, h = P.normals, P.offsets
    for i in range(m):
        j = int(np.argmin(np.linalg.norm(N + N[i], axis=1)))
        if j < i and np.linalg.norm(N[j] + N[i]) <= 1e-12 and abs(h[j] - h[i]) <= 1e-12 * h[i]:
            rep[i] = rep[j]
    return rep


def _segment_power_integrals(P: FacetListedPolytope, e: float):
    """``integral over F_i of |z|^e`` for the edges of a polygon, in closed form.

    Each edge is split at the foot point ``c = h_i u_i``; along ``[c, y]``
    the integral depends only on ``s = |y - c|`` and ``h_i``.
    """
    out = np.empty(len(P.facets))
    for i, F in enumerate(P.facets):
        d = F.offset
        c = d * F.normal
        a, b = F.vertices[0], F.vertices[-1]
        t = (b - a) / np.linalg.norm(b - a)
        sa, sb = (a - c) @ t, (b - c) @ t
        out[i] = _half_edge(abs(sb), d, e) * np.sign(sb) - _half_edge(abs(sa), d, e) * np.sign(sa)
    return out


def _half_edge(s: float, d: float, e: float) -> float:
    # integral_0^s (d^2 + x^2)^(e/2) dx, Pfaff form of d^e s 2F1(-e/2, 1/2; 3/2; -s^2/d^2)
    if s == 0.0:
        return 0.0
    r2 = d * d + s * s
    return s * r2 ** (e / 2) * float(hyp2f1(-e / 2, 1.0, 1.5, s * s / r2))


def _node_count(P) -> int:
    return int(sum(len(f.simplices) for f in P.facets))


def facet_dual_curvature(P, i: int, q: float, degree: int = DEFAULT_DEGREE) -> MeasureEstimate:
    """``C_q(P, {u_i})`` for one facet by simplex quadrature.

    Parameters
    ----------
    P : Polytope
        Full-dimensional polytope with the origin inside.
    i : int
        Facet index into ``P.facet_form.facets``.
    q : float
        Positive exponent.
    """
    P = _facet_form(P)
    if not 0 <= i < len(P.facets):
        raise IndexError(f"facet index {i} out of range for {len(P.facets)} facets")
    if not q > 0:
        raise ValueError("the facet engine needs q > 0; use the sphere-mc engine for q <= 0")
    F = P.facets[i]
    sub = FacetListedPolytope((F,), P.symmetric)
    v, e = facet_values(sub, q, degree)
    return MeasureEstimate(
        float(v[0]), float(e[0]), "facet-exact", float(q), body_id(P), {"kind": "facets", "indices": [i]}, 0
    )


def _facet_measure(K, eta: NormalSelection, q: float, degree: int) -> MeasureEstimate:
    P = _facet_form(K)
    mask = eta.facet_mask(P)
    vals, errs = facet_values(P, q, degree)
    return MeasureEstimate(
        float(np.sum(vals[mask])),
        float(np.sum(errs[mask])),
        "facet-exact",
        float(q),
        body_id(K),
        eta.describe(),
        _node_count(P),
    )


# ------------------------------------------------------ closed-form engine


def _block_subspace(K: Cylinder, L: Subspace):
    """Which coordinate block of the cylinder L equals: 'axis', 'complement' or None."""
    B = L.basis
    if L.dim == K.k and np.linalg.norm(B[K.k :, :]) < 1e-12:
        return "axis"
    if L.dim == K.n - K.k and np.linalg.norm(B[: K.k, :]) < 1e-12:
        return "complement"
    return None


def _closed_form(K, eta: NormalSelection, q: float, nodes: int) -> MeasureEstimate:
    if isinstance(K, Ball):
        if isinstance(eta, FullSphere):
            v, e = omega(K.n) * K.r**q, 0.0
        elif isinstance(eta, SubspaceCap):
            # a great subsphere is a null set for the cone measure of the ball
            v, e = 0.0, 0.0
        else:
            raise EngineMismatch("facet subsets do not apply to a ball")
        return MeasureEstimate(float(v), e, "closed-form", float(q), body_id(K), eta.describe(), 0)
    if isinstance(K, Cylinder):
        if isinstance(eta, FullSphere):
            r = cylinder_dcm_total(q, K.n, K.k, K.l, nodes)
        elif isinstance(eta, SubspaceCap):
            block = _block_subspace(K, eta.subspace)
            if block == "axis":
                r = cylinder_dcm_subspace(q, K.n, K.k, K.l, nodes)
            elif block == "complement":
                r = _cylinder_complement(q, K.n, K.k, K.l, nodes)
            else:
                raise EngineMismatch("closed forms cover only the two coordinate blocks of a cylinder")
        else:
            raise EngineMismatch("facet subsets do not apply to a cylinder")
        return MeasureEstimate(r.value, r.abs_error, "closed-form", float(q), body_id(K), eta.describe(), r.nodes_or_samples)
    raise EngineMismatch(f"no closed form for {type(K).__name__}")


# ---------------------------------------------------------- Monte Carlo


def _sphere_mc(K, eta: NormalSelection, q: float, samples: int, seed) -> MeasureEstimate:
    n = K.dim

    def f(U):
        mask = K.boundary_normal_mask(U, eta)
        out = np.zeros(len(U))
        if np.any(mask):
            out[mask] = K.radial_many(U[mask]) ** q / n
        return out

    r = mc_sphere_integrate(f, n, samples, seed)
    return MeasureEstimate(r.value, r.abs_error, "sphere-mc", float(q), body_id(K), eta.describe(), samples)


def _body_mc(K, eta: NormalSelection, q: float, samples: int, seed) -> MeasureEstimate:
    if not q > 0:
        raise ValueError("body Monte Carlo needs q > 0")
    n = K.dim
    full = isinstance(eta, FullSphere)

    def f(X):
        r2 = np.einsum("ij,ij->i", X, X)
        vals = (q / n) * np.power(np.maximum(r2, 1e-300), (q - n) / 2)
        if not full:
            nz = r2 > 0
            U = np.zeros_like(X)
            U[nz] = X[nz] / np.sqrt(r2[nz])[:, None]
            keep = np.zeros(len(X), dtype=bool)
            keep[nz] = K.boundary_normal_mask(U[nz], eta)
            vals = np.where(keep, vals, 0.0)
        return vals

    a = q if q < n else None
    r = mc_body_integrate(f, K, samples, seed, radial_exponent=a)
    return MeasureEstimate(r.value, r.abs_error, "body-mc", float(q), body_id(K), eta.describe(), samples)


# ------------------------------------------------------------ dispatcher


def _auto_engine(K, eta, q) -> str:
    if isinstance(K, (Ball, Cylinder)):
        if isinstance(K, Cylinder) and isinstance(eta, SubspaceCap) and _block_subspace(K, eta.subspace) is None:
            return "sphere-mc"
        if isinstance(K, Cylinder) and not q > 0:
            return "sphere-mc"
        return "closed-form"
    if isinstance(K, Polytope) and q > 0:
        return "facet-exact"
    return "sphere-mc"


def dual_curvature(
    K: ConvexBody,
    eta: NormalSelection | None = None,
    q: float = 1.0,
    engine: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed=None,
    degree: int = DEFAULT_DEGREE,
    nodes: int = DEFAULT_GL_NODES,
) -> MeasureEstimate:
    """Dual curvature measure ``C_q(K, eta)``.

    Parameters
    ----------
    K : ConvexBody
        Origin-symmetric body with nonempty interior.
    eta : NormalSelection, optional
        Set of normals; defaults to the full sphere.
    q : float
        Real exponent. Body-based engines need ``q > 0``.
    engine : {"auto", "closed-form", "facet-exact", "sphere-mc", "body-mc"}
        ``auto`` picks the closed form for balls and cylinders, the facet
        sum for polytopes and the sphere integral otherwise.

    Returns
    -------
    MeasureEstimate
    """
    eta = FullSphere() if eta is None else eta
    q = float(q)
    if not np.isfinite(q):
        raise ValueError("q must be finite")
    engine = normalize_engine(engine)
    if engine == "auto":
        engine = _auto_engine(K, eta, q)
    if isinstance(eta, FacetSubset) and not isinstance(K, Polytope):
        raise EngineMismatch("facet subsets need a polytope")
    if engine == "closed-form":
        return _closed_form(K, eta, q, nodes)
    if engine == "facet-exact":
        return _facet_measure(K, eta, q, degree)
    if isinstance(K, Polytope) and isinstance(eta, FacetSubset):
        K = _facet_form(K)
    if engine == "sphere-mc":
        return _sphere_mc(K, eta, q, samples, seed)
    if engine == "body-mc":
        if q == 0:
            raise EngineMismatch("q = 0 needs the sphere-mc engine")
        return _body_mc(K, eta, q, samples, seed)
    raise AssertionError(engine)


def cone_volume_measure(P, eta: NormalSelection | None = None) -> MeasureEstimate:
    """Cone-volume measure ``sum_{u_i in eta} h_i vol(F_i) / n`` (exact)."""
    P = _facet_form(P)
    eta = FullSphere() if eta is None else eta
    mask = eta.facet_mask(P)
    areas = np.array([f.area for f in P.facets])
    terms = P.offsets * areas / P.dim
    value = float(np.sum(terms[mask]))
    return MeasureEstimate(value, 1e-14 * max(value, 1.0), "facet-exact", float(P.dim), body_id(P), eta.describe(), 0)


def dual_quermassintegral(K: ConvexBody, i: int, engine: str = "auto", **kw) -> MeasureEstimate:
    """``W_{n-i}(K) = C_i(K, S^{n-1})``."""
    if not 0 <= i <= K.dim:
        raise ValueError(f"index must lie in 0..{K.dim}")
    return dual_curvature(K, FullSphere(), float(i), engine, **kw)


# ----------------------------------------------------------------- moments


def _cone_profile(a, d: float, k: int, p: float):
    """``integral_0^1 r^(k-1) (d^2 + r^2 a^2)^(p/2) dr``."""
    # d^p/k 2F1(-p/2, k/2; k/2+1; -x) with x = a^2/d^2, Pfaff-transformed so
    # the argument x/(1+x) stays in [0, 1); scipy is unreliable for large -x.
    a = np.asarray(a, dtype=float)
    if d == 0.0:
        return np.power(a, p) / (p + k)
    x = (a / d) ** 2
    return np.power(d * d + a * a, p / 2) / k * hyp2f1(-p / 2, 1.0, k / 2 + 1, x / (1 + x))


def moment_integral(K, p: float, engine: str = "auto", degree: int = DEFAULT_DEGREE, samples=DEFAULT_SAMPLES, seed=None) -> MeasureEstimate:
    """``M_p(K) = integral over K of |x|^p`` against k-dimensional measure.

    K may be lower-dimensional; the norm is the ambient one. Polytopes are
    cut into cones from the point ``c`` of their affine hull closest to the
    origin. On the cone over a chart facet with signed height ``h_e`` the
    radial integral has the closed form ``(d^p/k) 2F1(-p/2, k/2; k/2+1;
    -|z|^2/d^2)`` with ``d = |c|``; the remaining facet integral uses the
    simplex rules, and is exact for segments.
    """
    if not p >= 0:
        raise ValueError("p must be non-negative")
    p = float(p)
    engine = "exact" if engine == "auto" else engine
    if isinstance(K, Ball) and engine in ("exact", "closed-form"):
        n = K.n
        v = n * omega(n) * K.r ** (n + p) / (n + p)
        return MeasureEstimate(v, 0.0, "closed-form", p, body_id(K), {}, 0)
    if engine == "body-mc" or not isinstance(K, Polytope):
        if not getattr(K, "full_dimensional", True):
            raise EngineMismatch("Monte Carlo moments need a full-dimensional body")
        r = mc_body_integrate(
            lambda X: np.power(np.linalg.norm(X, axis=1), p), K, samples, seed
        )
        return MeasureEstimate(r.value, r.abs_error, "body-mc", p, body_id(K), {}, samples)
    if engine != "exact":
        raise EngineMismatch(f"unknown moment engine {engine!r}")
    return _polytope_moment(K, p, degree)


def _polytope_moment(K: Polytope, p: float, degree: int) -> MeasureEstimate:
    base, B = K.chart
    k = B.shape[1]
    d = float(np.linalg.norm(base))
    if k == 0:
        return MeasureEstimate(d**p, 0.0, "closed-form", p, body_id(K), {}, 1)
    coords = (K.vertices - base) @ B
    facets = K.chart_facets
    simp, owner, heights = [], [], []
    for j, hf in enumerate(facets):
        pts = coords[hf.vertices]
        faces = _local_faces(hf) if hf.faces is not None else None
        tri = triangulate_facet(SimpleNamespace(vertices=pts, normal=hf.normal, faces=faces))
        simp.extend(tri)
        owner.extend([j] * len(tri))
        heights.append(hf.offset)
    simp = np.array(simp)
    vals, errs = integrate_grouped(
        lambda Z: _cone_profile(np.sqrt(np.einsum("...i,...i->...", Z, Z)), d, k, p),
        simp,
        np.array(owner),
        len(facets),
        degree,
    )
    h = np.array(heights)
    value = float(np.sum(h * vals))
    err = float(np.sum(np.abs(h) * errs)) + 1e-15 * abs(value)
    engine = "closed-form" if k == 1 else "facet-exact"
    return MeasureEstimate(value, err, engine, p, body_id(K), {}, len(simp))


# -------------------------------------------------------- concentration


BOUND_KINDS = ("q>=n+1", "q=n", "0<q<n", "planar q>2", "parallelotope", "none")


def is_parallelotope(K) -> bool:
    return isinstance(K, (Parallelotope, Box)) or getattr(K, "tag", "") in ("parallelotope", "box")


def concentration_bound(n: int, dim_L: int, q: float, parallelotope: bool = False):
    """Upper bound for the subspace concentration ratio and its kind.

    The open band ``n < q < n+1`` (n >= 3) has no bound for general bodies;
    it reports kind ``none`` with the trivial bound 1. Parallelotopes keep
    ``(q - n + dim L) / q`` for every ``q > n``.
    """
    if not q > 0:
        raise ValueError("bounds are defined for q > 0")
    if not 1 <= dim_L <= n - 1:
        raise ValueError("subspace dimension must lie in 1..n-1")
    if q == n:
        return dim_L / n, "q=n"
    if q < n:
        return min(dim_L / q, 1.0), "0<q<n"
    if n == 2:
        return (q - 1) / q, "planar q>2"
    if q >= n + 1:
        return (q - n + dim_L) / q, "q>=n+1"
    if parallelotope:
        return (q - n + dim_L) / q, "parallelotope"
    return 1.0, "none"


def ratio_report(sub: MeasureEstimate, tot: MeasureEstimate, n: int, dim_L: int, q: float, parallelotope=False) -> RatioReport:
    if not tot.value > 0:
        raise ValueError("total measure vanishes; ratio undefined")
    ratio = sub.value / tot.value
    err = ratio * tot.abs_error / tot.value + sub.abs_error / tot.value
    bound, kind = concentration_bound(n, dim_L, q, parallelotope)
    margin = bound - ratio
    ok = margin >= -(BOUND_TOL + 3 * err)
    return RatioReport(float(ratio), float(bound), kind, bool(ok), float(margin), float(err), sub, tot)


def subspace_concentration_ratio(
    K: ConvexBody,
    L: Subspace,
    q: float,
    engine: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed=None,
    degree: int = DEFAULT_DEGREE,
) -> RatioReport:
    """``C_q(K, S^{n-1} ∩ L) / C_q(K, S^{n-1})`` with its bound.

    Numerator and denominator use the same engine (and the same random
    stream for Monte Carlo engines).
    """
    if L.n != K.dim:
        raise ValueError("subspace and body live in different dimensions")
    engine = normalize_engine(engine)
    cap = SubspaceCap(L)
    if engine == "auto":
        engine = _auto_engine(K, cap, q)
    if engine == "facet-exact":
        P = _facet_form(K)
        vals, errs = facet_values(P, q, degree)
        mask = cap.facet_mask(P)
        nodes = _node_count(P)
        sub = MeasureEstimate(float(vals[mask].sum()), float(errs[mask].sum()), engine, float(q), body_id(K), cap.describe(), nodes)
        tot = MeasureEstimate(float(vals.sum()), float(errs.sum()), engine, float(q), body_id(K), {"kind": "all"}, nodes)
    else:
        seed = as_seed(seed)
        kw = dict(engine=engine, samples=samples, seed=seed, degree=degree)
        sub = dual_curvature(K, cap, q, **kw)
        tot = dual_curvature(K, FullSphere(), q, **kw)
    return ratio_report(sub, tot, K.dim, L.dim, q, is_parallelotope(K))


# ------------------------------------------------------------- cylinders


def _cylinder_prefactor(q, n, k):
    return (q / n) * k * omega(k) * (n - k) * omega(n - k)


def _t_breaks(l: float):
    # The factor (1 + t^2/l^2) varies on the scale t ~ l; for l < 1 split
    # [0, 1] geometrically so every panel sees a smooth integrand.
    if l >= 1:
        return [0.0, 1.0]
    pts = [0.0]
    x = l
    while x < 1:
        pts.append(x)
        x *= 4
    return pts + [1.0]


def _lateral_integral(q, n, k, l, nodes) -> QuadratureResult:
    """``integral_0^1 integral_0^1 s^(q-1) t^(n-k-1) (1 + t^2/l^2)^((q-n)/2) dt ds``.

    The substitution ``sigma = s^q`` removes the (possibly singular) power
    of s; the rule runs on the sigma-t square, panelled in t.
    """
    def f(sig, t):
        return np.power(t, n - k - 1) * np.power(1 + (t / l) ** 2, (q - n) / 2) / q

    total, err, cnt = 0.0, 0.0, 0
    breaks = _t_breaks(l)
    for a, b in zip(breaks[:-1], breaks[1:]):
        r = gauss_legendre_2d(f, nodes, box=((0.0, 1.0), (a, b)))
        total += r.value
        err += r.abs_error
        cnt += r.nodes_or_samples
    return QuadratureResult(total, err, cnt, "gauss-legendre")


def _check_cyl(q, n, k, l):
    if not q > 0:
        raise ValueError("q must be positive")
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    if not l > 0:
        raise ValueError("l must be positive")


def cylinder_dcm_subspace(q: float, n: int, k: int, l: float, nodes: int = DEFAULT_GL_NODES) -> MeasureEstimate:
    """``C_q(K_l, S ∩ L)`` for ``K_l = (l B_k) x B_{n-k}`` and L the first-k block.

    Equals ``c l^(q-n+k) integral s^(q-1) t^(n-k-1) (1 + t^2/l^2)^((q-n)/2)``
    over the unit square, ``c = (q/n) k omega_k (n-k) omega_{n-k}``.
    """
    _check_cyl(q, n, k, l)
    r = _lateral_integral(q, n, k, l, nodes)
    scale = _cylinder_prefactor(q, n, k) * l ** (q - n + k)
    sel = {"kind": "subspace", "block": "axis", "k": k}
    return MeasureEstimate(scale * r.value, scale * r.abs_error, "closed-form", float(q), f"cylinder(n={n}, k={k}, l={l!r})", sel, r.nodes_or_samples)


def _cylinder_complement(q, n, k, l, nodes) -> MeasureEstimate:
    # After swapping the blocks, K_l = l * ((1/l) B_{n-k} x B_k).
    r = cylinder_dcm_subspace(q, n, n - k, 1.0 / l, nodes)
    f = l**q
    sel = {"kind": "subspace", "block": "complement", "k": n - k}
    return MeasureEstimate(f * r.value, f * r.abs_error, "closed-form", float(q), f"cylinder(n={n}, k={k}, l={l!r})", sel, r.nodes_or_samples)


def cylinder_dcm_total(q: float, n: int, k: int, l: float, nodes: int = DEFAULT_GL_NODES, method: str = "blocks") -> MeasureEstimate:
    """``C_q(K_l, S^{n-1})``.

    ``method="blocks"`` adds the lateral and cap contributions (both smooth
    one-block integrals); ``method="direct"`` evaluates
    ``c l^(q-n+k) integral s^(k-1) t^(n-k-1) (s^2 + t^2/l^2)^((q-n)/2)`` on
    the unit square, which is accurate only when the integrand is smooth
    at the origin.
    """
    _check_cyl(q, n, k, l)
    bid = f"cylinder(n={n}, k={k}, l={l!r})"
    if method == "blocks":
        a = cylinder_dcm_subspace(q, n, k, l, nodes)
        b = _cylinder_complement(q, n, k, l, nodes)
        return MeasureEstimate(a.value + b.value, a.abs_error + b.abs_error, "closed-form", float(q), bid, {"kind": "all"}, a.nodes_or_samples + b.nodes_or_samples)
    if method != "direct":
        raise ValueError("method must be 'blocks' or 'direct'")
    r = gauss_legendre_2d(
        lambda s, t: np.power(s, k - 1) * np.power(t, n - k - 1) * np.power(s * s + (t / l) ** 2, (q - n) / 2), nodes
    )
    scale = _cylinder_prefactor(q, n, k) * l ** (q - n + k)
    return MeasureEstimate(scale * r.value, scale * r.abs_error, "closed-form", float(q), bid, {"kind": "all"}, r.nodes_or_samples)


def cylinder_ratio_limit(q: float, n: int, k: int) -> float:
    """Limit ``(q - n + k) / q`` of the cylinder concentration ratio as l grows."""
    if not q > n:
        raise ValueError("the limit is stated for q > n")
    return (q - n + k) / q


def cylinder_ratio(q: float, n: int, k: int, l: float, nodes: int = DEFAULT_GL_NODES) -> RatioReport:
    sub = cylinder_dcm_subspace(q, n, k, l, nodes)
    tot = cylinder_dcm_total(q, n, k, l, nodes)
    return ratio_report(sub, tot, n, k, q)
