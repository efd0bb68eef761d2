"""Linear subspaces and the sets of unit normals the measures are evaluated on."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUBSPACE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Subspace:
    """Proper linear subspace given by an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        n, k = B.shape
        if not 1 <= k <= n - 1:
            raise ValueError(f"subspace dimension must lie in 1..{n - 1}, got {k}")
        if np.max(np.abs(B.T @ B - np.eye(k))) > 1e-10:
            raise ValueError("basis columns must be orthonormal")
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors) -> "Subspace":
        """Subspace spanned by the given vectors (rows), orthonormalized."""
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        _, s, vt = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(s.max(), 1e-300)))
        return cls(vt[:rank].T)

    @classmethod
    def axes(cls, n: int, indices) -> "Subspace":
        """Coordinate subspace spanned by ``e_i`` for the given 0-based indices."""
        return cls(np.eye(n)[:, sorted(set(int(i) for i in indices))])

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, X):
        return (np.atleast_2d(X) @ self.basis) @ self.basis.T

    def distance(self, X):
        X = np.atleast_2d(X)
        return np.linalg.norm(X - self.project(X), axis=1)

    def contains(self, X, tol: float = SUBSPACE_TOL):
        X = np.atleast_2d(X)
        return self.distance(X) <= tol * np.maximum(np.linalg.norm(X, axis=1), 1e-300)

    def complement(self) -> "Subspace":
        from .hull import orthogonal_complement

        return Subspace(orthogonal_complement(self.basis))

    def rotated(self, R) -> "Subspace":
        return Subspace(np.asarray(R, dtype=float) @ self.basis)

    def __eq__(self, other):
        return isinstance(other, Subspace) and np.array_equal(self.basis, other.basis)

    __hash__ = None


class NormalSelection:
    """A Borel set of unit normals; three concrete variants are supported."""

    def facet_mask(self, P) -> np.ndarray:
        raise NotImplementedError

    def contains_directions(self, U, tol=SUBSPACE_TOL) -> np.ndarray:
        raise NotImplementedError

    def contains_cone(self, N1, N2, tol=SUBSPACE_TOL) -> np.ndarray:
        """Whether the cone spanned by rows of N1 and N2 meets the selection."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FullSphere(NormalSelection):
    def facet_mask(self, P):
        return np.ones(len(P.facets), dtype=bool)

    def contains_directions(self, U, tol=SUBSPACE_TOL):
        return np.ones(len(U), dtype=bool)

    def contains_cone(self, N1, N2, tol=SUBSPACE_TOL):
        return np.ones(len(N1), dtype=bool)

    def describe(self):
        return {"kind": "all"}


@dataclass(frozen=True)
class FacetSubset(NormalSelection):
    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(set(int(i) for i in self.indices))))

    def facet_mask(self, P):
        mask = np.zeros(len(P.facets), dtype=bool)
        for i in self.indices:
            if not 0 <= i < len(P.facets):
                raise IndexError(f"facet index {i} out of range for {len(P.facets)} facets")
            mask[i] = True
        return mask

    def contains_directions(self, U, tol=SUBSPACE_TOL):
        raise TypeError("facet subsets only apply to polytopes")

    contains_cone = contains_directions

    def describe(self):
        return {"kind": "facets", "indices": list(self.indices)}


@dataclass(frozen=True, eq=False)
class SubspaceCap(NormalSelection):
    """``S^{n-1} ∩ L``."""

    subspace: Subspace

    def facet_mask(self, P):
        if P.dim != self.subspace.n:
            raise ValueError("subspace and body live in different dimensions")
        return self.subspace.distance(P.normals) <= SUBSPACE_TOL

    def contains_directions(self, U, tol=SUBSPACE_TOL):
        return self.subspace.distance(U) <= tol * np.linalg.norm(U, axis=1)

    def contains_cone(self, N1, N2, tol=SUBSPACE_TOL):
        L = self.subspace
        r1 = np.atleast_2d(N1) - L.project(N1)
        r2 = np.atleast_2d(N2) - L.project(N2)
        n1 = np.linalg.norm(N1, axis=1)
        n2 = np.linalg.norm(N2, axis=1)
        a = np.linalg.norm(r1, axis=1)
        b = np.linalg.norm(r2, axis=1)
        hit = (n1 > 0) & (a <= tol * np.maximum(n1, 1e-300))
        hit |= (n2 > 0) & (b <= tol * np.maximum(n2, 1e-300))
        # a*r1 + b*r2 = 0 with a, b > 0 needs antiparallel residuals
        anti = (a > 0) & (b > 0) & (np.einsum("ij,ij->i", r1, r2) <= -(1 - tol) * a * b)
        return hit | anti

    def describe(self):
        return {"kind": "subspace", "basis": self.subspace.basis.T.tolist()}
