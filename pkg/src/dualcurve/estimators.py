"""scikit-learn style wrappers turning bodies into measure features.

The wrappers hold no fitted state beyond bookkeeping; they exist so that
dual curvature values can sit inside a :class:`sklearn.pipeline.Pipeline`.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bodyspec import parse_body
from .geometry.bodies import ConvexBody
from .geometry.selection import Subspace, SubspaceCap
from .measures import dual_curvature, subspace_concentration_ratio


def _bodies(X):
    return [x if isinstance(x, ConvexBody) else parse_body(x) for x in X]


class DualCurvatureFeatures(TransformerMixin, BaseEstimator):
    """One column of ``C_q(K, eta)`` per q.

    Parameters
    ----------
    qs : tuple of float
        Exponents, one output column each.
    subspace : array_like or None
        Rows spanning L; the measure of ``S^{n-1} ∩ L`` is used instead of
        the total mass when given.
    engine, samples, seed, degree
        Passed to :func:`dualcurve.measures.dual_curvature`.
    """

    def __init__(self, qs=(1.0, 2.0, 3.0), subspace=None, engine="auto", samples=200_000, seed=0, degree=10):
        self.qs = qs
        self.subspace = subspace
        self.engine = engine
        self.samples = samples
        self.seed = seed
        self.degree = degree

    def fit(self, X, y=None):
        self.n_features_out_ = len(self.qs)
        return self

    def _eta(self):
        return None if self.subspace is None else SubspaceCap(Subspace.span(self.subspace))

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        eta = self._eta()
        out = np.empty((len(X), len(self.qs)))
        for i, K in enumerate(_bodies(X)):
            for j, q in enumerate(self.qs):
                est = dual_curvature(K, eta, q, self.engine, samples=self.samples, seed=self.seed, degree=self.degree)
                out[i, j] = est.value
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array([f"dcm_q{q:g}" for q in self.qs], dtype=object)


class ConcentrationRatioFeatures(TransformerMixin, BaseEstimator):
    """Subspace concentration ratio and bound margin per body (two columns)."""

    def __init__(self, subspace=((1.0, 0.0, 0.0),), q=4.0, engine="auto", samples=200_000, seed=0, degree=10):
        self.subspace = subspace
        self.q = q
        self.engine = engine
        self.samples = samples
        self.seed = seed
        self.degree = degree

    def fit(self, X, y=None):
        self.n_features_out_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        L = Subspace.span(self.subspace)
        rows = []
        for K in _bodies(X):
            r = subspace_concentration_ratio(K, L, self.q, self.engine, samples=self.samples, seed=self.seed, degree=self.degree)
            rows.append((r.ratio, r.margin))
        return np.array(rows, dtype=float).reshape(-1, 2)

    def get_feature_names_out(self, input_features=None):
        return np.array(["ratio", "margin"], dtype=object)
