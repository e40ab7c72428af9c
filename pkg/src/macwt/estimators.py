"""Thin scikit-learn style wrappers around region membership and rate splitting.

Rows of ``X`` are rate tuples ``(R1s, R1o, R2s, R2o, ...)`` in axis order.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .channel import check_inputs, mi_bundle, uniform_inputs
from .polytope import FLOAT_TOL, RateTuple, vertices
from .regions import RegionKind, build_region
from .splitmap import classify, transform


def _bundle(channel, inputs):
    px = uniform_inputs(channel.input_sizes) if inputs is None else check_inputs(channel, inputs)
    return mi_bundle(channel, px)


class SecrecyRateRegion(BaseEstimator):
    """Membership test for one of the rate regions of a fixed channel and input law."""

    def __init__(self, kind="theorem1", eps=0.0, num_users=None, tol=FLOAT_TOL):
        self.kind = kind
        self.eps = eps
        self.num_users = num_users
        self.tol = tol

    def fit(self, channel, inputs=None):
        self.mi_ = _bundle(channel, inputs)
        self.region_ = build_region(RegionKind(self.kind), self.mi_, self.eps, self.num_users)
        self.axes_ = self.region_.axes
        self.n_features_in_ = len(self.axes_)
        self.vertices_ = np.array([[float(v[a]) for a in self.axes_] for v in vertices(self.region_)])
        return self

    def _rows(self):
        a = np.array([[float(c) for c in coef] for coef, _ in self.region_.rows])
        b = np.array([float(rhs) for _, rhs in self.region_.rows])
        return a, b

    def decision_function(self, X):
        """Smallest slack over all inequalities; nonnegative inside the region."""
        check_is_fitted(self, "region_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} rate coordinates, got {X.shape[1]}")
        a, b = self._rows()
        return (b[None, :] - X @ a.T).min(axis=1)

    def predict(self, X):
        return self.decision_function(X) >= -self.tol


class RateSplitter(BaseEstimator):
    """Maps tuples of the three-family region into the open-rate-capped region.

    ``fit`` takes the channel, not rate data, so there is no ``fit_transform``.
    """

    def fit(self, channel, inputs=None):
        self.mi_ = _bundle(channel, inputs)
        self.n_features_in_ = 4
        return self

    def _tuples(self, X):
        check_is_fitted(self, "mi_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 4:
            raise ValueError(f"expected 4 rate coordinates, got {X.shape[1]}")
        return [RateTuple.from_sequence(("R1s", "R1o", "R2s", "R2o"), row) for row in X]

    def transform(self, X):
        reports = [transform(t, self.mi_) for t in self._tuples(X)]
        return np.array([[float(v) for v in r.output.aligned(("R1s", "R1o", "R2s", "R2o"))] for r in reports])

    def category(self, X):
        return np.array([classify(t, self.mi_) for t in self._tuples(X)], dtype=int)
