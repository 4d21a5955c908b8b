"""scikit-learn style wrappers.

``ExpanderCDOFamily`` maps lemon placements to per-CDO lemon-count
histograms and ``TrancheValuer`` maps histograms to tranche totals, so
``make_pipeline(ExpanderCDOFamily(...), TrancheValuer(...))`` values a batch
of placements in one call.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cdo_model import TrancheSpec, totals_from_counts, validate_model, value_profile
from .expander import build_cdo_graph, verify_expansion
from .validation import check_histograms, check_placements


class ExpanderCDOFamily(TransformerMixin, BaseEstimator):
    """Build a certified biregular CDO family; transform placements to lemon counts.

    Parameters
    ----------
    alpha : float
        Trade-off exponent in (0, 1]; the power base is ``ceil(q ** alpha)``.
    n, m : int
        Number of assets and of CDOs.
    d, r : int
        Left degree (CDOs per asset) and right degree (assets per CDO).
    mode : {"direct", "theorem"}
        Parameter schedule used by the construction.
    """

    def __init__(self, alpha=0.5, n=16, m=16, d=4, r=4, mode="direct"):
        self.alpha = alpha
        self.n = n
        self.m = m
        self.d = d
        self.r = r
        self.mode = mode

    def fit(self, X=None, y=None):
        self.graph_, self.certificate_ = build_cdo_graph(
            self.alpha, self.n, self.m, self.d, self.r, self.mode)
        self.n_features_in_ = self.n
        self.adjacency_matrix_ = self.graph_.to_matrix()
        return self

    def transform(self, X):
        check_is_fitted(self, "graph_")
        X = check_placements(X, self.n)
        hits = X @ self.adjacency_matrix_
        t = np.zeros((X.shape[0], self.r + 1), dtype=np.int64)
        for i in range(self.r + 1):
            t[:, i] = (hits == i).sum(axis=1)
        return t

    def verify(self, k_max=None, gamma=None, mode="neighbor"):
        """Exhaustively check the certified guarantee (defaults from the certificate)."""
        check_is_fitted(self, "graph_")
        cert = self.certificate_
        k = cert.k_max_thm if k_max is None else k_max
        if gamma is None:
            gamma = cert.gamma if mode == "neighbor" else cert.gamma_unique
        return verify_expansion(self.graph_, k, gamma, mode)


class TrancheValuer(TransformerMixin, BaseEstimator):
    """Expected tranche totals from lemon-count histograms.

    Parameters
    ----------
    model : AssetModel
    attachment_points : sequence of float
        ``0 = a_0 < ... < a_s = r``; the CDO size ``r`` is the last point.
    """

    def __init__(self, model=None, attachment_points=(0, 1, 2)):
        self.model = model
        self.attachment_points = attachment_points

    def fit(self, X=None, y=None):
        if self.model is None:
            raise ValueError("TrancheValuer needs an asset model")
        tranches = TrancheSpec(tuple(float(a) for a in self.attachment_points))
        r = int(round(tranches.size))
        self.tranches_ = tranches
        self.profile_ = value_profile(self.model, tranches, r)
        self.dominance_ = validate_model(self.model)
        self.n_features_in_ = r + 1
        return self

    def transform(self, X):
        check_is_fitted(self, "profile_")
        t = check_histograms(X, self.profile_.r)
        return totals_from_counts(t, self.profile_)
