"""scikit-learn estimators wrapping the projection learners.

The transformers accept either one stacked array with ``view_dims`` or a
list of per-view arrays, so they drop into a ``Pipeline``::

    pipe = make_pipeline(S3FSE(n_components=3, view_dims=[30, 20, 25]),
                         KNNClassifier(n_neighbors=5))
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_labels, check_multiview
from .evaluation import colgp_fit, knn_classify, pca_fit
from .solver import S3FSEConfig, fit_projection, project, row_support


class _ProjectionTransformer(TransformerMixin, BaseEstimator):
    """Shared transform/support logic for the multi-view projections."""

    def _set_fitted(self, ds):
        self.view_dims_ = ds.view_dims
        self.n_features_in_ = sum(ds.view_dims)
        self.components_ = self.projection_.total.T

    def transform(self, X):
        check_is_fitted(self, "projection_")
        return project(check_multiview(X, self.view_dims_), self.projection_)

    def support(self, tau=1e-6):
        """Per-view selected features and sparsity of the fitted projection."""
        check_is_fitted(self, "projection_")
        return row_support(self.projection_, tau)


class S3FSE(_ProjectionTransformer):
    """Multi-view projection with joint feature selection and extraction.

    Parameters
    ----------
    n_components : int, default=10
        Dimensionality ``d`` of the shared subspace.
    alpha : float, default=0.1
        Weight of the supervised cross-view term.
    beta : float, default=0.01
        Weight of the l2,1 row-sparsity term.
    n_neighbors : int, default=5
        Neighbors per sample in each view's heat-kernel graph.
    kernel_width : float, default=1.0
        Heat-kernel width ``t``.
    max_iter : int, default=30
    tol : float, default=1e-6
        Stop once the relative objective change falls below ``tol``.
    eps_row : float, default=1e-8
        Floor on row norms when reweighting.
    ridge : float, default=1e-6
        Added to ``X'X`` to make the constraint definite.
    sparsity_tol : float, default=1e-6
        Row-norm threshold below which a feature counts as discarded.
    view_dims : sequence of int, optional
        Column counts of the views when ``X`` is a stacked array.
    random_state : int, default=0
        Seed for the random initial projection.

    Attributes
    ----------
    projection_ : ProjectionMatrix
    components_ : ndarray of shape (n_components, n_features)
    trace_ : SolveTrace
    n_iter_ : int
    converged_ : bool
    classes_ : ndarray
    view_dims_ : tuple of int
    """

    def __init__(
        self,
        n_components=10,
        alpha=0.1,
        beta=0.01,
        n_neighbors=5,
        kernel_width=1.0,
        max_iter=30,
        tol=1e-6,
        eps_row=1e-8,
        ridge=1e-6,
        sparsity_tol=1e-6,
        view_dims=None,
        random_state=0,
    ):
        self.n_components = n_components
        self.alpha = alpha
        self.beta = beta
        self.n_neighbors = n_neighbors
        self.kernel_width = kernel_width
        self.max_iter = max_iter
        self.tol = tol
        self.eps_row = eps_row
        self.ridge = ridge
        self.sparsity_tol = sparsity_tol
        self.view_dims = view_dims
        self.random_state = random_state

    def _config(self) -> S3FSEConfig:
        return S3FSEConfig(
            alpha=self.alpha, beta=self.beta, d=self.n_components, k=self.n_neighbors,
            t=self.kernel_width, max_iter=self.max_iter, tol=self.tol, eps_row=self.eps_row,
            ridge=self.ridge, sparsity_tol=self.sparsity_tol, seed=self.random_state,
        )

    def fit(self, X, y):
        ds = check_multiview(X, self.view_dims)
        labels, self.classes_ = check_labels(y, ds.n)
        self.projection_, self.trace_ = fit_projection(ds, self._config(), labels)
        self._set_fitted(ds)
        self.n_iter_ = self.trace_.iterations
        self.converged_ = self.trace_.converged
        return self

    def support(self, tau=None):
        return super().support(self.sparsity_tol if tau is None else tau)


class CoLGP(_ProjectionTransformer):
    """Local-geometry-only multi-view projection; labels are ignored."""

    def __init__(self, n_components=10, n_neighbors=5, kernel_width=1.0, ridge=1e-6,
                 view_dims=None):
        self.n_components = n_components
        self.n_neighbors = n_neighbors
        self.kernel_width = kernel_width
        self.ridge = ridge
        self.view_dims = view_dims

    def fit(self, X, y=None):
        ds = check_multiview(X, self.view_dims)
        cfg = S3FSEConfig(d=self.n_components, k=self.n_neighbors, t=self.kernel_width,
                          ridge=self.ridge)
        self.projection_ = colgp_fit(ds, cfg)
        self._set_fitted(ds)
        return self


class StackedPCA(TransformerMixin, BaseEstimator):
    """PCA on the column-stacked views."""

    def __init__(self, n_components=10):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.model_ = pca_fit(X, self.n_components)
        self.components_ = self.model_.loadings.T
        self.mean_ = self.model_.mean
        self.explained_variance_ = self.model_.explained_variance
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return self.model_.transform(check_array(X, dtype=np.float64))


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """Euclidean k-nearest-neighbor vote, ties to the smallest class label."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        self.X_ = check_array(X, dtype=np.float64)
        self.y_ = np.asarray(y)
        self.classes_ = np.unique(self.y_)
        self.n_features_in_ = self.X_.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        return knn_classify(self.X_, self.y_, check_array(X, dtype=np.float64), self.n_neighbors)
