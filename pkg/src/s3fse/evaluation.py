"""Classification, accuracy metrics, and the reference projections."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.spatial.distance import cdist

from .data import MultiViewDataset, ViewMatrix
from .exceptions import InvalidInputError, UndefinedMetricError
from .solver import ProjectionMatrix, S3FSEConfig, fit_projection, fix_signs


def knn_classify(train_embed, train_labels, test_embed, k_cls: int = 5) -> np.ndarray:
    """Majority vote among the ``k_cls`` nearest training embeddings.

    Training points tied with the ``k_cls``-th distance all join the vote,
    so the result does not depend on training order. Vote ties go to the
    smallest class id.
    """
    train_embed = np.atleast_2d(np.asarray(train_embed, dtype=np.float64))
    test_embed = np.atleast_2d(np.asarray(test_embed, dtype=np.float64))
    y = np.asarray(train_labels)
    n_tr = train_embed.shape[0]
    if n_tr == 0:
        raise InvalidInputError("training set is empty")
    if not 1 <= k_cls <= n_tr:
        raise InvalidInputError(f"k_cls must lie in [1, {n_tr}], got {k_cls}")
    if y.shape[0] != n_tr:
        raise InvalidInputError("train_labels length does not match train_embed")
    if test_embed.shape[1] != train_embed.shape[1]:
        raise InvalidInputError("train and test embeddings differ in dimension")
    classes, y_idx = np.unique(y, return_inverse=True)
    if test_embed.shape[0] == 0:
        return np.empty(0, dtype=y.dtype)
    D = cdist(test_embed, train_embed, metric="sqeuclidean")
    kth = np.partition(D, k_cls - 1, axis=1)[:, k_cls - 1:k_cls]
    inside = D <= kth
    votes = np.zeros((D.shape[0], classes.size), dtype=np.int64)
    for c in range(classes.size):
        votes[:, c] = inside[:, y_idx == c].sum(axis=1)
    # argmax returns the first maximum, i.e. the smallest class id
    return classes[np.argmax(votes, axis=1)]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes ``1..C``, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InvalidInputError("confusion matrix must be square")
        if np.any(counts < 0) or not np.all(counts == np.round(counts)):
            raise InvalidInputError("confusion counts must be nonnegative integers")
        counts = counts.astype(np.int64)
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise InvalidInputError("y_true and y_pred differ in length")
    C = n_classes or int(max(y_true.max(initial=0), y_pred.max(initial=0)))
    if y_true.size and (min(y_true.min(), y_pred.min()) < 1 or max(y_true.max(), y_pred.max()) > C):
        raise InvalidInputError(f"class ids must lie in [1, {C}]")
    counts = np.zeros((C, C), dtype=np.int64)
    np.add.at(counts, (y_true - 1, y_pred - 1), 1)
    return ConfusionMatrix(counts)


def _check_nonempty(cm: ConfusionMatrix):
    if cm.counts.size == 0 or cm.total == 0:
        raise InvalidInputError("confusion matrix is empty")


def overall_accuracy(cm: ConfusionMatrix, exact: bool = False):
    _check_nonempty(cm)
    po = Fraction(int(np.trace(cm.counts)), cm.total)
    return po if exact else float(po)


def chance_agreement(cm: ConfusionMatrix, exact: bool = False):
    """Expected agreement ``p_e`` from the row and column marginals."""
    _check_nonempty(cm)
    rows = cm.counts.sum(axis=1)
    cols = cm.counts.sum(axis=0)
    pe = Fraction(int(np.dot(rows, cols)), cm.total**2)
    return pe if exact else float(pe)


def kappa(cm: ConfusionMatrix, exact: bool = False):
    """Cohen's kappa ``(p_o - p_e) / (1 - p_e)``.

    With ``exact=True`` the value is a ``Fraction`` computed from the
    integer counts.
    """
    po = overall_accuracy(cm, exact=True)
    pe = chance_agreement(cm, exact=True)
    if pe == 1:
        raise UndefinedMetricError("kappa is undefined when chance agreement is 1")
    k = (po - pe) / (1 - pe)
    return k if exact else float(k)


def class_accuracies(cm: ConfusionMatrix) -> np.ndarray:
    """Producer's accuracy per true class; NaN where a class has no samples."""
    rows = cm.counts.sum(axis=1)
    out = np.full(cm.n_classes, np.nan)
    nz = rows > 0
    out[nz] = np.diag(cm.counts)[nz] / rows[nz]
    return out


def colgp_fit(ds: MultiViewDataset, cfg: S3FSEConfig = S3FSEConfig()) -> ProjectionMatrix:
    """Local-geometry-only projection: one solve with alpha = beta = 0."""
    P, _ = fit_projection(ds, replace(cfg, alpha=0.0, beta=0.0, max_iter=1))
    return P


@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray
    loadings: np.ndarray
    explained_variance: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.loadings


def pca_fit(stacked, d: int) -> PCAModel:
    """Top-``d`` principal loadings of the mean-centered matrix.

    Computed by SVD. Components beyond the numerical rank are dropped with a
    warning. Each loading's largest-magnitude entry is positive.
    """
    X = stacked.values if isinstance(stacked, ViewMatrix) else np.asarray(stacked, dtype=np.float64)
    n, m = X.shape
    if not 1 <= d <= m:
        raise InvalidInputError(f"need 1 <= d <= {m}, got {d}")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=False)
    var = s**2 / n
    tol = s.max(initial=0.0) * max(n, m) * np.finfo(float).eps
    rank = int(np.sum(s > tol))
    if d > rank:
        warnings.warn(f"requested d={d} exceeds data rank {rank}; returning {rank} components")
        d = max(rank, 1) if rank else 0
    return PCAModel(mean, fix_signs(Vt[:d].T), var[:d])
