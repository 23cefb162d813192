"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .data import LabelVector, MultiViewDataset, ViewMatrix
from .exceptions import InvalidInputError


def check_multiview(X, view_dims=None, names=None) -> MultiViewDataset:
    """Coerce ``X`` into a label-free MultiViewDataset.

    ``X`` may be a MultiViewDataset, a list of per-view arrays, or one
    stacked 2-D array that ``view_dims`` partitions column-wise (a single
    view when ``view_dims`` is None).
    """
    if isinstance(X, MultiViewDataset):
        ds = MultiViewDataset(X.views)
    elif isinstance(X, (list, tuple)) and X and not np.isscalar(X[0]) and np.ndim(X[0]) == 2:
        views = []
        for i, Xv in enumerate(X):
            arr = Xv.values if isinstance(Xv, ViewMatrix) else check_array(Xv, dtype=np.float64)
            name = Xv.name if isinstance(Xv, ViewMatrix) else (names[i] if names else f"view{i}")
            views.append(ViewMatrix(name, arr))
        ds = MultiViewDataset(tuple(views))
    else:
        arr = check_array(X, dtype=np.float64)
        dims = (arr.shape[1],) if view_dims is None else tuple(int(d) for d in view_dims)
        if sum(dims) != arr.shape[1]:
            raise InvalidInputError(
                f"view_dims {dims} sum to {sum(dims)}, X has {arr.shape[1]} columns"
            )
        off = np.concatenate([[0], np.cumsum(dims)])
        ds = MultiViewDataset(tuple(
            ViewMatrix(names[i] if names else f"view{i}", arr[:, off[i]:off[i + 1]])
            for i in range(len(dims))
        ))
    if view_dims is not None and tuple(ds.view_dims) != tuple(int(d) for d in view_dims):
        raise InvalidInputError(f"view dims {ds.view_dims} differ from expected {tuple(view_dims)}")
    return ds


def check_labels(y, n_samples: int) -> tuple[LabelVector, np.ndarray]:
    """Map arbitrary labels to contiguous ids; also returns the sorted classes."""
    if isinstance(y, LabelVector):
        y = np.asarray(y.classes)
    y = np.asarray(y)
    if y.ndim != 1:
        y = y.ravel()
    if y.shape[0] != n_samples:
        raise InvalidInputError(f"{y.shape[0]} labels for {n_samples} samples")
    classes, inv = np.unique(y, return_inverse=True)
    return LabelVector(inv + 1, len(classes), tuple(classes.tolist())), classes
