"""Core data containers and dataset-level operations.

All containers are frozen dataclasses holding read-only numpy arrays, so a
dataset can be shared between workers without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import InvalidInputError

VIEW_NAMES = ("spectral", "texture", "dmp", "custom")


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HyperspectralCube:
    """A ``bands x height x width`` raster stored band-sequentially.

    Pixel ``(row, col)`` maps to flat index ``row * width + col`` everywhere
    in the package.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise InvalidInputError(
                f"cube data must be 3-D (bands, height, width), got shape {data.shape}"
            )
        if data.size == 0:
            raise InvalidInputError("cube is empty")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("cube contains non-finite values")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def pixels(self) -> np.ndarray:
        """Return the ``(n_pixels, bands)`` matrix in raster row-major order."""
        return self.data.reshape(self.bands, -1).T

    @classmethod
    def from_flat(cls, values, width: int, height: int, bands: int) -> "HyperspectralCube":
        values = np.asarray(values)
        if values.size != width * height * bands:
            raise InvalidInputError(
                f"data length {values.size} != width*height*bands = {width * height * bands}"
            )
        return cls(values.reshape(bands, height, width))


@dataclass(frozen=True)
class ViewMatrix:
    name: str
    values: np.ndarray
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInputError(f"view '{self.name}' must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError(f"view '{self.name}' contains non-finite values")
        if self.columns is not None and len(self.columns) != values.shape[1]:
            raise InvalidInputError(
                f"view '{self.name}': {len(self.columns)} column names for {values.shape[1]} columns"
            )
        object.__setattr__(self, "values", _frozen(values))
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> tuple[str, ...]:
        if self.columns is not None:
            return self.columns
        return tuple(f"{self.name}_{j}" for j in range(self.dim))

    def take(self, idx) -> "ViewMatrix":
        return ViewMatrix(self.name, self.values[idx], self.columns)


@dataclass(frozen=True)
class LabelVector:
    """Contiguous class ids ``1..C``.

    ``codes`` keeps the original label code for each class id, so
    ``codes[c - 1]`` is what class ``c`` was called on disk.
    """

    classes: np.ndarray
    n_classes: int
    codes: tuple = field(default=())

    def __post_init__(self):
        classes = np.asarray(self.classes)
        if classes.ndim != 1:
            raise InvalidInputError("labels must be 1-D")
        if classes.size and not np.issubdtype(classes.dtype, np.integer):
            if not np.all(classes == np.round(classes)):
                raise InvalidInputError("labels must be integers")
        classes = classes.astype(np.int64)
        C = int(self.n_classes)
        if C < 1:
            raise InvalidInputError("need at least one class")
        if classes.size and (classes.min() < 1 or classes.max() > C):
            raise InvalidInputError(f"class ids must lie in [1, {C}]")
        present = np.unique(classes)
        if present.size != C:
            missing = sorted(set(range(1, C + 1)) - set(present.tolist()))
            raise InvalidInputError(f"classes {missing} have no samples")
        codes = tuple(self.codes) if self.codes else tuple(range(1, C + 1))
        if len(codes) != C:
            raise InvalidInputError("codes must have one entry per class")
        object.__setattr__(self, "classes", _frozen(classes, np.int64))
        object.__setattr__(self, "n_classes", C)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return self.classes.shape[0]

    @classmethod
    def from_codes(cls, codes) -> "LabelVector":
        """Remap arbitrary label codes to ``1..C`` in sorted code order."""
        codes = np.asarray(codes)
        uniq, inv = np.unique(codes, return_inverse=True)
        return cls(inv.ravel() + 1, len(uniq), tuple(uniq.tolist()))

    def take(self, idx) -> "LabelVector":
        """Subset keeping the class numbering; all classes must remain present."""
        return LabelVector(self.classes[idx], self.n_classes, self.codes)

    def counts(self) -> np.ndarray:
        return np.bincount(self.classes, minlength=self.n_classes + 1)[1:]


@dataclass(frozen=True)
class SplitSpec:
    per_class_train: int
    seed: int = 0

    def __post_init__(self):
        if int(self.per_class_train) < 1:
            raise InvalidInputError("per_class_train must be >= 1")


@dataclass(frozen=True)
class MultiViewDataset:
    views: tuple[ViewMatrix, ...]
    labels: LabelVector | None = None

    def __post_init__(self):
        views = tuple(self.views)
        if not views:
            raise InvalidInputError("dataset has no views")
        ns = {v.n for v in views}
        if len(ns) != 1:
            raise InvalidInputError(
                "views disagree on sample count: "
                + ", ".join(f"{v.name}={v.n}" for v in views)
            )
        if self.labels is not None and len(self.labels) != views[0].n:
            raise InvalidInputError(
                f"{len(self.labels)} labels for {views[0].n} samples"
            )
        object.__setattr__(self, "views", views)

    @property
    def n(self) -> int:
        return self.views[0].n

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> tuple[int, ...]:
        return tuple(v.dim for v in self.views)

    def take(self, idx) -> "MultiViewDataset":
        labels = None if self.labels is None else self.labels.take(idx)
        return MultiViewDataset(tuple(v.take(idx) for v in self.views), labels)


def view_offsets(dims: Sequence[int]) -> np.ndarray:
    """Cumulative column offsets: block ``v`` is ``[off[v], off[v+1])``."""
    return np.concatenate([[0], np.cumsum(np.asarray(dims, dtype=np.int64))])


def normalize_views(ds: MultiViewDataset) -> MultiViewDataset:
    """Z-score every column of every view over all samples.

    Uses the population standard deviation; zero-variance columns become 0.
    """
    if ds.n == 0:
        raise InvalidInputError("cannot normalize an empty dataset")
    if ds.n < 2:
        raise InvalidInputError("normalization needs at least 2 samples")
    out = []
    for v in ds.views:
        X = v.values
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        Z = X - mu
        nz = sd > 0
        Z[:, nz] /= sd[nz]
        Z[:, ~nz] = 0.0
        out.append(ViewMatrix(v.name, Z, v.columns))
    return MultiViewDataset(tuple(out), ds.labels)


def stack_views(ds: MultiViewDataset) -> ViewMatrix:
    """Concatenate views column-wise in stored order."""
    if isinstance(ds, MultiViewDataset):
        views = ds.views
    else:
        views = tuple(ds)
        if not views:
            raise InvalidInputError("need at least one view")
        if len({v.n for v in views}) != 1:
            raise InvalidInputError("views disagree on sample count")
    if len(views) == 1:
        return views[0]
    cols = tuple(c for v in views for c in v.column_names())
    return ViewMatrix("stacked", np.hstack([v.values for v in views]), cols)


def split_stacked(X: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    off = view_offsets(dims)
    if X.shape[-1] != off[-1]:
        raise InvalidInputError(
            f"stacked matrix has {X.shape[-1]} columns, view dims sum to {off[-1]}"
        )
    return [X[..., off[i]:off[i + 1]] for i in range(len(dims))]


def stratified_split_indices(labels: LabelVector, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    counts = labels.counts()
    k = int(spec.per_class_train)
    if k > counts.min():
        c = int(np.argmin(counts)) + 1
        raise InvalidInputError(
            f"per_class_train={k} exceeds population of class {c} ({counts.min()})"
        )
    rng = np.random.default_rng(spec.seed)
    train = []
    for c in range(1, labels.n_classes + 1):
        members = np.flatnonzero(labels.classes == c)
        train.append(rng.choice(members, size=k, replace=False))
    train = np.sort(np.concatenate(train))
    mask = np.ones(len(labels), dtype=bool)
    mask[train] = False
    return train, np.flatnonzero(mask)


def stratified_split(ds: MultiViewDataset, spec: SplitSpec) -> tuple[MultiViewDataset, MultiViewDataset]:
    """Draw ``per_class_train`` samples of every class for training.

    The remainder forms the test set. Test classes that end up empty (a class
    whose whole population went to training) are not allowed, since every
    class must stay represented in a LabelVector.
    """
    if ds.labels is None:
        raise InvalidInputError("dataset has no labels to stratify on")
    train, test = stratified_split_indices(ds.labels, spec)
    return ds.take(train), _take_test(ds, test)


def _take_test(ds: MultiViewDataset, idx: np.ndarray) -> MultiViewDataset:
    present = np.unique(ds.labels.classes[idx])
    if present.size == ds.labels.n_classes:
        return ds.take(idx)
    # some class was fully consumed by training; keep numbering, drop the
    # completeness check by building a looser label vector
    views = tuple(v.take(idx) for v in ds.views)
    return MultiViewDataset(views, _PartialLabels(ds.labels.classes[idx], ds.labels.n_classes, ds.labels.codes))


class _PartialLabels(LabelVector):
    """Label subset that may lack some classes (test side of a tight split)."""

    def __post_init__(self):
        classes = np.asarray(self.classes, dtype=np.int64)
        object.__setattr__(self, "classes", _frozen(classes, np.int64))
        object.__setattr__(self, "codes", tuple(self.codes))

    def take(self, idx):
        return _PartialLabels(self.classes[idx], self.n_classes, self.codes)
