"""Synthetic multi-view data with planted noise columns, and toy cubes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import HyperspectralCube, LabelVector, MultiViewDataset, ViewMatrix
from .exceptions import InvalidInputError


@dataclass(frozen=True)
class SyntheticSpec:
    n_per_class: int = 40
    n_classes: int = 4
    view_dims: tuple[int, ...] = (30, 20, 25)
    class_separation: float = 2.5
    noise_sigma: float = 1.0
    redundant_frac: float = 0.4
    latent_dim: int = 3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "view_dims", tuple(int(x) for x in self.view_dims))
        if not 0 <= self.redundant_frac < 1:
            raise InvalidInputError("redundant_frac must lie in [0, 1)")
        if not self.view_dims or min(self.view_dims) < 1:
            raise InvalidInputError("every view needs at least one column")
        if self.n_per_class < 1 or self.n_classes < 1 or self.latent_dim < 1:
            raise InvalidInputError("n_per_class, n_classes and latent_dim must be >= 1")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class SyntheticDataset:
    dataset: MultiViewDataset
    noise_columns: tuple[np.ndarray, ...]
    informative_columns: tuple[np.ndarray, ...] = field(default=())


def n_noise_columns(dim: int, frac: float) -> int:
    return int(np.floor(frac * dim + 0.5))


def synth_generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Class prototypes seen through per-view random linear maps.

    Every sample of class ``c`` shares the latent point ``z_c``; view ``v``
    renders it as ``A_v z_c + noise``. A fixed fraction of each view's
    columns is then overwritten with pure Gaussian noise whose scale matches
    the informative columns.
    """
    rng = np.random.default_rng(spec.seed)
    C, npc = spec.n_classes, spec.n_per_class
    latent = spec.class_separation * rng.standard_normal((C, spec.latent_dim))
    z = np.repeat(np.arange(C), npc)
    views, noise_cols, info_cols = [], [], []
    for v, dim in enumerate(spec.view_dims):
        A = rng.standard_normal((spec.latent_dim, dim)) / np.sqrt(spec.latent_dim)
        X = latent[z] @ A + spec.noise_sigma * rng.standard_normal((z.size, dim))
        n_noise = n_noise_columns(dim, spec.redundant_frac)
        cols = np.sort(rng.choice(dim, size=n_noise, replace=False))
        scale = X.std() if X.std() > 0 else 1.0
        X[:, cols] = scale * rng.standard_normal((z.size, n_noise))
        views.append(ViewMatrix(f"view{v}", X))
        noise_cols.append(cols)
        info_cols.append(np.setdiff1d(np.arange(dim), cols))
    labels = LabelVector(z + 1, C)
    return SyntheticDataset(
        MultiViewDataset(tuple(views), labels), tuple(noise_cols), tuple(info_cols)
    )


def synth_cube(
    width: int = 48,
    height: int = 48,
    bands: int = 24,
    n_classes: int = 4,
    noise_sigma: float = 0.05,
    seed: int = 0,
) -> tuple[HyperspectralCube, np.ndarray]:
    """A toy scene of vertical class stripes with per-class spectra and texture.

    Returns the cube and the ``height x width`` label raster (ids ``1..C``).
    """
    if width < n_classes:
        raise InvalidInputError("need at least one column per class")
    rng = np.random.default_rng(seed)
    wl = np.linspace(0.0, 1.0, bands)
    spectra = np.stack([
        0.5 + 0.3 * np.sin(2 * np.pi * (wl * (1 + c) / 2 + rng.uniform()))
        for c in range(n_classes)
    ])
    cols = np.arange(width)
    col_class = np.minimum(cols * n_classes // width, n_classes - 1)
    labels = np.broadcast_to(col_class + 1, (height, width)).copy()
    yy, xx = np.mgrid[0:height, 0:width]
    data = np.empty((bands, height, width))
    for c in range(n_classes):
        mask = labels == c + 1
        period = 3 + 2 * c
        texture = 0.1 * np.cos(2 * np.pi * (xx + (c % 2) * yy) / period)
        data[:, mask] = spectra[c][:, None] * (1 + texture[mask])[None, :]
    data += noise_sigma * rng.standard_normal(data.shape)
    return HyperspectralCube(data), labels
