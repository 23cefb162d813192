"""Per-pixel views derived from a hyperspectral cube.

Three views are produced, all with rows in raster row-major pixel order:

* spectral: the band vector of each pixel,
* texture: Gabor magnitude responses on the first principal-component image,
* dmp: differential morphological profiles of the leading PC images.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .data import HyperspectralCube, MultiViewDataset, ViewMatrix
from .exceptions import InvalidInputError
from .solver import fix_signs


@dataclass(frozen=True)
class GaborBankSpec:
    """Log-spaced Gabor bank.

    Scale ``s`` uses wavelength ``base_wavelength * 2**(s/2)`` and a Gaussian
    envelope of ``sigma_ratio`` wavelengths; direction ``d`` is the angle
    ``d * pi / n_orientations``.
    """

    scales: tuple[int, ...] = tuple(range(5))
    directions: tuple[int, ...] = tuple(range(12))
    kernel_size: int = 31
    base_wavelength: float = 4.0
    sigma_ratio: float = 0.56
    n_orientations: int = 12
    method: str = "direct"

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "directions", tuple(self.directions))
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise InvalidInputError("kernel_size must be a positive odd number")
        if self.method not in ("direct", "fft"):
            raise InvalidInputError("method must be 'direct' or 'fft'")

    @property
    def n_features(self) -> int:
        return len(self.scales) * len(self.directions)


@dataclass(frozen=True)
class DmpSpec:
    radii: tuple[int, ...] = (2, 4, 6, 8)
    num_pcs: int = 10

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(int(r) for r in self.radii))
        if not self.radii:
            raise InvalidInputError("need at least one radius")
        if self.radii[0] < 1 or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise InvalidInputError(f"radii must be positive and strictly increasing, got {self.radii}")
        if self.num_pcs < 1:
            raise InvalidInputError("num_pcs must be >= 1")

    @property
    def n_features(self) -> int:
        return self.num_pcs * 2 * len(self.radii)


def pca_scores(cube: HyperspectralCube, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-``q`` PC scores of the pixel band vectors.

    Returns ``(scores, eigenvalues, eigenvectors)`` with scores of shape
    ``(n_pixels, q)``.
    """
    if q < 1 or q > cube.bands:
        raise InvalidInputError(f"q must lie in [1, {cube.bands}], got {q}")
    if cube.n_pixels < 2:
        raise InvalidInputError("PCA needs at least 2 pixels")
    X = cube.pixels()
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / X.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:q]
    vecs = fix_signs(vecs[:, order])
    return Xc @ vecs, vals[order], vecs


def pca_images(cube: HyperspectralCube, q: int) -> list[np.ndarray]:
    scores, _, _ = pca_scores(cube, q)
    return [scores[:, j].reshape(cube.height, cube.width) for j in range(q)]


def gabor_kernel(wavelength: float, theta: float, sigma: float, size: int) -> np.ndarray:
    """Complex Gabor kernel with the real part made zero-mean."""
    h = size // 2
    y, x = np.mgrid[-h:h + 1, -h:h + 1].astype(np.float64)
    xr = x * np.cos(theta) + y * np.sin(theta)
    yr = -x * np.sin(theta) + y * np.cos(theta)
    envelope = np.exp(-(xr**2 + yr**2) / (2.0 * sigma**2))
    real = envelope * np.cos(2.0 * np.pi * xr / wavelength)
    imag = envelope * np.sin(2.0 * np.pi * xr / wavelength)
    return (real - real.mean()) + 1j * imag


def gabor_bank(spec: GaborBankSpec = GaborBankSpec()) -> list[np.ndarray]:
    """Kernels ordered scale-major: index ``i_s * len(directions) + i_d``."""
    bank = []
    for s in spec.scales:
        lam = spec.base_wavelength * 2.0 ** (s / 2.0)
        for d in spec.directions:
            theta = d * np.pi / spec.n_orientations
            bank.append(gabor_kernel(lam, theta, spec.sigma_ratio * lam, spec.kernel_size))
    return bank


def convolve_reflect(image: np.ndarray, kernel: np.ndarray, method: str = "direct") -> np.ndarray:
    """Same-size convolution with half-sample symmetric padding."""
    if np.iscomplexobj(kernel):
        return (convolve_reflect(image, kernel.real, method)
                + 1j * convolve_reflect(image, kernel.imag, method))
    if method == "direct":
        return ndimage.convolve(image, kernel, mode="reflect")
    hy, hx = kernel.shape[0] // 2, kernel.shape[1] // 2
    padded = np.pad(image, ((hy, hy), (hx, hx)), mode="symmetric")
    return fftconvolve(padded, kernel, mode="valid")


def gabor_responses(image: np.ndarray, spec: GaborBankSpec = GaborBankSpec()) -> np.ndarray:
    """Magnitude responses, shape ``(n_filters, height, width)``."""
    image = np.asarray(image, dtype=np.float64)
    if spec.kernel_size > min(image.shape):
        raise InvalidInputError(
            f"kernel_size {spec.kernel_size} exceeds image size {image.shape}"
        )
    return np.stack([np.abs(convolve_reflect(image, k, spec.method)) for k in gabor_bank(spec)])


def gabor_texture(cube: HyperspectralCube, spec: GaborBankSpec = GaborBankSpec()) -> ViewMatrix:
    pc1 = pca_images(cube, 1)[0]
    resp = gabor_responses(pc1, spec)
    cols = tuple(f"gabor_s{s}_d{d}" for s in spec.scales for d in spec.directions)
    return ViewMatrix("texture", resp.reshape(resp.shape[0], -1).T, cols)


def disk(radius: int) -> np.ndarray:
    """Boolean footprint of pixels with ``x^2 + y^2 <= radius^2``."""
    y, x = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return x**2 + y**2 <= radius**2


def opening(image: np.ndarray, radius: int) -> np.ndarray:
    return ndimage.grey_opening(image, footprint=disk(radius), mode="reflect")


def closing(image: np.ndarray, radius: int) -> np.ndarray:
    return ndimage.grey_closing(image, footprint=disk(radius), mode="reflect")


def differential_profile(image: np.ndarray, radii) -> tuple[np.ndarray, np.ndarray]:
    """Opening and closing differentials, each of shape ``(len(radii), h, w)``."""
    image = np.asarray(image, dtype=np.float64)
    out = []
    for op in (opening, closing):
        prev = image
        diffs = []
        for r in radii:
            cur = op(image, r)
            diffs.append(np.abs(cur - prev))
            prev = cur
        out.append(np.stack(diffs))
    return out[0], out[1]


def dmp_features(cube: HyperspectralCube, spec: DmpSpec = DmpSpec()) -> ViewMatrix:
    if spec.num_pcs > cube.bands:
        raise InvalidInputError(f"num_pcs={spec.num_pcs} exceeds band count {cube.bands}")
    feats, cols = [], []
    for j, img in enumerate(pca_images(cube, spec.num_pcs)):
        op, cl = differential_profile(img, spec.radii)
        feats.extend([op, cl])
        cols += [f"dmp_pc{j}_open_r{r}" for r in spec.radii]
        cols += [f"dmp_pc{j}_close_r{r}" for r in spec.radii]
    stack = np.concatenate(feats)
    return ViewMatrix("dmp", stack.reshape(stack.shape[0], -1).T, tuple(cols))


def spectral_view(cube: HyperspectralCube) -> ViewMatrix:
    return ViewMatrix("spectral", cube.pixels(), tuple(f"band_{b}" for b in range(cube.bands)))


@dataclass(frozen=True)
class FeatureSpec:
    gabor: GaborBankSpec = field(default_factory=GaborBankSpec)
    dmp: DmpSpec = field(default_factory=DmpSpec)
    views: tuple[str, ...] = ("spectral", "texture", "dmp")


def extract_views(cube: HyperspectralCube, spec: FeatureSpec = FeatureSpec()) -> MultiViewDataset:
    """All requested views for every pixel, unlabeled."""
    makers = {
        "spectral": lambda: spectral_view(cube),
        "texture": lambda: gabor_texture(cube, spec.gabor),
        "dmp": lambda: dmp_features(cube, spec.dmp),
    }
    unknown = set(spec.views) - set(makers)
    if unknown:
        raise InvalidInputError(f"unknown views {sorted(unknown)}")
    return MultiViewDataset(tuple(makers[name]() for name in spec.views))
