"""Forward operators: parallel-beam Radon transform, Gaussian blur, identity.

Every operator is linear with an adjoint that is the exact transpose of the
forward map, so the dot-product identity <A u, s> == <u, A* s> holds to
rounding error.  The Radon transform is assembled once per geometry as a
sparse matrix (the adjoint is literally its transpose), the blur is a
separable zero-padded convolution with symmetric taps (hence self-adjoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse

from .errors import ConfigurationError, ShapeMismatch
from .grid import ImageGrid, Sinogram, norm


class LinearOperator:
    """Matrix-free linear map with fixed domain and range shapes."""

    domain_shape: tuple[int, int]
    range_shape: tuple[int, int]

    def apply(self, u):
        raise NotImplementedError

    def adjoint(self, s):
        raise NotImplementedError

    def _check_domain(self, u):
        if not isinstance(u, ImageGrid) or u.shape != self.domain_shape:
            raise ShapeMismatch(f"expected an ImageGrid of shape {self.domain_shape}")


@dataclass(frozen=True)
class RadonGeometry:
    """Parallel-beam sampling: angles uniform on [0, pi), unit detector spacing.

    The detector array has ceil(sqrt(2) E) bins, centered on the projection of
    the grid center, wide enough to cover the image diagonal.  A line at angle
    theta and signed offset s runs through center + s (cos t, sin t) with
    direction (-sin t, cos t) and is sampled at unit steps.  The half turn
    already covers every line direction; a full turn would only duplicate
    rays and halve the effective number of view directions.
    """

    image_size: int
    num_angles: int

    def __post_init__(self):
        if self.image_size < 2:
            raise ConfigurationError(f"image_size must be >= 2, got {self.image_size}")
        if self.num_angles < 1:
            raise ConfigurationError(f"num_angles must be >= 1, got {self.num_angles}")

    @property
    def num_detectors(self) -> int:
        return math.ceil(math.sqrt(2.0) * self.image_size)

    @property
    def angles(self) -> np.ndarray:
        m = self.num_angles
        return np.pi * np.arange(m) / m

    @property
    def detector_offsets(self) -> np.ndarray:
        d = self.num_detectors
        return np.arange(d) - (d - 1) / 2.0


_RADON_CACHE: dict[tuple[int, int], tuple[sparse.csr_matrix, sparse.csr_matrix]] = {}


def _radon_matrices(geometry: RadonGeometry):
    key = (geometry.image_size, geometry.num_angles)
    cached = _RADON_CACHE.get(key)
    if cached is not None:
        return cached
    size = geometry.image_size
    d = geometry.num_detectors
    center = (size - 1) / 2.0
    offsets = geometry.detector_offsets
    half_span = math.ceil(math.sqrt(2.0) * size / 2.0)
    steps = np.arange(-half_span, half_span + 1, dtype=np.float64)

    rows_parts, cols_parts, vals_parts = [], [], []
    for t, theta in enumerate(geometry.angles):
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        # sample points of all (detector, step) pairs for this angle
        px = center + offsets[:, None] * cos_t - steps[None, :] * sin_t
        py = center + offsets[:, None] * sin_t + steps[None, :] * cos_t
        x0 = np.floor(px).astype(np.int64)
        y0 = np.floor(py).astype(np.int64)
        fx = px - x0
        fy = py - y0
        ray = t * d + np.broadcast_to(np.arange(d)[:, None], px.shape)
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            for dy, wy in ((0, 1.0 - fy), (1, fy)):
                xc = x0 + dx
                yc = y0 + dy
                w = wx * wy
                ok = (xc >= 0) & (xc < size) & (yc >= 0) & (yc < size) & (w > 0)
                rows_parts.append(ray[ok])
                cols_parts.append((yc[ok] * size + xc[ok]))
                vals_parts.append(w[ok])
    rows = np.concatenate(rows_parts)
    cols = np.concatenate(cols_parts)
    vals = np.concatenate(vals_parts)
    forward = sparse.coo_matrix(
        (vals, (rows, cols)), shape=(geometry.num_angles * d, size * size)
    ).tocsr()
    back = forward.T.tocsr()
    _RADON_CACHE[key] = (forward, back)
    return forward, back


class RadonTransform(LinearOperator):
    """Discrete Radon transform via bilinear interpolation along rays."""

    def __init__(self, geometry: RadonGeometry):
        self.geometry = geometry
        self.domain_shape = (geometry.image_size, geometry.image_size)
        self.range_shape = (geometry.num_angles, geometry.num_detectors)
        self._forward, self._back = _radon_matrices(geometry)

    def apply(self, u: ImageGrid) -> Sinogram:
        self._check_domain(u)
        out = self._forward @ u.values.ravel()
        return Sinogram(out.reshape(self.range_shape))

    def adjoint(self, s: Sinogram) -> ImageGrid:
        if not isinstance(s, Sinogram) or s.shape != self.range_shape:
            raise ShapeMismatch(f"expected a Sinogram of shape {self.range_shape}")
        out = self._back @ s.values.ravel()
        return ImageGrid(out.reshape(self.domain_shape))


def radon_apply(geometry: RadonGeometry, u: ImageGrid) -> Sinogram:
    return RadonTransform(geometry).apply(u)


def radon_adjoint(geometry: RadonGeometry, s: Sinogram) -> ImageGrid:
    return RadonTransform(geometry).adjoint(s)


@dataclass(frozen=True)
class BlurKernel:
    """Truncated, renormalized Gaussian point spread function.

    Taps cover [-ceil(4 rho), ceil(4 rho)] and are scaled to sum to one, so
    the blur preserves constants away from the boundary.  The 2-d kernel is
    the outer product of the 1-d taps (a Gaussian is separable).
    """

    rho: float

    def __post_init__(self):
        if not (self.rho > 0):
            raise ConfigurationError(f"rho must be positive, got {self.rho}")

    @property
    def radius(self) -> int:
        return math.ceil(4.0 * self.rho)

    @property
    def taps(self) -> np.ndarray:
        k = np.arange(-self.radius, self.radius + 1, dtype=np.float64)
        t = np.exp(-(k * k) / (2.0 * self.rho * self.rho))
        return t / t.sum()


class GaussianBlur(LinearOperator):
    """Zero-padded separable Gaussian blur on a square image.

    The taps are symmetric, so the operator matrix is symmetric and the
    adjoint is the identical computation.
    """

    def __init__(self, kernel: BlurKernel, size: int):
        if size < 1:
            raise ConfigurationError(f"size must be >= 1, got {size}")
        self.kernel = kernel
        self.domain_shape = (size, size)
        self.range_shape = (size, size)

    def _correlate(self, values: np.ndarray) -> np.ndarray:
        taps = self.kernel.taps
        out = ndimage.correlate1d(values, taps, axis=0, mode="constant", cval=0.0)
        return ndimage.correlate1d(out, taps, axis=1, mode="constant", cval=0.0)

    def apply(self, u: ImageGrid) -> ImageGrid:
        self._check_domain(u)
        return ImageGrid(self._correlate(u.values))

    def adjoint(self, s: ImageGrid) -> ImageGrid:
        self._check_domain(s)
        return ImageGrid(self._correlate(s.values))


def blur_apply(kernel: BlurKernel, u: ImageGrid) -> ImageGrid:
    return GaussianBlur(kernel, u.height).apply(u)


def blur_adjoint(kernel: BlurKernel, s: ImageGrid) -> ImageGrid:
    return GaussianBlur(kernel, s.height).adjoint(s)


class ScaledIdentity(LinearOperator):
    """c times the identity; handy for tests and degenerate configurations."""

    def __init__(self, scale: float, size: int):
        self.scale = float(scale)
        self.domain_shape = (size, size)
        self.range_shape = (size, size)

    def apply(self, u: ImageGrid) -> ImageGrid:
        self._check_domain(u)
        return ImageGrid(self.scale * u.values)

    adjoint = apply


@dataclass(frozen=True)
class NormEstimate:
    """Power-iteration estimate of an operator norm (always from below)."""

    value: float
    converged: bool
    iterations: int


def estimate_operator_norm(A: LinearOperator, iterations: int = 100, tol: float = 1e-8, seed: int = 0) -> NormEstimate:
    """Estimate ||A|| by power iteration on A* A from a seeded random start.

    Power iteration approaches the top singular value from below, so callers
    that need an upper bound should multiply by a small safety factor.  If the
    relative change never drops below ``tol`` the last estimate is returned
    with ``converged=False``.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    x = ImageGrid(rng.random(A.domain_shape) + 0.5)
    x = ImageGrid(x.values / norm(x))
    estimate = 0.0
    for it in range(1, max(1, iterations) + 1):
        z = A.adjoint(A.apply(x))
        growth = norm(z)
        if growth == 0.0:
            return NormEstimate(value=0.0, converged=True, iterations=it)
        new_estimate = math.sqrt(growth)
        x = ImageGrid(z.values / growth)
        if estimate > 0.0 and abs(new_estimate - estimate) <= tol * new_estimate:
            return NormEstimate(value=new_estimate, converged=True, iterations=it)
        estimate = new_estimate
    return NormEstimate(value=estimate, converged=False, iterations=max(1, iterations))
