"""Synthetic test images and the additive Gaussian noise model.

The head phantom is the standard ten-ellipse table with the contrast-adjusted
intensities that keep every pixel inside [0, 1] (outer shell 1.0, brain tissue
0.2, features 0.0 / 0.3).  Ellipses are rasterized by center-of-pixel
membership on the square [-1, 1]^2 and their intensities add where they
overlap.

Noise is scaled to an exact level: a standard normal direction is drawn once
from a counter-based generator and rescaled so that ||noisy - clean|| equals
delta_rel * ||clean|| by construction.  The direction depends only on the seed
and the data shape, so sweeping delta_rel with a fixed seed perturbs the data
along one fixed direction with shrinking magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import ImageGrid, norm

# (intensity, semi-axis x, semi-axis y, center x, center y, rotation degrees)
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def rasterize_ellipses(size: int, ellipses) -> ImageGrid:
    """Accumulate ellipse intensities over pixel centers, clamped to [0, 1]."""
    if size < 1:
        raise ConfigurationError(f"size must be >= 1, got {size}")
    # pixel centers on [-1, 1]^2, y axis pointing up
    xs = (2.0 * np.arange(size) + 1.0) / size - 1.0
    x, y = np.meshgrid(xs, -xs, indexing="xy")
    out = np.zeros((size, size), dtype=np.float64)
    for value, axis_x, axis_y, cx, cy, phi_deg in ellipses:
        phi = np.deg2rad(phi_deg)
        dx, dy = x - cx, y - cy
        major = dx * np.cos(phi) + dy * np.sin(phi)
        minor = -dx * np.sin(phi) + dy * np.cos(phi)
        inside = (major / axis_x) ** 2 + (minor / axis_y) ** 2 <= 1.0
        out[inside] += value
    return ImageGrid(np.clip(out, 0.0, 1.0))


def shepp_logan(size: int) -> ImageGrid:
    """The standard head phantom at the requested resolution."""
    return rasterize_ellipses(size, SHEPP_LOGAN_ELLIPSES)


@dataclass(frozen=True)
class NoiseSpec:
    """Relative noise level and the seed of the noise direction."""

    delta_rel: float
    seed: int = 0

    def __post_init__(self):
        if self.delta_rel < 0:
            raise ConfigurationError(f"delta_rel must be >= 0, got {self.delta_rel}")


def standard_normal_field(shape, seed: int) -> np.ndarray:
    """Standard normals via Box-Muller on Philox (counter-based) uniforms."""
    rng = np.random.Generator(np.random.Philox(seed))
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def add_noise(clean, spec: NoiseSpec):
    """Return (noisy, delta) with ||noisy - clean|| == delta_rel ||clean||.

    With delta_rel == 0 the data is returned unperturbed and delta is 0.
    """
    if spec.delta_rel == 0.0:
        return type(clean)(clean.values), 0.0
    clean_norm = norm(clean)
    if clean_norm == 0.0:
        raise ConfigurationError("cannot scale noise relative to all-zero data")
    xi = standard_normal_field(clean.values.shape, spec.seed)
    xi_norm = float(np.sqrt(np.sum(xi * xi)))
    if xi_norm == 0.0:
        raise ConfigurationError("degenerate noise draw")
    delta = spec.delta_rel * clean_norm
    noisy = type(clean)(clean.values + (delta / xi_norm) * xi)
    return noisy, delta
