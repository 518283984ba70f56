"""Initial reconstructions used to start the outer iteration.

Four choices: the plain adjoint A* v, filtered back-projection, Tikhonov via
conjugate gradients on the normal equations, and a total-variation denoising
of the FBP image computed with Chambolle's dual projection algorithm.  The
first three are linear in the data; the TV step is a proximal mapping and
therefore nonexpansive, so all four are Lipschitz as maps of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError
from .grid import ImageGrid, Sinogram, axpy, dot, norm
from .operators import LinearOperator, RadonGeometry, RadonTransform

PSI_KINDS = ("adjoint", "fbp", "tikhonov", "tv")


@dataclass(frozen=True)
class ReconstructorSpec:
    """Which initial reconstruction to use, with its tuning knobs."""

    kind: str = "adjoint"
    tikhonov_weight: float = 50.0
    cg_tol: float = 1e-8
    cg_max_iter: int = 500
    tv_weight: float = 0.1
    tv_step: float = 0.25
    tv_tol: float = 1e-5
    tv_max_iter: int = 200

    def __post_init__(self):
        if self.kind not in PSI_KINDS:
            raise ConfigurationError(f"kind must be one of {PSI_KINDS}, got {self.kind!r}")
        if not (self.tikhonov_weight > 0):
            raise ConfigurationError("tikhonov_weight must be positive")
        if not (self.tv_weight > 0):
            raise ConfigurationError("tv_weight must be positive")


def psi_adjoint(A: LinearOperator, v) -> ImageGrid:
    """u0 = A* v."""
    return A.adjoint(v)


def _ramp_hann_filter(nfft: int) -> np.ndarray:
    freqs = np.fft.rfftfreq(nfft)
    f_max = 0.5  # Nyquist for unit detector spacing
    return np.abs(freqs) * 0.5 * (1.0 + np.cos(np.pi * freqs / f_max))


def filter_sinogram(s: Sinogram) -> Sinogram:
    """Apply the ramp x Hann filter to each detector row in frequency space."""
    d = s.num_detectors
    nfft = 1 << max(1, (2 * d - 1)).bit_length()
    spectrum = np.fft.rfft(s.values, n=nfft, axis=1)
    filtered = np.fft.irfft(spectrum * _ramp_hann_filter(nfft)[None, :], n=nfft, axis=1)
    return Sinogram(filtered[:, :d])


def psi_fbp(geometry: RadonGeometry, v: Sinogram) -> ImageGrid:
    """Filtered back-projection: filter rows, back-project, scale by pi / m.

    The scale matches the continuous inversion formula for angles covering the
    full circle (each line is seen twice) with a frequency axis in cycles per
    detector spacing.
    """
    transform = RadonTransform(geometry)
    if v.shape != transform.range_shape:
        raise ConfigurationError(f"sinogram shape {v.shape} does not match geometry {transform.range_shape}")
    back = transform.adjoint(filter_sinogram(v))
    return ImageGrid((math.pi / geometry.num_angles) * back.values)


def psi_tikhonov(A: LinearOperator, v, spec: ReconstructorSpec) -> ImageGrid:
    """Solve (A* A + lambda I) u = A* v by conjugate gradients from zero.

    Stops when the residual of the normal equations has dropped below
    ``cg_tol`` relative to the right-hand side.
    """
    lam = spec.tikhonov_weight
    b = A.adjoint(v)
    b_norm = norm(b)
    x = ImageGrid(np.zeros(A.domain_shape))
    if b_norm == 0.0:
        return x
    r = b  # residual of the normal equations at x = 0
    p = r
    rs = dot(r, r)
    for _ in range(spec.cg_max_iter):
        ap = axpy(lam, p, A.adjoint(A.apply(p)))
        step = rs / dot(p, ap)
        x = axpy(step, p, x)
        r = axpy(-step, ap, r)
        rs_next = dot(r, r)
        if math.sqrt(rs_next) <= spec.cg_tol * b_norm:
            return x
        p = axpy(rs_next / rs, p, r)
        rs = rs_next
    raise ConvergenceError(
        f"conjugate gradients did not reach tol {spec.cg_tol} in {spec.cg_max_iter} iterations",
        residual=math.sqrt(rs) / b_norm,
    )


def _forward_gradient(a: np.ndarray):
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    gx[:, :-1] = a[:, 1:] - a[:, :-1]
    gy[:-1, :] = a[1:, :] - a[:-1, :]
    return gx, gy


def _divergence(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    # negative adjoint of _forward_gradient; size-1 axes carry no differences
    div = np.zeros_like(px)
    if px.shape[1] > 1:
        div[:, 0] += px[:, 0]
        div[:, 1:-1] += px[:, 1:-1] - px[:, :-2]
        div[:, -1] += -px[:, -2]
    if py.shape[0] > 1:
        div[0, :] += py[0, :]
        div[1:-1, :] += py[1:-1, :] - py[:-2, :]
        div[-1, :] += -py[-2, :]
    return div


def tv_prox(b: ImageGrid, weight: float, step: float = 0.25, tol: float = 1e-5, max_iter: int = 200) -> ImageGrid:
    """Chambolle's dual projection for the ROF problem.

    Iterates p <- (p + step * grad(div p - b / weight)) / (1 + step * |...|)
    and returns b - weight * div p, an approximation of the proximal mapping
    of weight * TV at b.  The exact mapping is nonexpansive in b.
    """
    bf = b.values
    px = np.zeros_like(bf)
    py = np.zeros_like(bf)
    for _ in range(max_iter):
        g = _divergence(px, py) - bf / weight
        gx, gy = _forward_gradient(g)
        denom = 1.0 + step * np.sqrt(gx * gx + gy * gy)
        px_next = (px + step * gx) / denom
        py_next = (py + step * gy) / denom
        change = max(np.abs(px_next - px).max(), np.abs(py_next - py).max())
        px, py = px_next, py_next
        if change < tol:
            break
    return ImageGrid(bf - weight * _divergence(px, py))


def tv_energy(u: ImageGrid) -> float:
    """Isotropic total variation with the same forward differences as tv_prox."""
    gx, gy = _forward_gradient(u.values)
    return float(np.sum(np.sqrt(gx * gx + gy * gy)))


def psi_tv(geometry: RadonGeometry, v: Sinogram, spec: ReconstructorSpec) -> ImageGrid:
    """TV denoising of the FBP image."""
    return tv_prox(psi_fbp(geometry, v), spec.tv_weight, spec.tv_step, spec.tv_tol, spec.tv_max_iter)


def initial_reconstruction(A: LinearOperator, v, spec: ReconstructorSpec) -> ImageGrid:
    """Dispatch on ``spec.kind``; fbp/tv need a Radon forward operator."""
    if spec.kind == "adjoint":
        return psi_adjoint(A, v)
    if spec.kind == "tikhonov":
        return psi_tikhonov(A, v, spec)
    geometry = getattr(A, "geometry", None)
    if not isinstance(geometry, RadonGeometry):
        raise ConfigurationError(f"psi kind {spec.kind!r} needs a Radon operator, got {type(A).__name__}")
    if spec.kind == "fbp":
        return psi_fbp(geometry, v)
    return psi_tv(geometry, v, spec)
