"""Dense pixel fields and the small vector algebra used by every other module.

Two container types are provided: :class:`ImageGrid` for reconstruction-space
images and :class:`Sinogram` for projection data.  Both hold a read-only
float64 array and are treated as immutable; every operation returns a new
instance and validates finiteness, so NaN/Inf can never propagate silently.

Reductions go through numpy's pairwise summation, which is deterministic for a
fixed build.  ``dot`` multiplies elementwise before reducing, so it is
bit-exactly symmetric in its arguments and repeated runs produce bit-identical
traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ShapeMismatch


def _checked_values(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeMismatch(f"expected a non-empty 2-d array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteError("field contains NaN or Inf entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """A height x width image with float64 pixel values."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_values(self.values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projection data, one row per angle and one column per detector."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_values(self.values))

    @property
    def num_angles(self) -> int:
        return self.values.shape[0]

    @property
    def num_detectors(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _require_compatible(a, b):
    if type(a) is not type(b):
        raise ShapeMismatch(f"mixed operand types {type(a).__name__} and {type(b).__name__}")
    if a.values.shape != b.values.shape:
        raise ShapeMismatch(f"shape mismatch {a.values.shape} vs {b.values.shape}")


def dot(a, b) -> float:
    """Euclidean inner product over the flattened fields.

    Elementwise products commute bitwise, and the pairwise reduction tree only
    depends on the length, so dot(a, b) == dot(b, a) exactly.
    """
    _require_compatible(a, b)
    return float(np.sum(a.values * b.values))


def norm(a) -> float:
    """Euclidean norm, sqrt(dot(a, a))."""
    return float(np.sqrt(np.sum(a.values * a.values)))


def add(a, b):
    _require_compatible(a, b)
    return type(a)(a.values + b.values)


def sub(a, b):
    _require_compatible(a, b)
    return type(a)(a.values - b.values)


def scale(alpha: float, a):
    return type(a)(alpha * a.values)


def axpy(alpha: float, x, y):
    """Return y + alpha * x."""
    _require_compatible(x, y)
    return type(y)(y.values + alpha * x.values)


def write_pgm(image: ImageGrid, path):
    """Write a binary (P5) PGM preview, clamping [0, 1] linearly to 0..255."""
    clamped = np.clip(image.values, 0.0, 1.0)
    bytes8 = np.rint(clamped * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.width} {image.height}\n255\n".encode("ascii"))
        fh.write(bytes8.tobytes())


def write_csv(field, path):
    """Write one CSV row per field row using shortest round-trip decimals.

    The written text parses back to bit-identical float64 values, so CSV
    round-trips are lossless.
    """
    with open(path, "w", encoding="ascii") as fh:
        for row in field.values:
            fh.write(",".join(repr(v) for v in row.tolist()))
            fh.write("\n")


def read_image_csv(path) -> ImageGrid:
    """Read an image written by :func:`write_csv`."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    return ImageGrid(np.array(rows, dtype=np.float64))
