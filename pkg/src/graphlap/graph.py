"""Sparse graph Laplacians built from the image being reconstructed.

Pixels are graph nodes.  Two pixels are connected when their lattice distance
(manhattan or chebyshev) is positive and at most ``radius``; the edge weight is
a Gaussian similarity of the two pixel values,

    w(a, b) = exp(-(u(a) - u(b))^2 / sigma).

The Laplacian is Delta = D - W with D the diagonal degree matrix.  Because the
weights depend on the image, the operator is rebuilt whenever the iterate
changes; the sparsity structure only depends on the grid shape, the metric and
floor(radius), so it is computed once and cached, and a rebuild just
re-evaluates the weight of every stored edge.

Weights are kept however small they are (they are strictly positive), so the
stored structure, and with it the cost of an apply, is identical across
rebuilds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConfigurationError
from .grid import ImageGrid

METRICS = ("manhattan", "chebyshev")


@dataclass(frozen=True)
class GraphConfig:
    """Neighborhood radius, similarity scale and lattice metric."""

    radius: float = 6.0
    sigma: float = 0.05
    metric: str = "chebyshev"

    def __post_init__(self):
        if not (self.radius > 0):
            raise ConfigurationError(f"radius must be positive, got {self.radius}")
        if not (self.sigma > 0):
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")


def neighbor_bound(config: GraphConfig) -> int:
    """Largest possible number of neighbors of any pixel.

    chebyshev: (2 floor(R) + 1)^2 - 1, manhattan: 2 floor(R) (floor(R) + 1).
    """
    r = math.floor(config.radius)
    if config.metric == "chebyshev":
        return (2 * r + 1) ** 2 - 1
    return 2 * r * (r + 1)


def _offsets(metric: str, r: int):
    offs = []
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            if di == 0 and dj == 0:
                continue
            dist = abs(di) + abs(dj) if metric == "manhattan" else max(abs(di), abs(dj))
            if dist <= r:
                offs.append((di, dj))
    return offs


@dataclass(frozen=True)
class _Structure:
    rows: np.ndarray
    cols: np.ndarray
    indptr: np.ndarray


_STRUCTURE_CACHE: dict[tuple, _Structure] = {}


def _structure(height: int, width: int, metric: str, r: int) -> _Structure:
    key = (height, width, metric, r)
    cached = _STRUCTURE_CACHE.get(key)
    if cached is not None:
        return cached
    n = height * width
    row_parts, col_parts = [], []
    for di, dj in _offsets(metric, r):
        i0, i1 = max(0, -di), height - max(0, di)
        j0, j1 = max(0, -dj), width - max(0, dj)
        if i0 >= i1 or j0 >= j1:
            continue
        ii, jj = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="ij")
        row_parts.append((ii * width + jj).ravel())
        col_parts.append(((ii + di) * width + (jj + dj)).ravel())
    if row_parts:
        rows = np.concatenate(row_parts)
        cols = np.concatenate(col_parts)
        order = np.lexsort((cols, rows))
        rows = rows[order].astype(np.int32)
        cols = cols[order].astype(np.int32)
    else:
        rows = np.empty(0, dtype=np.int32)
        cols = np.empty(0, dtype=np.int32)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    structure = _Structure(rows=rows, cols=cols, indptr=indptr)
    _STRUCTURE_CACHE[key] = structure
    return structure


@dataclass(frozen=True, eq=False)
class SparseLaplacian:
    """Delta = D - W for one image, stored as CSR weights plus degrees."""

    height: int
    width: int
    weights: sparse.csr_matrix
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.height * self.width

    def apply(self, x: ImageGrid) -> ImageGrid:
        """Apply Delta to an image of the matching shape."""
        if x.shape != (self.height, self.width):
            from .errors import ShapeMismatch

            raise ShapeMismatch(f"image shape {x.shape} does not match grid ({self.height}, {self.width})")
        flat = x.values.ravel()
        out = self.degrees * flat - self.weights @ flat
        return ImageGrid(out.reshape(self.height, self.width))

    def triplets(self):
        """Stored edges as (rows, cols, weights) arrays in row-major order."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.weights.indptr))
        return rows, self.weights.indices.astype(np.int64), self.weights.data


def build_laplacian(image: ImageGrid, config: GraphConfig) -> SparseLaplacian:
    """Build the graph Laplacian of ``image`` under ``config``.

    Runs in O(nnz): the cached structure supplies every within-radius pixel
    pair, and one vectorized pass evaluates the Gaussian weights.  Degrees are
    per-row sums of the weights, accumulated left to right within each row.
    """
    height, width = image.shape
    st = _structure(height, width, config.metric, math.floor(config.radius))
    flat = image.values.ravel()
    diff = flat[st.rows] - flat[st.cols]
    data = np.exp(-(diff * diff) / config.sigma)
    n = height * width
    if data.size:
        starts = np.minimum(st.indptr[:-1], data.size - 1)
        degrees = np.add.reduceat(data, starts)
        degrees[st.indptr[:-1] == st.indptr[1:]] = 0.0
    else:
        degrees = np.zeros(n, dtype=np.float64)
    weights = sparse.csr_matrix((data, st.cols, st.indptr), shape=(n, n))
    degrees.setflags(write=False)
    return SparseLaplacian(height=height, width=width, weights=weights, degrees=degrees)


def lipschitz_constant(config: GraphConfig, height: int, width: int) -> float:
    """Bound H with ||Delta_{u'} x - Delta_u x|| <= H ||x|| ||u' - u||.

    The weight profile t -> exp(-t^2 / sigma) has maximal absolute slope
    L = sqrt(2 / sigma) e^{-1/2} (attained at t = sqrt(sigma / 2)), every
    weight lies in (0, 1], and every node has at most N neighbors, which gives
    H = 2 L (sqrt(N) + 1).  Valid for any pair of images on this grid.
    """
    if height < 1 or width < 1:
        raise ConfigurationError("grid must be non-empty")
    slope = math.sqrt(2.0 / config.sigma) * math.exp(-0.5)
    n_bound = min(neighbor_bound(config), height * width - 1)
    return 2.0 * slope * (math.sqrt(n_bound) + 1.0)


def write_weights_csv(laplacian: SparseLaplacian, path):
    """Dump the weight matrix as ``i,j,w`` triplets sorted by (i, j)."""
    rows, cols, vals = laplacian.triplets()
    with open(path, "w", encoding="ascii") as fh:
        fh.write("i,j,w\n")
        for i, j, w in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            fh.write(f"{i},{j},{repr(w)}\n")


def write_degrees_csv(laplacian: SparseLaplacian, path):
    """Dump the node degrees, one ``i,degree`` line per node."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("i,degree\n")
        for i, d in enumerate(laplacian.degrees.tolist()):
            fh.write(f"{i},{repr(d)}\n")
