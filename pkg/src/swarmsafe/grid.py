"""Uniform periodic 2D grid, central-difference operators, and cell quadrature.

Scalar fields live on an nx-by-ny grid of square cells and are stored flat,
with cell (i, j) at index ``j*nx + i``. Both axes wrap, so the domain is a
torus; the finite-difference stencils below use that wrap instead of any
boundary condition. The first-derivative operators are second-order central
differences and the Laplacian is the standard 5-point stencil, so applying
them to a resolved smooth field converges at order cell**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of nx*ny square cells with edge length `cell`.

    `origin` is the coordinate of the center of cell (0, 0); cell (i, j) has
    its center at origin + (i*cell, j*cell).
    """

    nx: int
    ny: int
    cell: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ParameterError("central differences need nx >= 3 and ny >= 3")
        if not (isinstance(self.cell, float) or isinstance(self.cell, int)):
            raise ParameterError("cell size must be a number")
        if not (self.cell > 0.0 and math.isfinite(self.cell)):
            raise ParameterError("cell size must be positive and finite")

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def extent(self) -> tuple[float, float]:
        """Physical size (Lx, Ly) of the torus."""
        return (self.nx * self.cell, self.ny * self.cell)

    @property
    def lower_corner(self) -> tuple[float, float]:
        """Lower-left corner of the fundamental domain (cell (0,0)'s corner)."""
        return (self.origin[0] - 0.5 * self.cell, self.origin[1] - 0.5 * self.cell)

    # ------------------------------------------------------------------
    # indexing
    # ------------------------------------------------------------------
    def flatten(self, i, j):
        """Flat index of cell (i, j); wraps out-of-range indices."""
        return (j % self.ny) * self.nx + (i % self.nx)

    def unflatten(self, k):
        """(i, j) of flat index k."""
        if not 0 <= k < self.n_cells:
            raise DimensionError(f"cell index {k} out of range for {self.n_cells} cells")
        return (k % self.nx, k // self.nx)

    def centers_x(self) -> np.ndarray:
        return self.origin[0] + self.cell * np.arange(self.nx)

    def centers_y(self) -> np.ndarray:
        return self.origin[1] + self.cell * np.arange(self.ny)

    def cell_center(self, k) -> np.ndarray:
        i, j = self.unflatten(k)
        return np.array([self.origin[0] + self.cell * i, self.origin[1] + self.cell * j])

    def cell_containing(self, point) -> int:
        """Flat index of the cell whose center is nearest to `point` (wrapped)."""
        p = np.asarray(point, dtype=float)
        i = int(np.rint((p[0] - self.origin[0]) / self.cell)) % self.nx
        j = int(np.rint((p[1] - self.origin[1]) / self.cell)) % self.ny
        return j * self.nx + i

    # ------------------------------------------------------------------
    # torus geometry
    # ------------------------------------------------------------------
    def wrap_point(self, point) -> np.ndarray:
        """Map a point into the fundamental domain [corner, corner + extent)."""
        p = np.asarray(point, dtype=float)
        lo = np.asarray(self.lower_corner)
        ext = np.asarray(self.extent)
        return lo + np.mod(p - lo, ext)

    def min_image(self, a, b) -> np.ndarray:
        """Shortest displacement a - b on the torus (per-axis minimum image)."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        ext = np.asarray(self.extent)
        return d - ext * np.rint(d / ext)

    def torus_distance(self, a, b) -> float:
        return float(np.sqrt((self.min_image(a, b) ** 2).sum()))


class RegionMask:
    """An arbitrary set of cells, stored as sorted unique flat indices."""

    __slots__ = ("indices",)

    def __init__(self, indices):
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size and idx[0] < 0:
            raise DimensionError("region cell indices must be nonnegative")
        idx.setflags(write=False)
        self.indices = idx

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        return isinstance(other, RegionMask) and np.array_equal(self.indices, other.indices)

    def __repr__(self):
        return f"RegionMask({len(self)} cells)"

    def validate(self, grid: Grid):
        if self.indices.size and int(self.indices[-1]) >= grid.n_cells:
            raise DimensionError(
                f"region index {int(self.indices[-1])} out of range for "
                f"{grid.n_cells}-cell grid"
            )

    @classmethod
    def empty(cls):
        return cls(np.empty(0, dtype=np.int64))

    @classmethod
    def from_circle(cls, grid: Grid, center, radius) -> "RegionMask":
        """Cells whose center lies within `radius` (inclusive) of `center`.

        Distances use the torus minimum-image rule, so a circle may wrap.
        """
        if radius < 0:
            raise ParameterError("circle radius must be nonnegative")
        cx, cy = float(center[0]), float(center[1])
        ext = grid.extent
        dx = grid.centers_x() - cx
        dx -= ext[0] * np.rint(dx / ext[0])
        dy = grid.centers_y() - cy
        dy -= ext[1] * np.rint(dy / ext[1])
        d2 = (dx * dx)[None, :] + (dy * dy)[:, None]
        return cls(np.flatnonzero(d2.ravel() <= radius * radius))

    @classmethod
    def from_box(cls, grid: Grid, lo, hi) -> "RegionMask":
        """Cells whose center lies in the axis-aligned box [lo, hi] (inclusive)."""
        if lo[0] > hi[0] or lo[1] > hi[1]:
            raise ParameterError("box lower corner must not exceed upper corner")
        inx = (grid.centers_x() >= lo[0]) & (grid.centers_x() <= hi[0])
        iny = (grid.centers_y() >= lo[1]) & (grid.centers_y() <= hi[1])
        sel = iny[:, None] & inx[None, :]
        return cls(np.flatnonzero(sel.ravel()))

    @classmethod
    def union(cls, masks) -> "RegionMask":
        parts = [m.indices for m in masks]
        if not parts:
            return cls.empty()
        return cls(np.concatenate(parts))


class SparseOperator:
    """Row-compressed sparse matrix with the same number of nonzeros per row.

    Built once per grid and shared read-only. The uniform row width lets both
    kernel backends apply it as a dense (rows, k) gather, which is the hot
    path of the controller.
    """

    __slots__ = ("shape", "indptr", "indices", "data", "row_nnz", "_idx2d", "_dat2d")

    def __init__(self, shape, indptr, indices, data):
        n_rows, n_cols = shape
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64)
        if indptr.shape != (n_rows + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise DimensionError("malformed row pointer array")
        if indices.size != data.size:
            raise DimensionError("indices and data length mismatch")
        widths = np.diff(indptr)
        if widths.size == 0 or widths.min() != widths.max():
            raise DimensionError("SparseOperator requires a uniform row width")
        if indices.size and (indices.min() < 0 or indices.max() >= n_cols):
            raise DimensionError("column index out of range")
        self.shape = (int(n_rows), int(n_cols))
        self.row_nnz = int(widths[0])
        for arr in (indptr, indices, data):
            arr.setflags(write=False)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._idx2d = indices.reshape(n_rows, self.row_nnz)
        self._dat2d = data.reshape(n_rows, self.row_nnz)

    def apply(self, field) -> np.ndarray:
        """Matrix-vector product."""
        x = np.asarray(field, dtype=np.float64)
        if x.shape != (self.shape[1],):
            raise DimensionError(
                f"field length {x.shape} does not match operator width {self.shape[1]}"
            )
        return kernels.uniform_matvec(self._idx2d, self._dat2d, x)

    def apply_rows(self, field, rows) -> np.ndarray:
        """Selected rows of the matrix-vector product (used for region integrals)."""
        x = np.asarray(field, dtype=np.float64)
        if x.shape != (self.shape[1],):
            raise DimensionError(
                f"field length {x.shape} does not match operator width {self.shape[1]}"
            )
        r = np.asarray(rows, dtype=np.int64)
        return kernels.uniform_rows_matvec(self._idx2d, self._dat2d, x, r)

    def column_sums(self) -> np.ndarray:
        """Exact column sums (math.fsum per column, immune to ordering effects)."""
        out = np.zeros(self.shape[1])
        order = np.argsort(self.indices, kind="stable")
        cols = self.indices[order]
        vals = self.data[order]
        bounds = np.searchsorted(cols, np.arange(self.shape[1] + 1))
        for c in range(self.shape[1]):
            lo, hi = bounds[c], bounds[c + 1]
            if hi > lo:
                out[c] = math.fsum(vals[lo:hi].tolist())
        return out

    def row_sums(self) -> np.ndarray:
        """Exact row sums (math.fsum per row)."""
        return np.array([math.fsum(row.tolist()) for row in self._dat2d])

    def toarray(self) -> np.ndarray:
        """Dense copy, for small tests only."""
        dense = np.zeros(self.shape)
        rows = np.repeat(np.arange(self.shape[0]), self.row_nnz)
        dense[rows, self.indices] = self.data
        return dense


@dataclass(frozen=True)
class Operators:
    """The three stencil operators a scenario shares across all robots."""

    grad_x: SparseOperator
    grad_y: SparseOperator
    laplacian: SparseOperator


def _coo_to_operator(grid: Grid, rows, cols, vals) -> SparseOperator:
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    vals = vals[order]
    counts = np.bincount(rows, minlength=grid.n_cells)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return SparseOperator((grid.n_cells, grid.n_cells), indptr, cols, vals)


def build_gradient_x(grid: Grid) -> SparseOperator:
    """Central-difference d/dx with periodic wrap: (f[i+1] - f[i-1]) / (2*cell)."""
    c = 1.0 / (2.0 * grid.cell)
    k = np.arange(grid.n_cells)
    i = k % grid.nx
    j = k // grid.nx
    plus = j * grid.nx + (i + 1) % grid.nx
    minus = j * grid.nx + (i - 1) % grid.nx
    rows = np.repeat(k, 2)
    cols = np.stack([plus, minus], axis=1).ravel()
    vals = np.tile(np.array([c, -c]), grid.n_cells)
    return _coo_to_operator(grid, rows, cols, vals)


def build_gradient_y(grid: Grid) -> SparseOperator:
    """Central-difference d/dy with periodic wrap: (f[j+1] - f[j-1]) / (2*cell)."""
    c = 1.0 / (2.0 * grid.cell)
    k = np.arange(grid.n_cells)
    i = k % grid.nx
    j = k // grid.nx
    plus = ((j + 1) % grid.ny) * grid.nx + i
    minus = ((j - 1) % grid.ny) * grid.nx + i
    rows = np.repeat(k, 2)
    cols = np.stack([plus, minus], axis=1).ravel()
    vals = np.tile(np.array([c, -c]), grid.n_cells)
    return _coo_to_operator(grid, rows, cols, vals)


def build_laplacian(grid: Grid) -> SparseOperator:
    """5-point Laplacian with periodic wrap: (sum of 4 neighbors - 4*center) / cell**2."""
    c = 1.0 / (grid.cell * grid.cell)
    k = np.arange(grid.n_cells)
    i = k % grid.nx
    j = k // grid.nx
    left = j * grid.nx + (i - 1) % grid.nx
    right = j * grid.nx + (i + 1) % grid.nx
    down = ((j - 1) % grid.ny) * grid.nx + i
    up = ((j + 1) % grid.ny) * grid.nx + i
    rows = np.repeat(k, 5)
    cols = np.stack([left, right, down, up, k], axis=1).ravel()
    vals = np.tile(np.array([c, c, c, c, -4.0 * c]), grid.n_cells)
    return _coo_to_operator(grid, rows, cols, vals)


def build_operators(grid: Grid) -> Operators:
    return Operators(build_gradient_x(grid), build_gradient_y(grid), build_laplacian(grid))


def integrate(grid: Grid, field) -> float:
    """Cell-sum quadrature over the whole domain: cell**2 * sum(field)."""
    x = np.asarray(field, dtype=np.float64)
    if x.shape != (grid.n_cells,):
        raise DimensionError(
            f"field of length {x.size} does not match {grid.n_cells}-cell grid"
        )
    return grid.cell * grid.cell * float(x.sum())


def integrate_region(grid: Grid, field, mask: RegionMask) -> float:
    """Cell-sum quadrature restricted to the cells of `mask`."""
    x = np.asarray(field, dtype=np.float64)
    if x.shape != (grid.n_cells,):
        raise DimensionError(
            f"field of length {x.size} does not match {grid.n_cells}-cell grid"
        )
    mask.validate(grid)
    if not len(mask):
        return 0.0
    return grid.cell * grid.cell * float(x[mask.indices].sum())
