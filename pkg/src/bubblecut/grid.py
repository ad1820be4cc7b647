"""Discrete metric grids, cell regions and node fields.

The grid is a rectangular lattice of nodes with spacing ``h``; every node
owns the square cell centred on it, so cells and nodes share one index
space ``[j, i]`` (row ``j`` along y, column ``i`` along x).  The metric is
stored per node, either as a conformal factor lambda (metric
``lambda^2 (dx^2 + dy^2)``) or as a full symmetric 2x2 tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PLANE = "plane"
CYLINDER = "cylinder"  # periodic in x
TORUS = "torus"        # periodic in x and y

TOPOLOGIES = (PLANE, CYLINDER, TORUS)


@dataclass
class MetricGrid:
    """Rectangular node grid carrying per-node metric data.

    Exactly one of ``lam`` (conformal factor, shape ``(ny, nx)``) and
    ``tensor`` (components ``g11, g12, g22`` stacked last, shape
    ``(ny, nx, 3)``) must be given.  ``domain_mask`` marks the cells that
    belong to the manifold; everything outside is void.
    """

    nx: int
    ny: int
    h: float
    topology: str = PLANE
    lam: np.ndarray | None = None
    tensor: np.ndarray | None = None
    domain_mask: np.ndarray | None = None
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.nx < 4 or self.ny < 4:
            raise ValueError("nx, ny must be >= 4")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if (self.lam is None) == (self.tensor is None):
            raise ValueError("exactly one of lam / tensor must be set")
        shape = (self.ny, self.nx)
        if self.lam is not None:
            self.lam = np.asarray(self.lam, dtype=float)
            if self.lam.shape != shape:
                raise ValueError("lam has wrong shape")
        else:
            self.tensor = np.asarray(self.tensor, dtype=float)
            if self.tensor.shape != shape + (3,):
                raise ValueError("tensor has wrong shape")
            if self.topology == TORUS:
                raise ValueError("unsupported combination: tensor metric on torus")
        if self.domain_mask is None:
            self.domain_mask = np.ones(shape, dtype=bool)
        else:
            self.domain_mask = np.asarray(self.domain_mask, dtype=bool)
            if self.domain_mask.shape != shape:
                raise ValueError("domain_mask has wrong shape")
        self._check_positive()

    # -- metric access -------------------------------------------------

    def _check_positive(self):
        dom = self.domain_mask
        if self.lam is not None:
            if not np.all(self.lam[dom] > 0):
                raise ValueError("degenerate metric: lambda <= 0 inside domain")
        else:
            g11, g12, g22 = (self.tensor[..., k] for k in range(3))
            det = g11 * g22 - g12 * g12
            if not (np.all(g11[dom] > 0) and np.all(det[dom] > 0)):
                raise ValueError("degenerate metric: tensor not positive definite")

    @property
    def is_conformal(self) -> bool:
        return self.lam is not None

    @property
    def periodic_x(self) -> bool:
        return self.topology in (CYLINDER, TORUS)

    @property
    def periodic_y(self) -> bool:
        return self.topology == TORUS

    def metric_components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-node tensor components (g11, g12, g22)."""
        if self.lam is not None:
            l2 = self.lam * self.lam
            z = np.zeros_like(l2)
            return l2, z, l2
        return self.tensor[..., 0], self.tensor[..., 1], self.tensor[..., 2]

    def sqrt_det(self) -> np.ndarray:
        g11, g12, g22 = self.metric_components()
        return np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))

    def cell_areas(self) -> np.ndarray:
        """Riemannian cell areas sqrt(det g) * h^2 at every node."""
        return self.sqrt_det() * self.h * self.h

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + self.h * np.arange(self.nx)
        y = self.y0 + self.h * np.arange(self.ny)
        return np.meshgrid(x, y)

    # -- topology-aware shifts ------------------------------------------

    def shift(self, arr: np.ndarray, dj: int, di: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(shifted, valid)`` with ``shifted[j, i] = arr[j+dj, i+di]``.

        Shifts wrap in periodic directions; ``valid`` is False where the
        neighbour falls off a non-periodic edge.
        """
        out = np.roll(np.roll(arr, -dj, axis=0), -di, axis=1)
        valid = np.ones((self.ny, self.nx), dtype=bool)
        if not self.periodic_y:
            if dj > 0:
                valid[self.ny - dj:, :] = False
            elif dj < 0:
                valid[:-dj, :] = False
        if not self.periodic_x:
            if di > 0:
                valid[:, self.nx - di:] = False
            elif di < 0:
                valid[:, :-di] = False
        return out, valid

    def neighbor_valid(self, dj: int, di: int) -> np.ndarray:
        """Validity mask for the (dj, di) neighbour staying inside the domain."""
        dom, valid = self.shift(self.domain_mask, dj, di)
        return self.domain_mask & valid & dom

    def flat_index(self) -> np.ndarray:
        return np.arange(self.nx * self.ny).reshape(self.ny, self.nx)

    def transposed(self) -> "MetricGrid":
        """Grid with x and y axes swapped (tensor components swapped too).

        Only meaningful for exchanging the periodic direction of a
        cylinder or re-slicing a torus; used by the systole runs.
        """
        lam = None if self.lam is None else self.lam.T.copy()
        tensor = None
        if self.tensor is not None:
            tensor = np.stack(
                [self.tensor[..., 2].T, self.tensor[..., 1].T, self.tensor[..., 0].T],
                axis=-1,
            ).copy()
        return MetricGrid(
            nx=self.ny, ny=self.nx, h=self.h, topology=self.topology,
            lam=lam, tensor=tensor, domain_mask=self.domain_mask.T.copy(),
            x0=self.y0, y0=self.x0,
        )


def cell_area(grid: MetricGrid, cell: tuple[int, int]) -> float:
    """Riemannian area of one cell, metric evaluated at the cell centre."""
    j, i = cell
    if not (0 <= j < grid.ny and 0 <= i < grid.nx) or not grid.domain_mask[j, i]:
        raise ValueError("outside domain")
    return float(grid.cell_areas()[j, i])


@dataclass
class Region:
    """Boolean cell mask tied to a grid; always a subset of the domain."""

    grid: MetricGrid
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("mask has wrong shape")
        if np.any(self.mask & ~self.grid.domain_mask):
            raise ValueError("region mask extends outside domain")

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def cell_count(self) -> int:
        return int(self.mask.sum())

    def area(self) -> float:
        return float(self.grid.cell_areas()[self.mask].sum())

    def complement(self) -> "Region":
        return Region(self.grid, self.grid.domain_mask & ~self.mask)

    def boundary_cells(self) -> np.ndarray:
        """Cells of the region 4-adjacent to domain cells outside it.

        Empty iff the region is empty or covers the whole domain.
        """
        g = self.grid
        outside = g.domain_mask & ~self.mask
        bnd = np.zeros_like(self.mask)
        for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            out_sh, valid = g.shift(outside, dj, di)
            bnd |= self.mask & out_sh & valid
        return bnd


@dataclass
class ScalarField:
    """Per-node real values with a mask of nodes where they are meaningful."""

    grid: MetricGrid
    values: np.ndarray
    defined_mask: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("values have wrong shape")
        if self.defined_mask is None:
            self.defined_mask = self.grid.domain_mask.copy()
        else:
            self.defined_mask = np.asarray(self.defined_mask, dtype=bool)
        if not np.all(np.isfinite(self.values[self.defined_mask])):
            raise ValueError("non-finite values on defined mask")

    def range(self) -> float:
        if not self.defined_mask.any():
            return 0.0
        v = self.values[self.defined_mask]
        return float(v.max() - v.min())


@dataclass
class CriticalPoint:
    node: tuple[int, int]
    value: float
    index: int                 # 0 minimum, 1 saddle, 2 maximum
    nondegenerate: bool
    eigenvalues: tuple[float, float] = field(default=(0.0, 0.0))


def as_values(f) -> np.ndarray:
    """Accept a ScalarField or a bare array and return the value array."""
    return f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)


def as_mask(f, grid: MetricGrid) -> np.ndarray:
    if isinstance(f, ScalarField):
        return f.defined_mask
    return grid.domain_mask
