"""Metric distance transforms, signed distance, and morphology on regions."""

from __future__ import annotations

import numpy as np

from ._fmm import INF, eikonal_solve
from .grid import MetricGrid, Region, ScalarField

# 8-neighbourhood in cyclic (counterclockwise) order, entries are (dj, di)
_DIRS8 = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


def _stencil_arrays(grid: MetricGrid, active: np.ndarray):
    """Neighbour table and midpoint-metric edge lengths over active nodes."""
    ny, nx = grid.ny, grid.nx
    n = ny * nx
    idx = grid.flat_index()
    g11, g12, g22 = grid.metric_components()
    nbr = np.full((n, 8), -1, dtype=np.int64)
    elen = np.full((n, 8), np.inf)
    h = grid.h
    for k, (dj, di) in enumerate(_DIRS8):
        tgt, valid = grid.shift(idx, dj, di)
        act, v2 = grid.shift(active, dj, di)
        ok = active & act & valid & v2
        a11, _ = grid.shift(g11, dj, di)
        a12, _ = grid.shift(g12, dj, di)
        a22, _ = grid.shift(g22, dj, di)
        m11 = 0.5 * (g11 + a11)
        m12 = 0.5 * (g12 + a12)
        m22 = 0.5 * (g22 + a22)
        vx = di * h
        vy = dj * h
        L = np.sqrt(m11 * vx * vx + 2.0 * m12 * vx * vy + m22 * vy * vy)
        nbr[idx[ok], k] = tgt[ok]
        elen[idx[ok], k] = L[ok]
    vx = np.array([di * h for (dj, di) in _DIRS8])
    vy = np.array([dj * h for (dj, di) in _DIRS8])
    return nbr, elen, vx, vy, g11.ravel(), g12.ravel(), g22.ravel()


def _run_fmm(grid: MetricGrid, active: np.ndarray, seeds: np.ndarray,
             seed_vals: np.ndarray) -> np.ndarray:
    nbr, elen, vx, vy, g11, g12, g22 = _stencil_arrays(grid, active)
    tol = 1e-12 * grid.h
    d = eikonal_solve(nbr, elen, vx, vy, g11, g12, g22,
                      seeds.astype(np.int64), seed_vals.astype(float),
                      grid.nx * grid.ny, tol)
    return d.reshape(grid.ny, grid.nx)


def distance_transform(grid: MetricGrid, source: Region) -> ScalarField:
    """Riemannian distance to the source set, zero on the source.

    First-order upwind eikonal solve of ``|grad d|_g = 1`` on the domain.
    """
    if source.is_empty:
        raise ValueError("empty source")
    seeds = np.flatnonzero(source.mask.ravel())
    d = _run_fmm(grid, grid.domain_mask, seeds, np.zeros(seeds.size))
    defined = grid.domain_mask & (d < INF / 2)
    return ScalarField(grid, np.where(defined, d, 0.0), defined_mask=defined)


def _interface_seeds(grid: MetricGrid, side: np.ndarray, other: np.ndarray):
    """Seeds on `side` cells 4-adjacent to `other`, at half the edge length."""
    g11, g12, g22 = grid.metric_components()
    h = grid.h
    ny, nx = grid.ny, grid.nx
    best = np.full((ny, nx), np.inf)
    for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        oth, valid = grid.shift(other, dj, di)
        a11, _ = grid.shift(g11, dj, di)
        a22, _ = grid.shift(g22, dj, di)
        a12, _ = grid.shift(g12, dj, di)
        vx = di * h
        vy = dj * h
        m11 = 0.5 * (g11 + a11)
        m12 = 0.5 * (g12 + a12)
        m22 = 0.5 * (g22 + a22)
        L = np.sqrt(m11 * vx * vx + 2.0 * m12 * vx * vy + m22 * vy * vy)
        hit = side & oth & valid
        best[hit] = np.minimum(best[hit], 0.5 * L[hit])
    cells = np.flatnonzero(np.isfinite(best).ravel())
    return cells, best.ravel()[cells]


def signed_distance(grid: MetricGrid, region: Region) -> ScalarField:
    """Signed distance to the region interface: negative inside, positive outside.

    The interface sits halfway between adjacent inside/outside node centres.
    """
    inside = region.mask
    outside = grid.domain_mask & ~inside
    if not inside.any() or not outside.any():
        raise ValueError("no boundary")
    s_out, v_out = _interface_seeds(grid, outside, inside)
    s_in, v_in = _interface_seeds(grid, inside, outside)
    d_out = _run_fmm(grid, outside, s_out, v_out)
    d_in = _run_fmm(grid, inside, s_in, v_in)
    vals = np.zeros((grid.ny, grid.nx))
    defined = np.zeros_like(inside)
    ok_out = outside & (d_out < INF / 2)
    ok_in = inside & (d_in < INF / 2)
    vals[ok_out] = d_out[ok_out]
    vals[ok_in] = -d_in[ok_in]
    defined = ok_out | ok_in
    return ScalarField(grid, vals, defined_mask=defined)


def erode(grid: MetricGrid, region: Region, rho: float) -> Region:
    """Cells at signed distance <= -rho; erode(U, 0) == U."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if region.is_empty:
        return Region(grid, np.zeros_like(region.mask))
    if region.cell_count() == int(grid.domain_mask.sum()):
        return Region(grid, region.mask.copy())
    d = signed_distance(grid, region)
    mask = d.defined_mask & (d.values <= -rho) & region.mask
    return Region(grid, mask)


def dilate(grid: MetricGrid, region: Region, rho: float) -> Region:
    """Cells at signed distance <= +rho; contains the region."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if region.is_empty or region.cell_count() == int(grid.domain_mask.sum()):
        return Region(grid, region.mask.copy())
    d = signed_distance(grid, region)
    mask = region.mask | (d.defined_mask & (d.values <= rho))
    return Region(grid, mask & grid.domain_mask)


def accessible_set(grid: MetricGrid, region: Region, rho: float) -> Region:
    """Morphological opening: dilate(erode(U, rho), rho), clipped into U."""
    core = erode(grid, region, rho)
    if core.is_empty:
        return core
    opened = dilate(grid, core, rho)
    return Region(grid, opened.mask & region.mask)
