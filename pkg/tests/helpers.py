"""Shared test utilities: small grids and the Dijkstra-16 distance oracle."""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from bubblecut import MetricGrid, Region
from bubblecut.metrics import euclidean

# the 16-neighbourhood as undirected offsets (di, dj)
DIRS16 = ((1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1))


def disk_grid(n=128, half=1.2, domain_radius=None):
    h = 2 * half / (n - 1)
    g = euclidean(nx=n, ny=n, h=h)
    if domain_radius is not None:
        X, Y = g.coords()
        g = MetricGrid(nx=n, ny=n, h=h, lam=np.ones((n, n)),
                       domain_mask=(X ** 2 + Y ** 2) <= domain_radius ** 2,
                       x0=g.x0, y0=g.y0)
    return g


def disk_region(grid, radius, center=(0.0, 0.0)):
    X, Y = grid.coords()
    mask = (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= radius ** 2
    return Region(grid, mask & grid.domain_mask)


def dijkstra16(grid, source_mask):
    """Independent distance oracle: Dijkstra on the 16-neighbourhood graph
    with metric edge lengths at edge midpoints."""
    ny, nx, h = grid.ny, grid.nx, grid.h
    idx = grid.flat_index()
    g11, g12, g22 = grid.metric_components()
    rows, cols, lens = [], [], []
    for di, dj in DIRS16:
        tgt, valid = grid.shift(idx, dj, di)
        dom, _ = grid.shift(grid.domain_mask, dj, di)
        ok = grid.domain_mask & dom & valid
        a11, _ = grid.shift(g11, dj, di)
        a12, _ = grid.shift(g12, dj, di)
        a22, _ = grid.shift(g22, dj, di)
        m11, m12, m22 = 0.5 * (g11 + a11), 0.5 * (g12 + a12), 0.5 * (g22 + a22)
        vx, vy = di * h, dj * h
        L = np.sqrt(m11 * vx * vx + 2 * m12 * vx * vy + m22 * vy * vy)
        rows.append(idx[ok])
        cols.append(tgt[ok])
        lens.append(L[ok])
    n = nx * ny
    m = coo_matrix((np.concatenate(lens),
                    (np.concatenate(rows), np.concatenate(cols))),
                   shape=(n, n)).tocsr()
    sources = np.flatnonzero(source_mask.ravel())
    d = dijkstra(m, directed=False, indices=sources, min_only=True)
    return d.reshape(ny, nx)
