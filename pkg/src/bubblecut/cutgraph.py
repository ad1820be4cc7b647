"""Cauchy-Crofton weighted neighbourhood graph whose cuts measure length.

Each cell is a graph node; edges run over a 16-neighbourhood stencil
(8 axis/diagonal plus 8 knight moves, i.e. 8 undirected direction
families).  A direction family with lattice vector v and angular sector
``dtheta`` (measured after mapping the stencil through sqrt(g) at the
edge midpoint) gets weight::

    w = CAL * h^2 * sqrt(det g) * dtheta / (2 * |v|_g)

so that the total weight of edges crossing an interface approximates its
Riemannian length.  CAL is a fixed stencil constant that calibrates
straight axis-aligned cuts exactly in the Euclidean metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import MetricGrid, Region, TORUS, as_values

# undirected stencil directions (di, dj) in increasing angle order, half circle
STENCIL = ((1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1))


def _euclidean_sectors() -> np.ndarray:
    ang = np.array([np.arctan2(dj, di) for di, dj in STENCIL]) % np.pi
    prev = np.roll(ang, 1)
    prev[0] -= np.pi
    nxt = np.roll(ang, -1)
    nxt[-1] += np.pi
    return (nxt - prev) / 2


_SECTORS = _euclidean_sectors()
# calibration: make a straight axis-aligned Euclidean cut come out exact
_ANGLES = np.array([np.arctan2(dj, di) for di, dj in STENCIL])
CALIBRATION = float(1.0 / np.sum(_SECTORS / 2 * np.abs(np.sin(_ANGLES))))


@dataclass
class CutGraph:
    """Immutable weighted graph over the domain cells of a grid."""

    grid: MetricGrid
    edge_u: np.ndarray       # flat cell indices
    edge_v: np.ndarray
    weight: np.ndarray       # length units, all >= 0
    cell_area: np.ndarray    # (ny, nx) Riemannian areas

    def n_cells(self) -> int:
        return self.grid.nx * self.grid.ny


def build_cut_graph(grid: MetricGrid) -> CutGraph:
    """Build the Crofton-weighted 16-neighbourhood graph for a grid."""
    if not grid.is_conformal and grid.topology == TORUS:
        raise ValueError("unsupported combination: tensor metric on torus")
    ny, nx, h = grid.ny, grid.nx, grid.h
    idx = grid.flat_index()
    g11, g12, g22 = grid.metric_components()

    eu, ev, ew = [], [], []
    for k, (di, dj) in enumerate(STENCIL):
        tgt, valid = grid.shift(idx, dj, di)
        dom, _ = grid.shift(grid.domain_mask, dj, di)
        ok = grid.domain_mask & dom & valid
        if not ok.any():
            continue
        a11, _ = grid.shift(g11, dj, di)
        a12, _ = grid.shift(g12, dj, di)
        a22, _ = grid.shift(g22, dj, di)
        m11 = 0.5 * (g11 + a11)
        m12 = 0.5 * (g12 + a12)
        m22 = 0.5 * (g22 + a22)
        det = m11 * m22 - m12 * m12
        sdet = np.sqrt(np.maximum(det, 0.0))

        if grid.is_conformal:
            # conformal maps preserve angles: Euclidean sectors apply
            sector = np.full((ny, nx), _SECTORS[k])
        else:
            sector = _metric_sector(m11, m12, m22, k)

        vx = di * h
        vy = dj * h
        vnorm = np.sqrt(m11 * vx * vx + 2 * m12 * vx * vy + m22 * vy * vy)
        w = CALIBRATION * h * h * sdet * sector / (2.0 * np.maximum(vnorm, 1e-300))
        eu.append(idx[ok])
        ev.append(tgt[ok])
        ew.append(w[ok])

    return CutGraph(grid=grid,
                    edge_u=np.concatenate(eu).astype(np.int64),
                    edge_v=np.concatenate(ev).astype(np.int64),
                    weight=np.concatenate(ew),
                    cell_area=grid.cell_areas())


def _metric_sector(m11, m12, m22, k):
    """Angular sector of stencil direction k after mapping through sqrt(g).

    A positive-definite map preserves the cyclic order of directions, so
    the sector is half the angle between the mapped cyclic neighbours.
    """
    sdet = np.sqrt(np.maximum(m11 * m22 - m12 * m12, 0.0))
    tr = m11 + m22
    denom = np.sqrt(np.maximum(tr + 2 * sdet, 1e-300))
    s11 = (m11 + sdet) / denom
    s12 = m12 / denom
    s22 = (m22 + sdet) / denom

    def angle(di, dj):
        tx = s11 * di + s12 * dj
        ty = s12 * di + s22 * dj
        return np.arctan2(ty, tx) % np.pi

    prev_d = STENCIL[(k - 1) % 8]
    next_d = STENCIL[(k + 1) % 8]
    a_prev = angle(*prev_d)
    a_next = angle(*next_d)
    gap = (a_next - a_prev) % np.pi
    return gap / 2


def perimeter(graph: CutGraph, region: Region) -> float:
    """Total weight of edges with exactly one endpoint in the region."""
    m = region.mask.ravel()
    cut = m[graph.edge_u] != m[graph.edge_v]
    return float(graph.weight[cut].sum())


def weighted_area(graph: CutGraph, region: Region, phi) -> float:
    """Integral of phi over the region with respect to the cell areas."""
    vals = as_values(phi)
    return float((vals * graph.cell_area)[region.mask].sum())
