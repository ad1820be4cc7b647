"""Level-set curvature and discrete critical points of node fields.

The curvature of the level curves of f is the Riemannian divergence of
the g-normalised g-gradient, ``div_g(grad_g f / |grad_g f|_g)``, with the
sign fixed so that boundaries of geodesically convex sublevels come out
positive (a Euclidean disk boundary has curvature +1/r).
"""

from __future__ import annotations

import numpy as np

from .grid import (CriticalPoint, MetricGrid, ScalarField, as_mask, as_values)


def default_grad_floor(grid: MetricGrid, values: np.ndarray, mask: np.ndarray) -> float:
    """1e-3 * (field range / h): excludes near-critical cells."""
    if not mask.any():
        return 0.0
    v = values[mask]
    return 1e-3 * float(v.max() - v.min()) / grid.h


def _face_flux(grid, V, ok, axis_dj, axis_di):
    """sqrt(det g) * unit-gradient component across faces in one axis."""
    h = grid.h
    g11, g12, g22 = grid.metric_components()
    Vs, valid = grid.shift(V, axis_dj, axis_di)
    oks, _ = grid.shift(ok, axis_dj, axis_di)
    face_ok = ok & oks & valid

    d_axis = (Vs - V) / h
    # transverse derivative: average of the centred differences at both ends
    tj, ti = (0, 1) if axis_dj else (1, 0)
    Vp, vp = grid.shift(V, tj, ti)
    Vm, vm = grid.shift(V, -tj, -ti)
    cent_ok = ok & vp & vm
    cent = np.where(cent_ok, (Vp - Vm) / (2 * h), 0.0)
    cent_s, valid_c = grid.shift(cent, axis_dj, axis_di)
    centok_s, _ = grid.shift(cent_ok, axis_dj, axis_di)
    d_trans = 0.5 * (cent + cent_s)
    face_ok = face_ok & cent_ok & centok_s & valid_c

    def mid(a):
        a_s, _ = grid.shift(a, axis_dj, axis_di)
        return 0.5 * (a + a_s)

    m11, m12, m22 = mid(g11), mid(g12), mid(g22)
    det = m11 * m22 - m12 * m12
    sdet = np.sqrt(np.maximum(det, 0.0))
    # covariant gradient on the face
    if axis_di:
        fx, fy = d_axis, d_trans
    else:
        fx, fy = d_trans, d_axis
    inv = 1.0 / np.maximum(det, 1e-300)
    i11, i12, i22 = m22 * inv, -m12 * inv, m11 * inv
    ux = i11 * fx + i12 * fy
    uy = i12 * fx + i22 * fy
    norm2 = fx * ux + fy * uy
    norm = np.sqrt(np.maximum(norm2, 0.0))
    safe = np.maximum(norm, 1e-300)
    comp = ux if axis_di else uy
    flux = sdet * comp / safe
    return np.where(face_ok, flux, 0.0), face_ok


def level_mean_curvature(grid: MetricGrid, f, grad_floor: float | None = None) -> ScalarField:
    """Curvature of the level curves of f (units 1/length), masked near criticals.

    Undefined (masked) where the g-norm of the gradient falls below
    ``grad_floor``, where the stencil leaves the domain, or on non-periodic
    grid edges.
    """
    V = as_values(f)
    ok = as_mask(f, grid) & grid.domain_mask
    if grad_floor is None:
        grad_floor = default_grad_floor(grid, V, ok)
    h = grid.h
    g11, g12, g22 = grid.metric_components()

    flux_x, okx = _face_flux(grid, V, ok, 0, 1)
    flux_y, oky = _face_flux(grid, V, ok, 1, 0)
    fxm, vxm = grid.shift(flux_x, 0, -1)
    okxm, _ = grid.shift(okx, 0, -1)
    fym, vym = grid.shift(flux_y, -1, 0)
    okym, _ = grid.shift(oky, -1, 0)

    sdet = np.maximum(grid.sqrt_det(), 1e-300)
    kappa = (flux_x - fxm + flux_y - fym) / (h * sdet)

    defined = ok & okx & okxm & oky & okym & vxm & vym

    # node-centred gradient magnitude for the floor test
    Vxp, va = grid.shift(V, 0, 1)
    Vxm, vb = grid.shift(V, 0, -1)
    Vyp, vc = grid.shift(V, 1, 0)
    Vym, vd = grid.shift(V, -1, 0)
    cent_ok = ok & va & vb & vc & vd
    fx = (Vxp - Vxm) / (2 * h)
    fy = (Vyp - Vym) / (2 * h)
    det = np.maximum(g11 * g22 - g12 * g12, 1e-300)
    gnorm = np.sqrt(np.maximum(
        (g22 * fx * fx - 2 * g12 * fx * fy + g11 * fy * fy) / det, 0.0))
    defined = defined & cent_ok & (gnorm >= grad_floor)

    return ScalarField(grid, np.where(defined, kappa, 0.0), defined_mask=defined)


def curvature_at(grid: MetricGrid, f, node: tuple[int, int],
                 grad_floor: float | None = None) -> float:
    """Level curvature at one node; raises where the field is near-critical."""
    kappa = level_mean_curvature(grid, f, grad_floor=grad_floor)
    j, i = node
    if not (0 <= j < grid.ny and 0 <= i < grid.nx):
        raise ValueError("outside domain")
    if not kappa.defined_mask[j, i]:
        raise ValueError("near-critical, curvature undefined")
    return float(kappa.values[j, i])


def _hessian(grid: MetricGrid, V: np.ndarray):
    h2 = grid.h * grid.h
    Vxp, _ = grid.shift(V, 0, 1)
    Vxm, _ = grid.shift(V, 0, -1)
    Vyp, _ = grid.shift(V, 1, 0)
    Vym, _ = grid.shift(V, -1, 0)
    Vpp, _ = grid.shift(V, 1, 1)
    Vpm, _ = grid.shift(V, 1, -1)
    Vmp, _ = grid.shift(V, -1, 1)
    Vmm, _ = grid.shift(V, -1, -1)
    fxx = (Vxp - 2 * V + Vxm) / h2
    fyy = (Vyp - 2 * V + Vym) / h2
    fxy = (Vpp - Vpm - Vmp + Vmm) / (4 * h2)
    return fxx, fxy, fyy


# ring order around a node for the 8-neighbour comparison
_RING = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


def critical_points(grid: MetricGrid, f, hessian_floor: float | None = None) -> list[CriticalPoint]:
    """Discrete minima / saddles / maxima under 8-neighbour comparison.

    Ties are broken by lexicographic node order (an explicit symbolic
    perturbation), so the result is deterministic on plateaus.  The Morse
    index comes from the sign pattern of the discrete Hessian eigenvalues;
    the nondegeneracy flag requires both magnitudes above the floor.
    """
    V = as_values(f)
    ok = as_mask(f, grid) & grid.domain_mask
    vals = V[ok]
    if vals.size == 0 or np.all(vals == vals.flat[0]):
        raise ValueError("degenerate field")
    if hessian_floor is None:
        hessian_floor = 1e-9 * float(vals.max() - vals.min()) / (grid.h * grid.h)

    order = grid.flat_index().astype(float)
    # neighbour-greater indicator with symbolic perturbation
    greater = []
    full = ok.copy()
    for dj, di in _RING:
        Vn, valid = grid.shift(V, dj, di)
        okn, _ = grid.shift(ok, dj, di)
        on, _ = grid.shift(order, dj, di)
        full &= valid & okn
        gt = (Vn > V) | ((Vn == V) & (on > order))
        greater.append(gt)
    G = np.stack(greater)  # (8, ny, nx) booleans

    n_changes = np.zeros(G.shape[1:], dtype=int)
    for k in range(8):
        n_changes += (G[k] != G[(k + 1) % 8]).astype(int)
    is_min = full & G.all(axis=0)
    is_max = full & (~G).all(axis=0)
    is_saddle = full & ~is_min & ~is_max & (n_changes >= 4)

    fxx, fxy, fyy = _hessian(grid, V)
    tr = fxx + fyy
    diff = np.sqrt(np.maximum((fxx - fyy) ** 2 / 4 + fxy ** 2, 0.0))
    lam1 = tr / 2 - diff
    lam2 = tr / 2 + diff

    out: list[CriticalPoint] = []
    cand = is_min | is_max | is_saddle
    for j, i in zip(*np.nonzero(cand)):
        l1, l2 = lam1[j, i], lam2[j, i]
        index = int(l1 < 0) + int(l2 < 0)
        nondeg = min(abs(l1), abs(l2)) > hessian_floor
        if is_min[j, i] and index != 0 and not nondeg:
            index = 0
        if is_max[j, i] and index != 2 and not nondeg:
            index = 2
        if is_saddle[j, i] and index != 1 and not nondeg:
            index = 1
        out.append(CriticalPoint(node=(int(j), int(i)), value=float(V[j, i]),
                                 index=index, nondegenerate=bool(nondeg),
                                 eigenvalues=(float(l1), float(l2))))
    return out
