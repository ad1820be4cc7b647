"""Certified functions from nested regions: splicing, smoothing, verification.

The staircase splices bent signed-distance functions of a strictly nested
region family into one continuous field whose sublevels are intersections
of stage sublevels.  Mollification smooths across the splice ridges, a
seeded perturbation makes critical points nondegenerate, and
``verify_mean_convex`` samples the level curvature everywhere the gradient
is trustworthy and checks the Morse index bound (index 0 in 2-D).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import critical_points, level_mean_curvature
from .distance import dilate, distance_transform, erode, signed_distance
from .grid import CriticalPoint, MetricGrid, Region, ScalarField, as_mask, as_values


# ---------------------------------------------------------------------------
# bending

def bend(grid: MetricGrid, d, c: float) -> ScalarField:
    """Post-compose with beta(t) = t + c t^2; levels are unchanged as sets."""
    if c < 0:
        raise ValueError("bend coefficient must be >= 0")
    V = as_values(d)
    ok = as_mask(d, grid)
    if c > 0 and ok.any():
        tmin = float(V[ok].min())
        if 1.0 + 2.0 * c * tmin <= 0.0:
            raise ValueError("bending breaks monotonicity")
    return ScalarField(grid, V + c * V * V, defined_mask=ok.copy())


def _bend_clamped(V: np.ndarray, c: float) -> np.ndarray:
    """Bending restricted to the inside: identity for t >= 0, t + c t^2 on
    [-T, 0] with T = 1/(4c), affine with slope 1/2 below.

    Monotone increasing and convex for every c >= 0, whatever the range.
    """
    if c == 0.0:
        return V.copy()
    T = 1.0 / (4.0 * c)
    quad = V + c * V * V
    lin = (-T + c * T * T) + 0.5 * (V + T)
    out = np.where(V >= -T, quad, lin)
    return np.where(V >= 0.0, V, out)


# ---------------------------------------------------------------------------
# mollification

def quartic_bump(t: np.ndarray) -> np.ndarray:
    """Default kernel profile (1 - t^2)^2 on [0, 1]."""
    t = np.asarray(t)
    return np.where(t < 1.0, (1.0 - t * t) ** 2, 0.0)


def mollify(grid: MetricGrid, f, eps: float, kernel_profile=None) -> ScalarField:
    """Distance-weighted average with the normalised kernel of width eps.

    Weights are ``psi(dist_g(x, y)/eps) * dA(y)`` with the local metric
    quadratic form standing in for the distance inside the (small) window;
    they are renormalised to sum to 1 at every node.
    """
    if eps < 2.0 * grid.h:
        raise ValueError("kernel under-resolved")
    psi = kernel_profile or quartic_bump
    V = as_values(f)
    ok = as_mask(f, grid) & grid.domain_mask
    g11, g12, g22 = grid.metric_components()
    h = grid.h
    area = grid.cell_areas()

    tr = g11 + g22
    dif = np.sqrt(np.maximum(((g11 - g22) / 2) ** 2 + g12 ** 2, 0.0))
    eig_min = np.maximum(tr / 2 - dif, 1e-300)
    lam_min = float(np.sqrt(eig_min[grid.domain_mask].min()))
    W = int(np.ceil(eps / (h * lam_min)))
    W = min(W, max(grid.nx, grid.ny))

    num = np.zeros_like(V)
    den = np.zeros_like(V)
    for dj in range(-W, W + 1):
        for di in range(-W, W + 1):
            q = g11 * (di * h) ** 2 + 2 * g12 * (di * h) * (dj * h) + g22 * (dj * h) ** 2
            t = np.sqrt(np.maximum(q, 0.0)) / eps
            if float(t.min()) >= 1.0:
                continue
            Vs, valid = grid.shift(V, dj, di)
            oks, _ = grid.shift(ok, dj, di)
            As, _ = grid.shift(area, dj, di)
            w = psi(t) * As
            w = np.where(valid & oks, w, 0.0)
            num += w * Vs
            den += w
    defined = ok & (den > 0)
    out = np.where(defined, num / np.maximum(den, 1e-300), 0.0)
    return ScalarField(grid, out, defined_mask=defined)


# ---------------------------------------------------------------------------
# staircase splicing

@dataclass
class StaircaseSpec:
    """Nested regions with gap bounds, bending coefficients and offsets.

    Unspecified parameters are measured from the regions themselves:
    ``deltas[i]`` becomes the measured sup of dist(., bd U_i) over
    bd U_{i+1} plus 2h, bending coefficients follow the negative-curvature
    rule, offsets anchor each stage at the previous one's delta-depth.
    """

    regions: list[Region]
    deltas: list[float] | None = None
    bend_coeffs: list[float] | None = None
    offsets: list[float] | None = None
    slope_decay: float = 0.8

    def min_slope(self) -> float:
        return self.slope_decay ** max(len(self.regions) - 1, 0)


def _stage_distance_fields(grid, regions):
    return [signed_distance(grid, r) for r in regions]


def _measured_gaps(grid, regions, dfields):
    gaps = []
    for i in range(len(regions) - 1):
        bnd = regions[i + 1].boundary_cells()
        di = dfields[i].values
        gaps.append(float(np.abs(di[bnd]).max()) if bnd.any() else 0.0)
    return gaps


def _default_bend_coeff(grid, dfield) -> float:
    """1.5x the measured negative level-curvature scale of the stage boundary.

    Measured on the cell-scale-mollified distance so rasterisation noise
    does not masquerade as concavity.
    """
    sm = mollify(grid, dfield, 4 * grid.h)
    kappa = level_mean_curvature(grid, sm)
    band = kappa.defined_mask & (np.abs(dfield.values) >= 3 * grid.h) \
        & (np.abs(dfield.values) <= 6 * grid.h)
    if not band.any():
        return 0.0
    kmin = float(np.percentile(kappa.values[band], 2.0))
    return 1.5 * max(0.0, -kmin)


def staircase(grid: MetricGrid, spec: StaircaseSpec) -> ScalarField:
    """Splice the nested family into one field, max of bent stage distances.

    The result is 0 on the boundary of the outermost region, negative and
    strictly decreasing into the nest, and its sublevel masks are exact
    intersections of stage sublevel masks.
    """
    regions = spec.regions
    if len(regions) == 0:
        raise ValueError("staircase needs at least one region")
    for i in range(len(regions) - 1):
        a, b = regions[i].mask, regions[i + 1].mask
        if not (b & ~a).sum() == 0 or not (a & ~b).any() or not b.any():
            raise ValueError("staircase gap violated")

    dfields = _stage_distance_fields(grid, regions)
    gaps = _measured_gaps(grid, regions, dfields)
    deltas = spec.deltas
    if deltas is None:
        deltas = [m + 2 * grid.h for m in gaps]
    else:
        if len(deltas) != len(regions) - 1:
            raise ValueError("need one delta per consecutive pair")
        for d, m in zip(deltas, gaps):
            if not d > m:
                raise ValueError("staircase gap violated")
    coeffs = spec.bend_coeffs
    if coeffs is None:
        coeffs = [_default_bend_coeff(grid, df) for df in dfields]

    n = len(regions)
    slopes = [spec.slope_decay ** i for i in range(n)]
    offsets = spec.offsets
    if offsets is None:
        offsets = [0.0]
        for i in range(n - 1):
            bi = _bend_clamped(np.array([-deltas[i]]), coeffs[i])[0]
            offsets.append(offsets[i] + slopes[i] * bi)

    best = None
    defined = grid.domain_mask.copy()
    for i in range(n):
        defined &= dfields[i].defined_mask
        fi = slopes[i] * _bend_clamped(dfields[i].values, coeffs[i]) + offsets[i]
        best = fi if best is None else np.maximum(best, fi)
    return ScalarField(grid, np.where(defined, best, 0.0), defined_mask=defined)


# ---------------------------------------------------------------------------
# corner smoothing

def corner_smooth(grid: MetricGrid, region: Region, delta: float, eps: float,
                  phi_target: float | None = None) -> Region:
    """Round convex corners by the delta-level of the eps-mollified distance.

    The construction works from an interior equidistant so the result stays
    inside the input; Hausdorff displacement is at most delta + eps + 2h.
    """
    if delta == 0.0 or eps == 0.0:
        return Region(grid, region.mask.copy())
    if delta < 2 * grid.h or eps < 2 * grid.h:
        raise ValueError("kernel under-resolved")

    closing = erode(grid, dilate(grid, region, delta), delta)
    extra = closing.mask & ~region.mask
    if extra.any():
        d = signed_distance(grid, region)
        if float(d.values[extra].max()) > 2.0 * grid.h:
            raise ValueError("lemma hypothesis violated")

    core = erode(grid, region, delta)
    if core.is_empty:
        raise ValueError("region too thin to smooth at this delta")
    dcore = signed_distance(grid, core)
    sm = mollify(grid, dcore, eps)
    mask = sm.defined_mask & (sm.values <= delta) & region.mask
    out = Region(grid, mask)
    if phi_target is not None:
        from .mincut import bubble_boundary_curvature
        stats = bubble_boundary_curvature(grid, out)
        if stats["min"] < phi_target:
            raise ValueError("smoothed boundary curvature below target")
    return out


def interface_midpoints(grid: MetricGrid, region: Region) -> np.ndarray:
    """Coordinates of the midpoints between adjacent inside/outside cells."""
    X, Y = grid.coords()
    pts = []
    M = region.mask
    for dj, di in ((0, 1), (1, 0)):
        sh, valid = grid.shift(M, dj, di)
        Xs, _ = grid.shift(X, dj, di)
        Ys, _ = grid.shift(Y, dj, di)
        cross = valid & (M != sh)
        pts.append(np.column_stack([(X[cross] + Xs[cross]) / 2,
                                    (Y[cross] + Ys[cross]) / 2]))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def boundary_curvature_fit(grid: MetricGrid, region: Region,
                           scale: float) -> np.ndarray:
    """Boundary curvature sampled by local parabola fits at the given scale.

    Interface midpoints are gathered within ``scale`` of each station,
    rotated into the tangent frame (PCA) and fit with a weighted parabola;
    the sign is positive where the region is convex.  Works in the grid
    coordinate frame, so it reads Euclidean curvature; meant for the
    flat-metric corner-smoothing checks, where it averages out the
    straight runs that rasterisation prints onto smooth boundaries.
    """
    from scipy.spatial import cKDTree

    P = interface_midpoints(grid, region)
    if P.shape[0] == 0:
        raise ValueError("boundary too small to sample")
    tree = cKDTree(P)
    M = region.mask
    out = []
    for s in range(P.shape[0]):
        idx = tree.query_ball_point(P[s], scale)
        if len(idx) < 8:
            continue
        Q = P[idx] - P[s]
        r = np.hypot(Q[:, 0], Q[:, 1])
        wgt = (1.0 - (r / scale) ** 3) ** 3
        C = (Q * wgt[:, None]).T @ Q / wgt.sum()
        _, V = np.linalg.eigh(C)
        t, n = V[:, 1], V[:, 0]
        u = Q @ t
        v = Q @ n
        A = np.column_stack([np.ones_like(u), u, 0.5 * u * u]) \
            * np.sqrt(wgt)[:, None]
        coef, *_ = np.linalg.lstsq(A, v * np.sqrt(wgt), rcond=None)
        b, c = coef[1], coef[2]
        kappa = c / (1.0 + b * b) ** 1.5
        probe = P[s] + n * 3 * grid.h
        j = int(np.clip(round((probe[1] - grid.y0) / grid.h), 0, grid.ny - 1))
        i = int(np.clip(round((probe[0] - grid.x0) / grid.h), 0, grid.nx - 1))
        out.append(-kappa if not M[j, i] else kappa)
    if not out:
        raise ValueError("boundary too small to sample")
    return np.array(out)


# ---------------------------------------------------------------------------
# Morse regularization

def _bump_field(grid: MetricGrid, seed: int, center: tuple) -> np.ndarray:
    """Quadratic well at the given node plus mild seeded bumps, scaled to 1.

    The well is convex, so its restriction to any convex plateau around
    the centre has one minimum; the bumps break residual symmetries.
    """
    rng = np.random.default_rng(seed)
    X, Y = grid.coords()
    ext_x = grid.h * (grid.nx - 1)
    ext_y = grid.h * (grid.ny - 1)
    extent = max(ext_x, ext_y)
    cj, ci = center
    cx, cy = X[cj, ci], Y[cj, ci]
    P = ((X - cx) ** 2 + (Y - cy) ** 2) / (extent * extent)
    for _ in range(4):
        bx = grid.x0 + rng.uniform(0, ext_x)
        by = grid.y0 + rng.uniform(0, ext_y)
        sig = rng.uniform(0.15, 0.35) * extent
        amp = 0.15 * rng.uniform(0.5, 1.0) * rng.choice((-1.0, 1.0))
        P += amp * np.exp(-((X - bx) ** 2 + (Y - by) ** 2) / (2 * sig * sig))
    m = np.abs(P[grid.domain_mask]).max()
    return P / max(m, 1e-300)


def morse_regularize(grid: MetricGrid, f, amplitude: float, seed: int = 0,
                     max_attempts: int = 8) -> tuple[ScalarField, dict]:
    """Add a seeded low-amplitude smooth perturbation until all critical
    points are nondegenerate under the discrete Hessian test.

    Returns the perturbed field and a record of the seed actually used.
    """
    V = as_values(f)
    ok = as_mask(f, grid)
    ext = grid.h * max(grid.nx - 1, grid.ny - 1)
    floor = 0.05 * amplitude / (ext * ext)
    inner = np.where(ok & grid.domain_mask, V, np.inf)
    center = np.unravel_index(np.argmin(inner), inner.shape)
    for attempt in range(max_attempts):
        s = seed + attempt
        P = _bump_field(grid, s, center)
        out = ScalarField(grid, V + amplitude * P, defined_mask=ok.copy())
        try:
            cps = critical_points(grid, out, hessian_floor=floor)
        except ValueError:
            continue
        if all(cp.nondegenerate for cp in cps):
            return out, {"seed": s, "amplitude": amplitude,
                         "critical_count": len(cps)}
    raise ValueError("regularization failed")


# ---------------------------------------------------------------------------
# certification pipeline for a nested trace

def pixel_smooth(grid: MetricGrid, f, cells: float) -> ScalarField:
    """Kernel average over a fixed number of grid cells.

    Same quartic kernel as ``mollify`` but measured in grid cells rather
    than metric length, so rasterisation noise (which lives at the pixel
    scale) is suppressed uniformly even where the metric factor is large.
    """
    V = as_values(f)
    ok = as_mask(f, grid) & grid.domain_mask
    area = grid.cell_areas()
    W = int(np.ceil(cells))
    num = np.zeros_like(V)
    den = np.zeros_like(V)
    for dj in range(-W, W + 1):
        for di in range(-W, W + 1):
            t = np.hypot(di, dj) / cells
            if t >= 1.0:
                continue
            w0 = (1.0 - t * t) ** 2
            Vs, valid = grid.shift(V, dj, di)
            oks, _ = grid.shift(ok, dj, di)
            As, _ = grid.shift(area, dj, di)
            w = np.where(valid & oks, w0 * As, 0.0)
            num += w * Vs
            den += w
    defined = ok & (den > 0)
    out = np.where(defined, num / np.maximum(den, 1e-300), 0.0)
    return ScalarField(grid, out, defined_mask=defined)


def _subsample_stages(stages: list[Region], min_gap_cells: float,
                      h: float) -> list[Region]:
    """Keep stages at least ``min_gap_cells`` apart (crudely, by area)."""
    if len(stages) <= 2:
        return stages
    out = [stages[0]]
    for s in stages[1:-1]:
        prev = out[-1]
        shed = prev.cell_count() - s.cell_count()
        bnd = max(int(s.boundary_cells().sum()), 1)
        if shed / bnd >= min_gap_cells:
            out.append(s)
    out.append(stages[-1])
    return out


def certify_trace(grid: MetricGrid, stages: list[Region], work_mask: np.ndarray,
                  phi_target=0.0, seed: int = 0,
                  smooth_cells: tuple = (6.0, 9.0, 12.0, 16.0),
                  coercive: float = 0.15, bump_amplitude: float = 1e-5):
    """Staircase -> pixel smoothing -> coercive term -> Morse bumps -> verify.

    The coercive term is a small multiple of the squared distance from the
    deepest node; it restores strictly positive level curvature where mask
    rasterisation flattened the stage distance fields.  The smoothing
    scale escalates until the margins clear (rasterisation creases scale
    with sqrt(R/h) cells, so no single width fits all resolutions).
    Returns the emitted field, its ConvexityReport over ``work_mask``,
    and a parameter record.
    """
    stages = _subsample_stages(stages, 8.0, grid.h)
    spec = StaircaseSpec(regions=stages)
    raw = staircase(grid, spec)
    floor = 0.25 * spec.min_slope()

    best = None
    for cells in smooth_cells:
        sm = pixel_smooth(grid, raw, cells)

        inner = np.where(sm.defined_mask & work_mask, sm.values, np.inf)
        jmin, imin = np.unravel_index(np.argmin(inner), inner.shape)
        point = np.zeros_like(work_mask)
        point[jmin, imin] = True
        dpt = distance_transform(grid, Region(grid, point))
        q = dpt.values ** 2
        qmax = float(q[work_mask].max()) if work_mask.any() else 1.0
        rng = float(sm.values[work_mask].max() - sm.values[work_mask].min()) \
            if work_mask.any() else 1.0
        coerced = ScalarField(grid, sm.values + coercive * rng * q / max(qmax, 1e-300),
                              defined_mask=sm.defined_mask & dpt.defined_mask)

        amplitude = bump_amplitude * max(rng, 1e-300)
        out, morse_info = morse_regularize(grid, coerced, amplitude, seed=seed)
        report = verify_mean_convex(grid, out, phi_target=phi_target,
                                    grad_floor=floor, sample_mask=work_mask)
        info = {"stages": len(stages), "smooth_cells": cells,
                "coercive": coercive, "grad_floor": floor,
                "min_node": [int(jmin), int(imin)],
                **{f"morse_{k}": v for k, v in morse_info.items()}}
        if best is None or report.min_margin > best[1].min_margin:
            best = (out, report, info)
        if report.passed:
            return out, report, info
    return best


# ---------------------------------------------------------------------------
# verification

@dataclass
class ConvexityReport:
    sampled_count: int
    total_count: int
    sampled_fraction: float
    min_margin: float
    mean_margin: float
    violation_count: int
    critical_points: list[CriticalPoint] = field(default_factory=list)
    max_index: int = 0
    passed: bool = False
    margin_histogram: tuple = ()

    def to_dict(self) -> dict:
        return {
            "sampled_count": self.sampled_count,
            "total_count": self.total_count,
            "sampled_fraction": self.sampled_fraction,
            "min_margin": self.min_margin,
            "mean_margin": self.mean_margin,
            "violation_count": self.violation_count,
            "critical_points": [
                {"node": list(cp.node), "value": cp.value, "index": cp.index,
                 "nondegenerate": cp.nondegenerate}
                for cp in self.critical_points],
            "max_index": self.max_index,
            "pass": self.passed,
            "margin_histogram": [list(x) for x in self.margin_histogram],
        }


def verify_mean_convex(grid: MetricGrid, f, phi_target=0.0,
                       grad_floor: float | None = None,
                       sample_mask: np.ndarray | None = None) -> ConvexityReport:
    """Sample level curvature against the target and check the index bound.

    pass == (min margin > 0 on all sampled nodes) and (all critical
    indices are 0).  Reports, never raises, on well-formed input.
    ``sample_mask`` restricts both sampling and the coverage denominator
    to a region of interest (default: the whole domain).
    """
    kappa = level_mean_curvature(grid, f, grad_floor=grad_floor)
    tgt = as_values(phi_target) if not np.isscalar(phi_target) \
        else float(phi_target)
    margins = kappa.values - tgt
    sel = kappa.defined_mask
    if sample_mask is not None:
        sel = sel & sample_mask
    total = int(grid.domain_mask.sum()) if sample_mask is None \
        else int(sample_mask.sum())
    count = int(sel.sum())
    if count:
        mvals = margins[sel]
        min_m = float(mvals.min())
        mean_m = float(mvals.mean())
        viol = int((mvals <= 0).sum())
        hist = np.histogram(mvals, bins=20)
        histogram = (hist[0].tolist(), hist[1].tolist())
    else:
        min_m = mean_m = float("nan")
        viol = 0
        histogram = ((), ())
    try:
        cps = critical_points(grid, f)
    except ValueError:
        cps = []
    max_index = max((cp.index for cp in cps), default=0)
    passed = count > 0 and min_m > 0 and max_index <= 0
    return ConvexityReport(
        sampled_count=count, total_count=total,
        sampled_fraction=count / max(total, 1),
        min_margin=min_m, mean_margin=mean_m, violation_count=viol,
        critical_points=cps, max_index=max_index, passed=passed,
        margin_histogram=histogram)
