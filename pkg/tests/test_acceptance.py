"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.
"""

import time

import numpy as np
import pytest

from bubblecut import (BubbleSchedule, CutProblem, Region, ScalarField,
                       build_cut_graph, bubble_boundary_curvature,
                       classify_end, level_mean_curvature, minimal_separator,
                       minimize_phi_area, perimeter, shrink_bubbles,
                       signed_distance, torus_systoles, trichotomy,
                       weighted_area)
from bubblecut.bubbles import trim_to_interior
from bubblecut.convexify import (boundary_curvature_fit, corner_smooth,
                                 mollify)
from bubblecut.metrics import euclidean, flat_torus, poincare_disk, warped_cylinder

from helpers import disk_grid, disk_region


def _report(name, ok, detail=""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------
# 1. min-cut exactness

def test_criterion_1_mincut_exactness():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    m = 4
    grid = euclidean(nx=m, ny=m, h=0.3)
    graph = build_cut_graph(grid)
    n_cells = m * m
    areas = graph.cell_area.ravel()
    eu, ev, ew = graph.edge_u, graph.edge_v, graph.weight

    exact = 0
    trials = 0
    while trials < 200:
        phi = rng.uniform(-3, 3, (m, m))
        kind = rng.integers(0, 8, (m, m))
        inc = kind == 0
        exc = kind == 1
        trials += 1
        sol = minimize_phi_area(CutProblem(graph, phi,
                                           must_include=Region(grid, inc),
                                           must_exclude=Region(grid, exc)))
        free = np.flatnonzero(~(inc | exc).ravel())
        nf = free.size
        bits = np.arange(2 ** nf, dtype=np.uint32)
        states = np.zeros((2 ** nf, n_cells), dtype=bool)
        states[:, inc.ravel()] = True
        for b in range(nf):
            states[:, free[b]] = (bits >> b) & 1
        unary = states @ (-(phi.ravel() * areas))
        cut = np.zeros(2 ** nf)
        for e in range(eu.size):
            cut += ew[e] * (states[:, eu[e]] != states[:, ev[e]])
        arg = int(np.argmin(cut + unary))
        best_region = Region(grid, states[arg].reshape(m, m))
        best = perimeter(graph, best_region) - weighted_area(graph,
                                                             best_region, phi)
        if sol.energy == best:
            exact += 1
    dt = time.time() - t0
    _report("1 min-cut exactness",
            exact == 200 and dt < 60.0,
            f"{exact}/200 exact, {dt:.1f}s")


# ---------------------------------------------------------------------------
# 2. perimeter calibration

def test_criterion_2_perimeter_calibration():
    t0 = time.time()
    g = disk_grid(n=256, half=2.0)
    graph = build_cut_graph(g)
    errs = []
    ok = True
    for r in (0.3, 0.5, 1.0):
        p = perimeter(graph, disk_region(g, r))
        rel = abs(p / (2 * np.pi * r) - 1)
        errs.append(f"r={r}: {100 * rel:.2f}%")
        ok &= rel <= 0.03
    gp = poincare_disk(n=256, extent=0.9)
    graphp = build_cut_graph(gp)
    p = perimeter(graphp, disk_region(gp, 0.5))
    rel = abs(p / (8 * np.pi / 3) - 1)
    errs.append(f"hyperbolic: {100 * rel:.2f}%")
    ok &= rel <= 0.04
    dt = time.time() - t0
    _report("2 perimeter calibration", ok and dt < 10.0,
            "; ".join(errs) + f", {dt:.1f}s")


# ---------------------------------------------------------------------------
# 3. phi-bubble identity

def test_criterion_3_phi_bubble_identity():
    n = 256
    g = disk_grid(n=n, half=2.2, domain_radius=2.0)
    X, Y = g.coords()
    R = np.hypot(X, Y)
    graph = build_cut_graph(g)
    outer = Region(g, g.domain_mask & (R >= 1.9))

    # sharp two-level prescription: region and energy
    phi = np.where(R <= 0.5, 10.0, 0.1)
    sol = minimize_phi_area(CutProblem(graph, phi, must_exclude=outer))
    target = R <= 0.5
    mism = sol.region.mask ^ target
    region_ok = not mism.any() or np.abs(R[mism] - 0.5).max() <= 2 * g.h
    e_rel = abs(sol.energy / (-1.5 * np.pi) - 1)

    # ramp of width 0.2 replacing the jump: curvature matches local phi
    s = np.clip((R - 0.4) / 0.2, 0.0, 1.0)
    phi_r = 10.0 * (1 - s) + 0.1 * s
    sol_r = minimize_phi_area(CutProblem(graph, phi_r, must_exclude=outer))
    stats = bubble_boundary_curvature(g, sol_r)
    d = signed_distance(g, sol_r.region)
    band = d.defined_mask & (np.abs(d.values) <= 1.6 * g.h)
    local_phi = float(phi_r[band].mean())
    curv_rel = abs(stats["mean"] / local_phi - 1)

    ok = region_ok and e_rel <= 0.05 and curv_rel <= 0.15
    _report("3 phi-bubble identity", ok,
            f"region within 2h: {region_ok}, energy err {100 * e_rel:.2f}%, "
            f"curvature vs local phi {100 * curv_rel:.1f}%")


# ---------------------------------------------------------------------------
# 4. shrink alternative

def test_criterion_4_shrink_alternative():
    t0 = time.time()
    n = 256
    g = disk_grid(n=n, half=1.1)
    V = disk_region(g, 1.0)
    sched = BubbleSchedule(eps0=0.1, rho=0.1, max_steps=40)
    _, verdict = shrink_bubbles(g, V, np.full((n, n), 0.1), sched)
    disk_ok = verdict.kind == "empties"
    t_disk = time.time() - t0

    t0 = time.time()
    gc = warped_cylinder("cosh", -2.0, 2.0, nx=256, ny=128)
    Vc = Region(gc, gc.domain_mask.copy())
    schedc = BubbleSchedule(eps0=0.1, rho=0.15, max_steps=40)
    _, vc = shrink_bubbles(gc, Vc, np.full((gc.ny, gc.nx), 0.05), schedc)
    t_cosh = time.time() - t0
    _, T = gc.coords()
    cosh_ok = vc.kind == "residual"
    if cosh_ok:
        bnd = vc.residual_region.boundary_cells()
        cosh_ok &= np.abs(T[bnd]).max() <= 3 * gc.h
        cosh_ok &= abs(vc.curvature["mean"]) <= 0.1
        cosh_ok &= abs(vc.residual_length / (2 * np.pi) - 1) <= 0.03
    ok = disk_ok and cosh_ok and t_disk < 120 and t_cosh < 120
    _report("4 shrink alternative", ok,
            f"disk: {verdict.kind} ({t_disk:.0f}s); cosh: {vc.kind}, "
            f"length {vc.residual_length:.4f}, |curv| "
            f"{abs(vc.curvature['mean']):.4f} ({t_cosh:.0f}s)")


# ---------------------------------------------------------------------------
# 5 + 10. trichotomy clause 1 and maximum-principle consistency

@pytest.fixture(scope="module")
def clause_one_reports():
    reports = {}
    n = 256
    h = 4.3 / (n - 1)
    g = euclidean(nx=n, ny=n, h=h)
    X, Y = g.coords()
    dom = Region(g, np.hypot(X, Y) <= 2.0)
    reports["euclidean disk"] = trichotomy(
        g, dom, 0.0, BubbleSchedule(eps0=0.1, rho=0.12, max_steps=40), seed=1)

    gp = poincare_disk(n=256, extent=0.9)
    Xp, Yp = gp.coords()
    domp = Region(gp, gp.domain_mask & (np.hypot(Xp, Yp) <= 0.9))
    reports["poincare patch"] = trichotomy(
        gp, domp, 0.0, BubbleSchedule(eps0=0.2, rho=0.1, max_steps=40), seed=2)
    return reports


def test_criterion_5_trichotomy_certification(clause_one_reports):
    details = []
    ok = True
    for name, rep in clause_one_reports.items():
        conv = rep.get("convexity", {})
        good = (rep["clause"] == 1 and conv.get("pass")
                and conv.get("sampled_fraction", 0) >= 0.95
                and conv.get("max_index", 9) == 0)
        ok &= good
        details.append(f"{name}: clause {rep['clause']}, "
                       f"min margin {conv.get('min_margin', float('nan')):.4f}, "
                       f"sampled {100 * conv.get('sampled_fraction', 0):.1f}%")
    _report("5 trichotomy clause-1 certification", ok, "; ".join(details))


def test_criterion_10_maximum_principle(clause_one_reports):
    counterexamples = 0
    for name, rep in clause_one_reports.items():
        if rep.get("convexity", {}).get("pass"):
            # the residual detector for the same domain must find no closed
            # curve: the shrink ran to empty, leaving no residual at all
            if rep["detector"]["kind"] != "empties":
                counterexamples += 1
    _report("10 maximum-principle consistency", counterexamples == 0,
            f"{counterexamples} counterexamples")


# ---------------------------------------------------------------------------
# 6. minimal separators

def test_criterion_6_separators():
    g = warped_cylinder("flat", 0.0, 2.0, nx=128, ny=128, circumference=1.0)
    X, T = g.coords()
    dom = Region(g, g.domain_mask.copy())
    _, length = minimal_separator(g, dom, Region(g, T <= 0.15),
                                  Region(g, T >= 1.85))
    cyl_rel = abs(length - 1.0)

    gt = flat_torus(nx=128, ny=192, h=1.0 / 128)  # periods 1.0, 1.5
    runs = {r["direction"]: r["length"] for r in torus_systoles(gt)}
    sys_rel = max(abs(runs["x"] / 1.0 - 1), abs(runs["y"] / 1.5 - 1))
    ok = cyl_rel <= 0.03 and sys_rel <= 0.03
    _report("6 minimal separators", ok,
            f"cylinder {length:.4f} (err {100 * cyl_rel:.2f}%), torus "
            f"x={runs['x']:.4f} y={runs['y']:.4f}")


# ---------------------------------------------------------------------------
# 7. end classification

def test_criterion_7_end_classification():
    results = {}

    n = 160
    g = disk_grid(n=n, half=2.15)
    dom = disk_region(g, 2.0)
    X, Y = g.coords()
    end = Region(g, dom.mask & (np.hypot(X, Y) >= 1.85))
    results["disk"] = classify_end(
        g, dom, end, BubbleSchedule(eps0=0.1, rho=0.12, max_steps=25)).end_class

    gc = warped_cylinder("exp_neg", 0.0, 3.0, nx=128, ny=96)
    Xc, T = gc.coords()
    work = trim_to_interior(gc, Region(gc, gc.domain_mask.copy()))
    endc = Region(gc, work.mask & (T >= 2.7))
    results["cusp"] = classify_end(
        gc, work, endc, BubbleSchedule(eps0=0.1, rho=0.2, max_steps=25)).end_class

    gf = warped_cylinder("flat", 0.0, 2.0, nx=96, ny=96, circumference=1.0)
    Xf, Tf = gf.coords()
    workf = trim_to_interior(gf, Region(gf, gf.domain_mask.copy()))
    endf = Region(gf, workf.mask & (Tf >= 1.85))
    results["flat cylinder"] = classify_end(
        gf, workf, endf, BubbleSchedule(eps0=0.1, rho=0.12, max_steps=25)).end_class

    expected = {"disk": "convex_exhaustion", "cusp": "concave_exhaustion",
                "flat cylinder": "minimal_foliation"}
    ok = results == expected
    _report("7 end classification", ok, f"{results}")


# ---------------------------------------------------------------------------
# 8. corner smoothing

def test_criterion_8_corner_smoothing():
    n = 256
    g = disk_grid(n=n, half=1.2)
    X, Y = g.coords()
    lens = Region(g, ((X - 0.5) ** 2 + Y ** 2 <= 1.0)
                  & ((X + 0.5) ** 2 + Y ** 2 <= 1.0))
    delta, eps = 0.05, 0.02
    out = corner_smooth(g, lens, delta, eps)
    d_in = signed_distance(g, lens)
    inside_ok = d_in.values[out.mask].max() <= 1e-9
    d_out = signed_distance(g, out)
    haus = float(d_out.values[lens.mask].max())
    haus_ok = haus <= delta + eps + 2 * g.h
    kappa = boundary_curvature_fit(g, out, 6 * delta)
    curv_ok = kappa.min() >= 0.9
    ok = inside_ok and haus_ok and curv_ok
    _report("8 corner smoothing", ok,
            f"min curvature {kappa.min():.3f} (>= 0.9), hausdorff "
            f"{haus:.4f} <= {delta + eps + 2 * g.h:.4f}")


# ---------------------------------------------------------------------------
# 9. mollifier margin law

def test_criterion_9_mollifier_margin_law():
    g = disk_grid(n=192, half=1.2)
    X, Y = g.coords()
    R = np.hypot(X, Y)
    f = ScalarField(g, R)  # analytic distance cone: margin 1/r, smooth
    work = (R <= 0.8) & (R >= 0.2)

    def margin(field):
        k = level_mean_curvature(g, field, grad_floor=0.2)
        sel = k.defined_mask & work
        return float(k.values[sel].min())

    m0 = margin(f)
    epss = [2 * g.h, 4 * g.h, 8 * g.h]
    margins = [margin(mollify(g, f, e)) for e in epss]
    drops = [max(m0 - m, 0.0) for m in margins]
    C = max(dr / e for dr, e in zip(drops, epss)) + 1e-12
    law_ok = all(m >= m0 - C * e - 1e-12 for m, e in zip(margins, epss))
    no_collapse = min(margins) > 0.5 * m0 and m0 > 0
    ok = law_ok and no_collapse
    _report("9 mollifier margin law", ok,
            f"m={m0:.4f}, margins {[round(m, 4) for m in margins]}, "
            f"fitted C={C:.4f}")
