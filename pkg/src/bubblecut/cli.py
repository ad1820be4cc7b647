"""Command-line shell: metric generators, config-driven runs, file emission.

Exit codes: 0 for a clean verdict, 2 when a verification report fails,
1 for configuration or IO errors.  ``BUBBLECUT_THREADS`` caps internal
parallelism (the numba thread pool).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bubbles import (BubbleSchedule, classify_end, grow_bubbles,
                      minimal_separator, shrink_bubbles, trichotomy,
                      trim_to_interior)
from .convexify import StaircaseSpec, staircase, verify_mean_convex
from .cutgraph import build_cut_graph
from .distance import distance_transform
from .grid import MetricGrid, Region
from .io import (OPERATIONS, RunConfig, dump_cut_solution, dump_trace,
                 read_field_csv, read_metric_csv, read_region_pgm,
                 write_field_csv, write_region_pgm, write_report)
from .metrics import generate_metric
from .mincut import CutProblem, minimize_phi_area


def _apply_thread_cap():
    cap = os.environ.get("BUBBLECUT_THREADS")
    if cap:
        try:
            import numba
            numba.set_num_threads(max(1, int(cap)))
        except (ImportError, ValueError):
            pass


def _build_grid(cfg: RunConfig) -> MetricGrid:
    spec = cfg.metric
    if "csv" in spec:
        return read_metric_csv(spec["csv"])
    return generate_metric(spec["name"], spec.get("params"))


def _region_from_spec(grid: MetricGrid, spec, default_all=True) -> Region:
    if spec is None:
        if not default_all:
            raise ValueError("missing region specification")
        return Region(grid, grid.domain_mask.copy())
    if "pgm" in spec:
        return Region(grid, read_region_pgm(spec["pgm"]) & grid.domain_mask)
    X, Y = grid.coords()
    if "disk" in spec:
        d = spec["disk"]
        cx, cy = d.get("center", (0.0, 0.0))
        mask = (X - cx) ** 2 + (Y - cy) ** 2 <= d["radius"] ** 2
        return Region(grid, mask & grid.domain_mask)
    if "band" in spec:
        b = spec["band"]
        coord = Y if b.get("axis", "y") == "y" else X
        mask = (coord >= b.get("min", -np.inf)) & (coord <= b.get("max", np.inf))
        return Region(grid, mask & grid.domain_mask)
    if spec.get("all"):
        return Region(grid, grid.domain_mask.copy())
    raise ValueError(f"unknown region specification {spec!r}")


def _phi_from_spec(grid: MetricGrid, spec) -> np.ndarray:
    if spec is None:
        return np.zeros((grid.ny, grid.nx))
    if "constant" in spec:
        return np.full((grid.ny, grid.nx), float(spec["constant"]))
    if "csv" in spec:
        _, vals = read_field_csv(spec["csv"])
        return vals
    if "two_level" in spec:
        t = spec["two_level"]
        X, Y = grid.coords()
        R = np.hypot(X, Y)
        r0 = t["radius"]
        ramp = float(t.get("ramp", 0.0))
        inner, outer = float(t["inner"]), float(t["outer"])
        if ramp <= 0:
            return np.where(R <= r0, inner, outer)
        s = np.clip((R - (r0 - ramp / 2)) / ramp, 0.0, 1.0)
        return inner + (outer - inner) * s
    raise ValueError(f"unknown phi specification {spec!r}")


def _schedule(cfg: RunConfig) -> BubbleSchedule:
    return BubbleSchedule(**(cfg.schedule or {}))


def run(config: RunConfig) -> int:
    """Execute one configured operation; returns the process exit code."""
    _apply_thread_cap()
    outdir = config.out or "."
    os.makedirs(outdir, exist_ok=True)
    grid = _build_grid(config)
    op = config.operation
    params = config.params or {}

    if op == "distance":
        source = _region_from_spec(grid, params.get("source"), default_all=False)
        d = distance_transform(grid, source)
        write_field_csv(os.path.join(outdir, "distance.csv"), grid, d.values)
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, "max_distance":
                      float(d.values[d.defined_mask].max())})
        return 0

    if op == "solve-bubble":
        phi = _phi_from_spec(grid, config.phi)
        inc = params.get("must_include")
        exc = params.get("must_exclude")
        problem = CutProblem(
            build_cut_graph(grid), phi,
            must_include=None if inc is None else _region_from_spec(grid, inc),
            must_exclude=None if exc is None else _region_from_spec(grid, exc),
            minimizer_choice=params.get("minimizer_choice", "minimal"))
        sol = minimize_phi_area(problem)
        manifest = dump_cut_solution(outdir, grid, phi, sol,
                                     problem.must_include, problem.must_exclude)
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, **manifest})
        return 0

    if op in ("shrink", "grow"):
        phi = _phi_from_spec(grid, config.phi)
        sched = _schedule(config)
        domain = _region_from_spec(grid, config.domain)
        if op == "shrink":
            trace, verdict = shrink_bubbles(grid, domain, phi, sched)
        else:
            ambient = trim_to_interior(grid, domain)
            seed = _region_from_spec(grid, params.get("seed_region"),
                                     default_all=False)
            seed = Region(grid, seed.mask & ambient.mask)
            trace, verdict = grow_bubbles(grid, ambient, seed, phi, sched)
        manifest = dump_trace(outdir, grid, trace, verdict, sched)
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, "seed": config.seed,
                      "verdict": manifest["verdict"]})
        return 0

    if op == "separate":
        domain = _region_from_spec(grid, config.domain)
        endA = _region_from_spec(grid, params.get("endA"), default_all=False)
        endB = _region_from_spec(grid, params.get("endB"), default_all=False)
        curve, length = minimal_separator(grid, domain, endA, endB)
        write_region_pgm(os.path.join(outdir, "separator.pgm"), curve)
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, "length": length,
                      "cells": int(curve.mask.sum())})
        return 0

    if op == "classify":
        domain = _region_from_spec(grid, config.domain)
        end_band = _region_from_spec(grid, params.get("end_band"),
                                     default_all=False)
        verdict = classify_end(grid, domain, end_band, _schedule(config))
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, "end_class": verdict.end_class,
                      "reason": verdict.reason, "extras": verdict.extras})
        return 0 if verdict.end_class is not None else 2

    if op == "staircase":
        pgms = params.get("pgms")
        if not pgms:
            raise ValueError("staircase needs params.pgms, a nested mask list")
        regions = [Region(grid, read_region_pgm(p) & grid.domain_mask)
                   for p in pgms]
        hfield = staircase(grid, StaircaseSpec(regions=regions))
        write_field_csv(os.path.join(outdir, "staircase.csv"), grid,
                        hfield.values)
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, "stages": len(regions)})
        return 0

    if op == "verify":
        _, vals = read_field_csv(params["field_csv"])
        phi = _phi_from_spec(grid, config.phi)
        rep = verify_mean_convex(grid, vals, phi_target=phi,
                                 grad_floor=params.get("grad_floor"))
        write_report(os.path.join(outdir, "report.json"),
                     {"operation": op, **rep.to_dict()})
        return 0 if rep.passed else 2

    if op == "trichotomy":
        domain = _region_from_spec(grid, config.domain)
        sched = _schedule(config)
        report = trichotomy(grid, domain, float(params.get("phi_floor", 0.0)),
                            sched, seed=config.seed)
        if "_function" in report:
            write_field_csv(os.path.join(outdir, "function.csv"), grid,
                            report["_function"].values)
            report["function_csv"] = "function.csv"
        if report.get("_residual_curve") is not None:
            write_region_pgm(os.path.join(outdir, "residual_curve.pgm"),
                             report["_residual_curve"])
            report["residual_curve_pgm"] = "residual_curve.pgm"
        report["operation"] = op
        write_report(os.path.join(outdir, "report.json"), report)
        return 0 if report["clause"] in (1, 2) else 2

    raise ValueError(f"unknown operation {op!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bubblecut",
        description="discrete Riemannian bubble engine")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("run",) + OPERATIONS:
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        config = RunConfig.from_json(args.config)
        if args.verb != "run":
            config.operation = args.verb.replace("_", "-")
        if args.out is not None:
            config.out = args.out
        if args.seed is not None:
            config.seed = args.seed
        code = run(config)
    except (ValueError, OSError, KeyError) as exc:
        print(f"bubblecut: error: {exc}", file=sys.stderr)
        return 1
    if args.verbose:
        print(f"bubblecut: {config.operation} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
