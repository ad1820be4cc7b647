"""File formats: CSV fields/metrics, PGM masks, JSON configs and reports.

CSV fields carry the header line ``nx,ny,h,topology`` followed by one
row of values per grid row (row-major).  Metrics use the same layout:
one block for a conformal factor, three stacked blocks (g11, g12, g22)
for a tensor.  Region masks are binary PGM (P5), 255 = inside.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import MetricGrid, Region


# ---------------------------------------------------------------------------
# CSV fields and metrics

def _write_header(fh, grid: MetricGrid):
    fh.write("nx,ny,h,topology\n")
    fh.write(f"{grid.nx},{grid.ny},{grid.h!r},{grid.topology}\n")


def _read_header(lines):
    names = lines[0].strip()
    if names != "nx,ny,h,topology":
        raise ValueError("bad CSV header")
    nx_s, ny_s, h_s, topo = lines[1].strip().split(",")
    return int(nx_s), int(ny_s), float(h_s), topo


def write_field_csv(path: str, grid: MetricGrid, values: np.ndarray):
    values = np.asarray(values, dtype=float)
    with open(path, "w") as fh:
        _write_header(fh, grid)
        for row in values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_field_csv(path: str) -> tuple[dict, np.ndarray]:
    with open(path) as fh:
        lines = fh.readlines()
    nx, ny, h, topo = _read_header(lines)
    rows = [np.array(ln.strip().split(","), dtype=float)
            for ln in lines[2:] if ln.strip()]
    vals = np.vstack(rows)
    if vals.shape[1] != nx or vals.shape[0] % ny != 0:
        raise ValueError("CSV body does not match header dimensions")
    return {"nx": nx, "ny": ny, "h": h, "topology": topo}, vals


def write_metric_csv(path: str, grid: MetricGrid):
    with open(path, "w") as fh:
        _write_header(fh, grid)
        blocks = [grid.lam] if grid.is_conformal else \
            [grid.tensor[..., k] for k in range(3)]
        for block in blocks:
            for row in block:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_metric_csv(path: str) -> MetricGrid:
    header, vals = read_field_csv(path)
    nx, ny = header["nx"], header["ny"]
    if vals.shape[0] == ny:
        return MetricGrid(nx=nx, ny=ny, h=header["h"],
                          topology=header["topology"], lam=vals)
    if vals.shape[0] == 3 * ny:
        tensor = np.stack([vals[:ny], vals[ny:2 * ny], vals[2 * ny:]], axis=-1)
        return MetricGrid(nx=nx, ny=ny, h=header["h"],
                          topology=header["topology"], tensor=tensor)
    raise ValueError("metric CSV must hold 1 or 3 blocks of ny rows")


# ---------------------------------------------------------------------------
# PGM masks

def write_region_pgm(path: str, region_or_mask):
    mask = region_or_mask.mask if isinstance(region_or_mask, Region) \
        else np.asarray(region_or_mask, dtype=bool)
    ny, nx = mask.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode())
        fh.write((mask.astype(np.uint8) * 255).tobytes())


def read_region_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError("not a P5 PGM file")
    # header: magic, width height, maxval, then one whitespace byte
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    nx, ny, maxval = fields
    raw = np.frombuffer(data[pos:pos + nx * ny], dtype=np.uint8)
    return (raw.reshape(ny, nx) >= (maxval + 1) // 2)


# ---------------------------------------------------------------------------
# run configuration

_CONFIG_KEYS = {"metric", "operation", "domain", "phi", "schedule", "params",
                "out", "seed"}
_SCHEDULE_KEYS = {"eps0", "decay", "rho", "phi_big", "max_steps",
                  "stall_tolerance", "kappa_tol"}

OPERATIONS = ("solve-bubble", "shrink", "grow", "separate", "classify",
              "trichotomy", "staircase", "verify", "distance")


@dataclass
class RunConfig:
    """Declarative description of one engine run; round-trips through JSON."""

    metric: dict
    operation: str
    domain: dict | None = None
    phi: dict | None = None
    schedule: dict | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.operation not in OPERATIONS:
            raise ValueError(f"unknown operation {self.operation!r}")
        if self.schedule:
            unknown = set(self.schedule) - _SCHEDULE_KEYS
            if unknown:
                raise ValueError(f"unknown schedule keys {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        if "metric" not in data or "operation" not in data:
            raise ValueError("config needs 'metric' and 'operation'")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: v for k, v in out.items() if v is not None or k in
                ("metric", "operation")}

    def to_json(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# reports and dumps

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()
                if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_report(path: str, report: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def dump_cut_solution(outdir: str, grid: MetricGrid, phi: np.ndarray,
                      solution, must_include=None, must_exclude=None) -> dict:
    """Problem and solution files: JSON manifest with CSV/PGM references."""
    os.makedirs(outdir, exist_ok=True)
    write_field_csv(os.path.join(outdir, "phi.csv"), grid, phi)
    write_region_pgm(os.path.join(outdir, "region.pgm"), solution.region)
    manifest = {
        "grid": {"nx": grid.nx, "ny": grid.ny, "h": grid.h,
                 "topology": grid.topology},
        "phi_csv": "phi.csv",
        "region_pgm": "region.pgm",
        "energy": solution.energy,
        "perimeter": solution.perimeter,
        "weighted_area": solution.weighted_area,
    }
    for name, reg in (("must_include", must_include),
                      ("must_exclude", must_exclude)):
        if reg is not None:
            fn = f"{name}.pgm"
            write_region_pgm(os.path.join(outdir, fn), reg)
            manifest[f"{name}_pgm"] = fn
    write_report(os.path.join(outdir, "solution.json"), manifest)
    return manifest


def dump_trace(outdir: str, grid: MetricGrid, trace, verdict,
               schedule) -> dict:
    """Trace export: one PGM per step plus a JSON manifest."""
    os.makedirs(outdir, exist_ok=True)
    masks = []
    for i, m in enumerate(trace.regions):
        fn = f"step_{i:03d}.pgm"
        write_region_pgm(os.path.join(outdir, fn), m)
        masks.append(fn)
    manifest = {
        "schedule": {k: v for k, v in asdict(schedule).items()},
        "steps": masks,
        "energies": [float(e) for e in trace.energies],
        "eps_values": [float(e) for e in trace.eps_values],
        "motions": [float(m) for m in trace.motions],
        "band_constant": trace.band_constant,
        "verdict": {
            "kind": verdict.kind,
            "reason": verdict.reason,
            "end_class": verdict.end_class,
            "residual_length": verdict.residual_length,
            "curvature": verdict.curvature,
            "extras": _jsonable(verdict.extras),
        },
    }
    if verdict.residual_region is not None:
        write_region_pgm(os.path.join(outdir, "residual.pgm"),
                         verdict.residual_region)
        manifest["verdict"]["residual_pgm"] = "residual.pgm"
    if verdict.residual_curve is not None:
        write_region_pgm(os.path.join(outdir, "residual_curve.pgm"),
                         verdict.residual_curve)
        manifest["verdict"]["residual_curve_pgm"] = "residual_curve.pgm"
    write_report(os.path.join(outdir, "trace.json"), manifest)
    return manifest
