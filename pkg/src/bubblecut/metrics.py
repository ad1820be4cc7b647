"""Deterministic metric-grid generators for the standard test geometries."""

from __future__ import annotations

import numpy as np

from .grid import CYLINDER, PLANE, TORUS, MetricGrid


def euclidean(nx: int = 256, ny: int | None = None, h: float = 0.01,
              topology: str = PLANE, x0: float | None = None,
              y0: float | None = None) -> MetricGrid:
    """Flat unit metric; origin defaults to the grid centre."""
    ny = ny if ny is not None else nx
    if x0 is None:
        x0 = -h * (nx - 1) / 2
    if y0 is None:
        y0 = -h * (ny - 1) / 2
    return MetricGrid(nx=nx, ny=ny, h=h, topology=topology,
                      lam=np.ones((ny, nx)), x0=x0, y0=y0)


def conformal_radial(nx: int = 256, ny: int | None = None, h: float = 0.01,
                     amplitude: float = 0.5, sigma: float = 0.5) -> MetricGrid:
    """Radial conformal bump lambda = 1 + amplitude * exp(-r^2 / 2 sigma^2)."""
    ny = ny if ny is not None else nx
    x0 = -h * (nx - 1) / 2
    y0 = -h * (ny - 1) / 2
    x = x0 + h * np.arange(nx)
    y = y0 + h * np.arange(ny)
    X, Y = np.meshgrid(x, y)
    lam = 1.0 + amplitude * np.exp(-(X ** 2 + Y ** 2) / (2 * sigma ** 2))
    if np.any(lam <= 0):
        raise ValueError("degenerate metric")
    return MetricGrid(nx=nx, ny=ny, h=h, lam=lam, x0=x0, y0=y0)


def poincare_disk(n: int = 256, extent: float = 0.9,
                  pad: float | None = None) -> MetricGrid:
    """Hyperbolic disk patch: lambda = 2/(1 - r^2) on the disk r <= extent + pad.

    The square grid spans [-(extent + pad), extent + pad]^2 and the domain
    is the disk of radius extent + pad, so fields computed for the
    advertised patch r <= extent keep a smoothing apron; the factor never
    degenerates (extent + pad < 1 required).
    """
    if not 0 < extent < 1:
        raise ValueError("extent must lie in (0, 1)")
    if pad is None:
        pad = min(0.55 * (1 - extent), 0.08 * extent)
    if not extent + pad < 1:
        raise ValueError("extent + pad must stay below 1")
    half = extent + pad
    h = 2 * half / (n - 1)
    x = -half + h * np.arange(n)
    X, Y = np.meshgrid(x, x)
    R2 = X ** 2 + Y ** 2
    dom = R2 <= (extent + pad) ** 2
    lam = np.where(R2 < 1.0, 2.0 / np.maximum(1.0 - R2, 1e-12), 1.0)
    return MetricGrid(nx=n, ny=n, h=h, lam=lam, domain_mask=dom,
                      x0=-half, y0=-half)


_PROFILES = {
    "cosh": np.cosh,
    "exp": np.exp,
    "exp_neg": lambda t: np.exp(-t),
    "flat": lambda t: np.ones_like(t),
}


def warped_cylinder(profile="cosh", t_min: float = -2.0, t_max: float = 2.0,
                    nx: int = 256, ny: int = 128,
                    circumference: float = 2 * np.pi) -> MetricGrid:
    """Warped product dt^2 + w(t)^2 dtheta^2 on a cylinder.

    Grid x runs around the cylinder (periodic), y is the axial coordinate
    t; the angular scale is absorbed into the metric so any circumference
    fits the periodic width nx*h exactly.  ``profile`` is a name from
    {cosh, exp, exp_neg, flat} or a callable w(t) > 0.
    """
    w = _PROFILES.get(profile, profile)
    if not callable(w):
        raise ValueError(f"unknown warp profile {profile!r}")
    if not t_max > t_min:
        raise ValueError("empty t range")
    h = (t_max - t_min) / (ny - 1)
    t = t_min + h * np.arange(ny)
    wt = np.asarray(w(t), dtype=float)
    if np.any(wt <= 0):
        raise ValueError("degenerate metric")
    scale = circumference / (nx * h)
    gxx = np.tile((scale * wt[:, None]) ** 2, (1, nx))
    tensor = np.stack([gxx, np.zeros_like(gxx), np.ones_like(gxx)], axis=-1)
    return MetricGrid(nx=nx, ny=ny, h=h, topology=CYLINDER, tensor=tensor,
                      x0=0.0, y0=t_min)


def flat_torus(nx: int = 128, ny: int = 128, h: float = 0.01) -> MetricGrid:
    """Flat torus with periods nx*h and ny*h (conformal, lambda = 1)."""
    return MetricGrid(nx=nx, ny=ny, h=h, topology=TORUS,
                      lam=np.ones((ny, nx)), x0=0.0, y0=0.0)


def perturbed_flat(nx: int = 128, ny: int | None = None, h: float = 0.01,
                   amplitude: float = 0.05, n_bumps: int = 5,
                   seed: int = 0, topology: str = PLANE) -> MetricGrid:
    """Flat metric with small deterministic conformal bumps."""
    ny = ny if ny is not None else nx
    rng = np.random.default_rng(seed)
    x0 = -h * (nx - 1) / 2
    y0 = -h * (ny - 1) / 2
    x = x0 + h * np.arange(nx)
    y = y0 + h * np.arange(ny)
    X, Y = np.meshgrid(x, y)
    lam = np.ones((ny, nx))
    ext = h * max(nx, ny)
    for _ in range(n_bumps):
        cx = rng.uniform(x[0], x[-1])
        cy = rng.uniform(y[0], y[-1])
        sig = rng.uniform(0.1, 0.3) * ext
        lam += amplitude * rng.uniform(-1, 1) * np.exp(
            -((X - cx) ** 2 + (Y - cy) ** 2) / (2 * sig * sig))
    if np.any(lam <= 0):
        raise ValueError("degenerate metric")
    return MetricGrid(nx=nx, ny=ny, h=h, topology=topology, lam=lam,
                      x0=x0, y0=y0)


GENERATORS = {
    "euclidean": euclidean,
    "conformal_radial": conformal_radial,
    "poincare_disk": poincare_disk,
    "warped_cylinder": warped_cylinder,
    "flat_torus": flat_torus,
    "perturbed_flat": perturbed_flat,
}


def generate_metric(name: str, params: dict | None = None) -> MetricGrid:
    """Build a named test geometry; unknown names are rejected."""
    if name not in GENERATORS:
        raise ValueError(f"unknown metric generator {name!r}")
    return GENERATORS[name](**(params or {}))
