import numpy as np
import pytest

from bubblecut import MetricGrid, Region, ScalarField, cell_area
from bubblecut.metrics import euclidean


def test_cell_area_flat():
    g = euclidean(nx=8, ny=8, h=0.1)
    assert cell_area(g, (3, 3)) == pytest.approx(0.01)


def test_cell_area_conformal_scaling():
    g = MetricGrid(nx=8, ny=8, h=0.1, lam=np.full((8, 8), 2.0))
    assert cell_area(g, (0, 0)) == pytest.approx(0.04)


def test_cell_area_tensor():
    tensor = np.zeros((8, 8, 3))
    tensor[..., 0] = 4.0
    tensor[..., 2] = 1.0
    g = MetricGrid(nx=8, ny=8, h=0.1, tensor=tensor)
    assert cell_area(g, (2, 5)) == pytest.approx(0.02)


def test_cell_area_outside_domain():
    dom = np.ones((8, 8), bool)
    dom[0, 0] = False
    g = MetricGrid(nx=8, ny=8, h=0.1, lam=np.ones((8, 8)), domain_mask=dom)
    with pytest.raises(ValueError, match="outside domain"):
        cell_area(g, (0, 0))
    with pytest.raises(ValueError, match="outside domain"):
        cell_area(g, (9, 0))


def test_grid_invariants():
    with pytest.raises(ValueError):
        MetricGrid(nx=2, ny=8, h=0.1, lam=np.ones((8, 2)))
    with pytest.raises(ValueError):
        MetricGrid(nx=8, ny=8, h=-1.0, lam=np.ones((8, 8)))
    with pytest.raises(ValueError, match="degenerate metric"):
        MetricGrid(nx=8, ny=8, h=0.1, lam=np.zeros((8, 8)))
    tensor = np.zeros((8, 8, 3))
    tensor[..., 0] = 1.0
    tensor[..., 1] = 2.0  # not positive definite
    tensor[..., 2] = 1.0
    with pytest.raises(ValueError, match="degenerate metric"):
        MetricGrid(nx=8, ny=8, h=0.1, tensor=tensor)


def test_tensor_on_torus_rejected():
    tensor = np.zeros((8, 8, 3))
    tensor[..., 0] = 1.0
    tensor[..., 2] = 1.0
    with pytest.raises(ValueError, match="unsupported combination"):
        MetricGrid(nx=8, ny=8, h=0.1, topology="torus", tensor=tensor)


def test_region_boundary_empty_cases():
    g = euclidean(nx=8, ny=8, h=0.1)
    empty = Region(g, np.zeros((8, 8), bool))
    assert not empty.boundary_cells().any()
    full = Region(g, np.ones((8, 8), bool))
    assert not full.boundary_cells().any()
    mask = np.zeros((8, 8), bool)
    mask[3:5, 3:5] = True
    r = Region(g, mask)
    assert r.boundary_cells().sum() == 4  # the whole 2x2 block is boundary


def test_region_outside_domain_rejected():
    dom = np.ones((8, 8), bool)
    dom[0] = False
    g = MetricGrid(nx=8, ny=8, h=0.1, lam=np.ones((8, 8)), domain_mask=dom)
    bad = np.zeros((8, 8), bool)
    bad[0, 0] = True
    with pytest.raises(ValueError):
        Region(g, bad)


def test_scalar_field_finite_on_mask():
    g = euclidean(nx=8, ny=8, h=0.1)
    vals = np.zeros((8, 8))
    vals[0, 0] = np.nan
    with pytest.raises(ValueError):
        ScalarField(g, vals)
    mask = np.ones((8, 8), bool)
    mask[0, 0] = False
    f = ScalarField(g, vals, defined_mask=mask)
    assert f.range() == 0.0


def test_shift_wraps_by_topology():
    arr = np.arange(64.0).reshape(8, 8)
    plane = euclidean(nx=8, ny=8, h=0.1)
    sh, valid = plane.shift(arr, 0, 1)
    assert not valid[:, -1].any() and valid[:, :-1].all()
    cyl = euclidean(nx=8, ny=8, h=0.1, topology="cylinder")
    sh, valid = cyl.shift(arr, 0, 1)
    assert valid.all() and sh[0, -1] == arr[0, 0]
    sh, valid = cyl.shift(arr, 1, 0)
    assert not valid[-1].any()


def test_transposed_swaps_axes_and_tensor():
    tensor = np.zeros((6, 8, 3))
    tensor[..., 0] = 4.0
    tensor[..., 2] = 9.0
    g = MetricGrid(nx=8, ny=6, h=0.1, tensor=tensor)
    t = g.transposed()
    assert (t.nx, t.ny) == (6, 8)
    assert t.tensor[0, 0, 0] == 9.0 and t.tensor[0, 0, 2] == 4.0
