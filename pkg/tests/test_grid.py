import numpy as np
import pytest

from cksf import (
    CustomFieldNegative,
    Grid2D,
    GridMismatch,
    MacVelocity,
    ScalarField,
    SimParams,
    TwoBlobs,
    Uniform,
    Custom,
    check_state_invariants,
    integrate_cellwise,
    make_initial_state,
)
from cksf.errors import ConfigRangeError
from cksf.operators import divergence_mac
from cksf.snapshots import save_snapshot

from oracles import integrate_loop


def test_grid_spacing_products_exact():
    for nx, ny, lx, ly in [(4, 5, 1.0, 1.0), (7, 9, 0.1, 2.5), (64, 64, 3.0, 1.0 / 3.0)]:
        g = Grid2D(nx, ny, lx, ly)
        assert g.hx * g.nx == g.lx
        assert g.hy * g.ny == g.ly


def test_grid_cell_centers():
    g = Grid2D(4, 6, 2.0, 3.0)
    X, Y = g.cell_centers()
    assert X.shape == (6, 4)
    assert X[0, 0] == 0.5 * g.hx and Y[0, 0] == 0.5 * g.hy
    assert X[3, 2] == 2.5 * g.hx and Y[3, 2] == 3.5 * g.hy


def test_grid_rejects_tiny_or_negative():
    with pytest.raises(ConfigRangeError):
        Grid2D(3, 8)
    with pytest.raises(ConfigRangeError):
        Grid2D(8, 8, lx=-1.0)


def test_scalar_field_shape_checked():
    g = Grid2D(4, 5)
    with pytest.raises(GridMismatch):
        ScalarField(g, np.zeros((4, 5)))  # transposed
    f = ScalarField.zeros(g)
    assert f.values.shape == (5, 4)


def test_mac_velocity_shapes_and_boundary():
    g = Grid2D(4, 4)
    u = MacVelocity.zeros(g)
    assert u.ux.shape == (4, 5) and u.uy.shape == (5, 4)
    u.ux[:, :] = 1.0
    assert not u.boundary_faces_zero()
    u.zero_boundary_faces()
    assert u.boundary_faces_zero()
    assert u.max_face_speed() == 1.0


def test_integrate_zero_and_ones():
    g = Grid2D(8, 8, 1.0, 1.0)
    assert integrate_cellwise(ScalarField.zeros(g)) == 0.0
    assert integrate_cellwise(ScalarField.full(g, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_integrate_matches_loop_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        nx, ny = int(rng.integers(4, 9)), int(rng.integers(4, 9))
        g = Grid2D(nx, ny, float(rng.uniform(0.5, 2)), float(rng.uniform(0.5, 2)))
        vals = rng.standard_normal((ny, nx))
        got = integrate_cellwise(ScalarField(g, vals))
        want = integrate_loop(vals, g.hx, g.hy)
        assert got == pytest.approx(want, rel=1e-14, abs=1e-15)


def test_integrate_is_linear():
    rng = np.random.default_rng(11)
    g = Grid2D(6, 7, 1.3, 0.8)
    for _ in range(50):
        f = ScalarField(g, rng.standard_normal((7, 6)))
        h = ScalarField(g, rng.standard_normal((7, 6)))
        a, b = rng.standard_normal(2)
        lhs = integrate_cellwise(ScalarField(g, a * f.values + b * h.values))
        rhs = a * integrate_cellwise(f) + b * integrate_cellwise(h)
        scale = abs(lhs) + abs(rhs) + 1e-30
        assert abs(lhs - rhs) <= 1e-13 * scale


def test_uniform_preset_constant_fields():
    g = Grid2D(8, 8)
    params = SimParams()
    s = make_initial_state(g, Uniform(n=1.0, c=1.0, m=1.0), params)
    for f in (s.n, s.c, s.m):
        assert np.all(f.values == f.values[0, 0])
    assert s.u.max_face_speed() == 0.0
    assert np.all(divergence_mac(s.u).values == 0.0)
    assert check_state_invariants(s, params) == []


def test_two_blobs_preset():
    g = Grid2D(32, 32)
    params = SimParams()
    s = make_initial_state(g, TwoBlobs(), params)
    assert integrate_cellwise(s.n) > 0
    assert integrate_cellwise(s.m) > 0
    assert s.c.min() >= 1e-8
    assert s.m.min() >= 1e-8
    assert check_state_invariants(s, params) == []
    assert s.refs.m_star == max(s.refs.sup_c0, s.refs.sup_m0)


def test_custom_preset_negative_cell_rejected(tmp_path):
    g = Grid2D(16, 16)
    vals = np.ones((16, 16))
    vals[3, 5] = -1e-9
    save_snapshot(tmp_path / "n.cksf", "n", vals, 0.0)
    save_snapshot(tmp_path / "c.cksf", "c", np.ones((16, 16)), 0.0)
    save_snapshot(tmp_path / "m.cksf", "m", np.ones((16, 16)), 0.0)
    preset = Custom(str(tmp_path / "n.cksf"), str(tmp_path / "c.cksf"), str(tmp_path / "m.cksf"))
    with pytest.raises(CustomFieldNegative):
        make_initial_state(g, preset, SimParams())


def test_custom_preset_shape_mismatch(tmp_path):
    g = Grid2D(16, 16)
    for name in ("n", "c", "m"):
        save_snapshot(tmp_path / f"{name}.cksf", name, np.ones((8, 8)), 0.0)
    preset = Custom(str(tmp_path / "n.cksf"), str(tmp_path / "c.cksf"), str(tmp_path / "m.cksf"))
    with pytest.raises(GridMismatch):
        make_initial_state(g, preset, SimParams())


def test_custom_preset_with_velocity_is_projected(tmp_path):
    g = Grid2D(16, 16)
    rng = np.random.default_rng(3)
    for name in ("n", "c", "m"):
        save_snapshot(tmp_path / f"{name}.cksf", name, rng.uniform(0.5, 1.5, (16, 16)), 0.0)
    save_snapshot(tmp_path / "ux.cksf", "ux", rng.uniform(-1, 1, (16, 17)), 0.0)
    save_snapshot(tmp_path / "uy.cksf", "uy", rng.uniform(-1, 1, (17, 16)), 0.0)
    preset = Custom(
        str(tmp_path / "n.cksf"),
        str(tmp_path / "c.cksf"),
        str(tmp_path / "m.cksf"),
        str(tmp_path / "ux.cksf"),
        str(tmp_path / "uy.cksf"),
    )
    params = SimParams()
    s = make_initial_state(g, preset, params)
    assert s.u.boundary_faces_zero()
    assert check_state_invariants(s, params) == []


def test_params_validation():
    with pytest.raises(ConfigRangeError):
        SimParams(c_s=0.0)
    with pytest.raises(ConfigRangeError):
        SimParams(poisson_tol=1e-3)
    with pytest.raises(ConfigRangeError):
        SimParams(dt_policy="rk4")
