import numpy as np
import pytest

from cksf import (
    Grid2D,
    MacVelocity,
    NegativeDensity,
    ScalarField,
    SimParams,
    SimState,
    TwoBlobs,
    Uniform,
    check_state_invariants,
    choose_dt,
    integrate_cellwise,
    make_initial_state,
    reaction_substep,
    scalar_substep,
    step,
)
from cksf.errors import MonotonicityViolation
from cksf.fluid import PoissonWorkspace
from cksf.grid import InitialRefs
from cksf.stepper import _clamp_roundoff

import oracles


def zero_state(grid):
    z = lambda: ScalarField.zeros(grid)
    return SimState(
        t=0.0, n=z(), c=z(), m=z(), u=MacVelocity.zeros(grid), p=z(),
        refs=InitialRefs(0, 0, 0, 0, 0, 0, 0),
    )


def random_state(rng, grid, params):
    n = rng.uniform(0, 2, (grid.ny, grid.nx))
    c = rng.uniform(0, 1, (grid.ny, grid.nx))
    m = rng.uniform(0, 2, (grid.ny, grid.nx))
    from cksf.fluid import project

    u, _ = project(oracles.random_mac(rng, grid), 1.0, PoissonWorkspace(grid, 1e-12))
    u.ux *= 0.3
    u.uy *= 0.3
    nf, cf, mf = ScalarField(grid, n), ScalarField(grid, c), ScalarField(grid, m)
    return SimState(
        t=0.0, n=nf, c=cf, m=mf, u=u, p=ScalarField.zeros(grid),
        refs=InitialRefs(
            integrate_cellwise(nf), integrate_cellwise(mf),
            integrate_cellwise(nf) - integrate_cellwise(mf),
            float(np.max(m)), float(np.max(c)),
            max(float(np.max(c)), float(np.max(m))),
            grid.cell_area * float(np.sum(m * m)),
        ),
    )


# ---------------------------------------------------------------------------
# choose_dt
# ---------------------------------------------------------------------------


def test_choose_dt_zero_state():
    g = Grid2D(8, 8)
    rep = choose_dt(zero_state(g), SimParams(dt_max=0.05))
    assert rep.dt_used == 0.05
    assert rep.limiting_constraint == "fixed"
    assert rep.max_drift_speed == 0.0


def test_choose_dt_known_speed():
    # max face speed 2, h = 0.1, safety 0.4, dt_max = 1 -> dt = 0.02
    g = Grid2D(10, 10, 1.0, 1.0)
    s = zero_state(g)
    s.u.ux[5, 4] = 2.0
    rep = choose_dt(s, SimParams(dt_max=1.0, t_end=10.0))
    assert rep.dt_used == pytest.approx(0.4 * 0.1 / 2.0, rel=1e-14)
    assert rep.limiting_constraint == "advective_cfl"
    assert rep.max_drift_speed == 2.0


def test_choose_dt_chemotactic_constraint():
    g = Grid2D(10, 10)
    s = zero_state(g)
    s.n.values[:] = 1.0
    s.c.values[5, 5] = 3.0  # sharp signal spike drives the drift
    rep = choose_dt(s, SimParams(dt_max=1.0, t_end=10.0, alpha=-0.5))
    assert rep.limiting_constraint == "chemotactic_cfl"
    assert rep.dt_used < 1.0


def test_choose_dt_matches_face_scan_oracle():
    rng = np.random.default_rng(51)
    for _ in range(30):
        g, nvals = oracles.random_grid_and_fields(rng, nonneg=True)
        params = SimParams(
            alpha=float(rng.uniform(-0.9, 1.0)), dt_max=float(rng.uniform(1e-3, 1.0)),
            t_end=10.0,
        )
        s = zero_state(g)
        s.n = ScalarField(g, nvals)
        s.c = ScalarField(g, rng.uniform(0, 1, nvals.shape))
        s.u = oracles.random_mac(rng, g)
        rep = choose_dt(s, params)
        vmax = oracles.vmax_loop(
            s.u.ux, s.u.uy, nvals, s.c.values, g.hx, g.hy, params.c_s, params.alpha
        )
        want = params.dt_max if vmax == 0 else min(
            params.dt_max, 0.4 * min(g.hx, g.hy) / vmax
        )
        assert rep.dt_used == pytest.approx(want, rel=1e-14)
        assert rep.max_drift_speed == pytest.approx(vmax, rel=1e-14)


def test_choose_dt_fixed_policy():
    g = Grid2D(8, 8)
    s = zero_state(g)
    s.u.ux[4, 4] = 100.0
    rep = choose_dt(s, SimParams(dt_policy="fixed", dt_max=0.01, t_end=1.0))
    assert rep.dt_used == 0.01 and rep.limiting_constraint == "fixed"


# ---------------------------------------------------------------------------
# scalar_substep
# ---------------------------------------------------------------------------


def test_scalar_substep_uniform_fields():
    g = Grid2D(8, 8)
    params = SimParams()
    s = make_initial_state(g, Uniform(n=2.0, c=0.5, m=1.5), params)
    dt = 1e-2
    out = scalar_substep(s, params, dt)
    assert np.allclose(out.n.values, 2.0, rtol=1e-13)
    assert np.allclose(out.m.values, 1.5, rtol=1e-13)
    want_c = (0.5 + dt * 1.5) / (1.0 + dt)
    assert np.allclose(out.c.values, want_c, rtol=1e-13)
    assert 0.5 <= out.c.values[0, 0] <= 1.5


def test_scalar_substep_c_decay_without_source():
    g = Grid2D(8, 8)
    params = SimParams()
    s = make_initial_state(g, Uniform(n=0.0, c=1.0, m=1e-300), params)
    s.m.values[:] = 0.0
    dt = 0.05
    c = 1.0
    for _ in range(3):
        out = scalar_substep(s, params, dt)
        c /= 1.0 + dt
        assert np.allclose(out.c.values, c, rtol=1e-12)
        s.n, s.c, s.m = out.n, out.c, out.m


def test_scalar_substep_matches_dense_oracle():
    rng = np.random.default_rng(61)
    from cksf.operators import advect_scalar, chemotaxis_divergence

    for _ in range(10):
        g = Grid2D(int(rng.integers(4, 9)), int(rng.integers(4, 9)))
        params = SimParams(alpha=float(rng.uniform(-0.5, 0.5)))
        s = random_state(rng, g, params)
        dt = float(rng.uniform(1e-4, 5e-3))
        out = scalar_substep(s, params, dt)

        # same explicit transport, independent dense solve of the three systems
        n_t = s.n.values + dt * (
            advect_scalar(s.n, s.u).values + chemotaxis_divergence(s.n, s.c, params).values
        )
        c_t = s.c.values + dt * advect_scalar(s.c, s.u).values
        m_t = s.m.values + dt * advect_scalar(s.m, s.u).values
        lap = oracles.laplacian_dense(g.nx, g.ny, g.hx, g.hy)
        eye = np.eye(g.nx * g.ny)
        m_want = np.linalg.solve(eye - dt * lap, m_t.ravel()).reshape(m_t.shape)
        c_want = np.linalg.solve(
            (1 + dt) * eye - dt * lap, (c_t + dt * m_t).ravel()
        ).reshape(c_t.shape)
        n_want = np.linalg.solve(eye - dt * lap, n_t.ravel()).reshape(n_t.shape)
        assert np.allclose(out.m.values, m_want, rtol=1e-10, atol=1e-12)
        assert np.allclose(out.c.values, c_want, rtol=1e-10, atol=1e-12)
        assert np.allclose(out.n.values, n_want, rtol=1e-10, atol=1e-12)


def test_diffusion_energy_identity():
    # backward Euler satisfies ||m1||^2 + ||m1 - m0||^2 + 2 dt ||grad m1||^2
    # = ||m0||^2 exactly; grad_m_sq must use the matching discrete form
    rng = np.random.default_rng(77)
    from cksf.operators import lap_values
    from cksf.solvers import solve_helmholtz

    for _ in range(10):
        g = Grid2D(int(rng.integers(4, 12)), int(rng.integers(4, 12)))
        m0 = rng.uniform(0, 2, (g.ny, g.nx))
        dt = float(rng.uniform(1e-4, 1e-2))
        m1 = solve_helmholtz(m0, g, 1.0, dt, 1e-12)
        grad_sq = -g.cell_area * float(np.sum(lap_values(m1, g.hx, g.hy) * m1))
        lhs = g.cell_area * (float(np.sum(m1 * m1)) + float(np.sum((m1 - m0) ** 2)))
        rhs = g.cell_area * float(np.sum(m0 * m0))
        assert lhs + 2 * dt * grad_sq == pytest.approx(rhs, rel=1e-11)


def test_scalar_substep_mass_and_sup_contracts():
    rng = np.random.default_rng(71)
    g = Grid2D(8, 8)
    params = SimParams()
    for _ in range(10):
        s = random_state(rng, g, params)
        out = scalar_substep(s, params, 1e-3)
        assert integrate_cellwise(out.n) == pytest.approx(
            integrate_cellwise(s.n), rel=1e-12
        )
        assert float(np.max(out.m.values)) <= float(np.max(s.m.values)) + 1e-12
        assert out.n.min() >= 0.0 and out.m.min() >= 0.0
        assert out.grad_m_sq >= 0.0


# ---------------------------------------------------------------------------
# reaction_substep
# ---------------------------------------------------------------------------


def test_reaction_zero_fields_unchanged():
    g = Grid2D(4, 4)
    n, m = reaction_substep(ScalarField.zeros(g), ScalarField.zeros(g), 0.5)
    assert np.all(n.values == 0.0) and np.all(m.values == 0.0)


def test_reaction_symmetric_unit_case():
    g = Grid2D(4, 4)
    n, m = reaction_substep(ScalarField.full(g, 1.0), ScalarField.full(g, 1.0), 0.5)
    assert np.allclose(n.values, 0.75, rtol=1e-15)
    assert np.allclose(m.values, 0.75, rtol=1e-15)


def test_reaction_conserves_difference_and_positivity():
    rng = np.random.default_rng(81)
    g = Grid2D(8, 8)
    for dt in (1e-3, 0.5, 50.0):
        n0 = rng.uniform(0, 5, (8, 8))
        m0 = rng.uniform(0, 5, (8, 8))
        n, m = reaction_substep(ScalarField(g, n0), ScalarField(g, m0), dt)
        assert n.min() >= 0.0 and m.min() >= 0.0  # unconditional positivity
        diff0 = integrate_cellwise(ScalarField(g, n0 - m0))
        diff1 = integrate_cellwise(n) - integrate_cellwise(m)
        scale = integrate_cellwise(ScalarField(g, n0 + m0))
        assert abs(diff1 - diff0) <= 1e-13 * scale
        # closed form n (1 + dt n) / (1 + dt (n + m))
        want = n0 * (1 + dt * n0) / (1 + dt * (n0 + m0))
        assert np.allclose(n.values, want, rtol=1e-13)


def test_reaction_rejects_negative():
    g = Grid2D(4, 4)
    with pytest.raises(NegativeDensity):
        reaction_substep(ScalarField.full(g, -1.0), ScalarField.zeros(g), 0.1)


# ---------------------------------------------------------------------------
# clamp window
# ---------------------------------------------------------------------------


def test_clamp_window_small_dips_are_logged():
    vals = np.array([[1.0, -5e-14], [2.0, 0.0]])
    clamped = _clamp_roundoff(vals, "n", cell_area=0.25)
    assert vals[0, 1] == 0.0
    assert clamped == pytest.approx(5e-14 * 0.25)


def test_clamp_window_deep_dip_raises():
    vals = np.array([[1.0, -1e-12], [2.0, 0.0]])
    with pytest.raises(MonotonicityViolation):
        _clamp_roundoff(vals, "n", cell_area=0.25)


# ---------------------------------------------------------------------------
# step
# ---------------------------------------------------------------------------


def test_step_rest_state_is_fixed_point():
    g = Grid2D(8, 8)
    params = SimParams(t_end=1.0)
    s = zero_state(g)
    ws = PoissonWorkspace(g, params.poisson_tol)
    s2, rep = step(s, params, ws)
    assert rep.dt_used == params.dt_max
    for f in (s2.n, s2.c, s2.m, s2.p):
        assert np.all(f.values == 0.0)
    assert s2.u.max_face_speed() == 0.0
    assert s2.t == params.dt_max and s2.step_index == 1


def test_step_uniform_ode_reduction():
    # uniform n = m reduces to n' = -n^2, n(t) = 1/(1+t)
    g = Grid2D(8, 8)
    params = SimParams(kappa=0.0, t_end=0.2, dt_max=1e-3)
    s = make_initial_state(g, Uniform(n=1.0, c=1.0, m=1.0), params)
    ws = PoissonWorkspace(g, params.poisson_tol)
    while s.t < params.t_end - 1e-12:
        s, _ = step(s, params, ws)
    want = 1.0 / (1.0 + s.t)
    got = float(s.n.values[0, 0])
    assert np.allclose(s.n.values, got, rtol=1e-12)  # stays uniform
    assert got == pytest.approx(want, rel=2e-3)
    assert integrate_cellwise(s.n) == pytest.approx(integrate_cellwise(s.m), abs=1e-14)


def test_step_two_blobs_passes_invariant_checker():
    g = Grid2D(32, 32)
    params = SimParams(t_end=1.0)
    s = make_initial_state(g, TwoBlobs(), params)
    ws = PoissonWorkspace(g, params.poisson_tol)
    s2, _ = step(s, params, ws)
    assert check_state_invariants(s2, params) == []
    assert s2.cum_reaction >= 0.0
    assert s2.cum_grad_m > 0.0


def test_step_clips_dt_at_t_end():
    g = Grid2D(8, 8)
    params = SimParams(t_end=0.0025, dt_max=1e-3)
    s = make_initial_state(g, Uniform(), params)
    ws = PoissonWorkspace(g, params.poisson_tol)
    dts = []
    while s.t < params.t_end - 1e-15:
        s, rep = step(s, params, ws)
        dts.append(rep.dt_used)
    assert dts == pytest.approx([1e-3, 1e-3, 5e-4])
    assert s.t == pytest.approx(0.0025, abs=1e-15)
