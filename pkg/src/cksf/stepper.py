"""One full time step via Lie splitting: fluid, transport + implicit
diffusion/relaxation, then the symmetric fertilization reaction.

Every substep is individually monotone under the dt contract enforced by
``choose_dt``: donor-cell transport keeps cell values inside the data range,
backward-Euler diffusion is an M-matrix solve (discrete maximum principle),
and the Patankar-type reaction is unconditionally positivity preserving and
removes identical mass from n and m, which conserves the n-m mass difference
to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import InvariantViolation, MonotonicityViolation, NegativeDensity
from .fluid import PoissonWorkspace, fluid_step
from .grid import ScalarField, SimParams, SimState, integrate_cellwise
from .operators import (
    advect_scalar,
    chemotactic_drift,
    chemotaxis_divergence,
    divergence_mac,
    lap_values,
)
from .solvers import solve_helmholtz

#: CFL safety factor of the adaptive dt policy
CFL_SAFETY = 0.4
#: negative dips smaller than this (from linear-solver round-off) are clamped
CLAMP_WINDOW = 1e-13


@dataclass(frozen=True)
class DtReport:
    """How the step size was chosen."""

    dt_used: float
    limiting_constraint: str  # "advective_cfl" | "chemotactic_cfl" | "fixed"
    max_drift_speed: float  # max over faces of |u| + |S(n_donor) grad c|


def choose_dt(state: SimState, params: SimParams) -> DtReport:
    """Adaptive dt: min(dt_max, safety * min(h) / v_max).

    v_max scans every face for the combined transport speed
    |u| + |S(n_donor) * (grad c)_face|; a zero v_max (or the fixed policy)
    yields dt_max.
    """
    g = state.grid
    drift = chemotactic_drift(state.n, state.c, params)
    speed_x = np.abs(state.u.ux) + np.abs(drift.fx)
    speed_y = np.abs(state.u.uy) + np.abs(drift.fy)
    mx = float(np.max(speed_x))
    my = float(np.max(speed_y))
    v_max = max(mx, my)

    if params.dt_policy == "fixed" or v_max == 0.0:
        return DtReport(params.dt_max, "fixed", v_max)

    dt_cfl = CFL_SAFETY * min(g.hx, g.hy) / v_max
    if dt_cfl >= params.dt_max:
        return DtReport(params.dt_max, "fixed", v_max)

    if mx >= my:
        j, i = np.unravel_index(int(np.argmax(speed_x)), speed_x.shape)
        adv, chemo = abs(state.u.ux[j, i]), abs(drift.fx[j, i])
    else:
        j, i = np.unravel_index(int(np.argmax(speed_y)), speed_y.shape)
        adv, chemo = abs(state.u.uy[j, i]), abs(drift.fy[j, i])
    constraint = "advective_cfl" if adv >= chemo else "chemotactic_cfl"
    return DtReport(dt_cfl, constraint, v_max)


class ScalarSubstepResult(NamedTuple):
    n: ScalarField
    c: ScalarField
    m: ScalarField
    grad_m_sq: float  # ||grad_h m||_2^2 of the post-diffusion m
    clamp_mass: float  # integrated negativity removed by clamping


def _clamp_roundoff(values: np.ndarray, name: str, cell_area: float) -> float:
    """Clamp dips in [-CLAMP_WINDOW, 0) to zero; deeper dips are a bug."""
    vmin = float(np.min(values))
    if vmin >= 0.0:
        return 0.0
    if vmin < -CLAMP_WINDOW:
        raise MonotonicityViolation(
            f"{name} dipped to {vmin:.3e}, below the round-off clamp window"
        )
    neg = values < 0.0
    clamped = -float(np.sum(values[neg])) * cell_area
    values[neg] = 0.0
    return clamped


def scalar_substep(state: SimState, params: SimParams, dt: float) -> ScalarSubstepResult:
    """Transport + implicit diffusion/relaxation for n, c, m (no reaction).

    Explicit donor-cell transport (and chemotaxis for n), then backward
    Euler:  (I - dt L) m = m~,  ((1+dt) I - dt L) c = c~ + dt m~,
    (I - dt L) n = n~.  Postconditions checked: n, m stay nonnegative up to
    the round-off clamp, sup m does not increase, sup c stays below
    max(sup c, sup m), and the cell integral of n is conserved.
    """
    g = state.grid
    u = state.u
    tol = params.implicit_tol
    n, c, m = state.n, state.c, state.m

    n_t = n.values + dt * (
        advect_scalar(n, u).values + chemotaxis_divergence(n, c, params).values
    )
    c_t = c.values + dt * advect_scalar(c, u).values
    m_t = m.values + dt * advect_scalar(m, u).values

    m_new = solve_helmholtz(m_t, g, 1.0, dt, tol)
    c_new = solve_helmholtz(c_t + dt * m_t, g, 1.0 + dt, dt, tol)
    n_new = solve_helmholtz(n_t, g, 1.0, dt, tol)

    clamp = _clamp_roundoff(n_new, "n", g.cell_area)
    clamp += _clamp_roundoff(m_new, "m", g.cell_area)
    clamp += _clamp_roundoff(c_new, "c", g.cell_area)

    sup_m_old = float(np.max(m.values))
    if float(np.max(m_new)) > sup_m_old + 1e-12:
        raise MonotonicityViolation(
            f"sup m grew {sup_m_old:.15g} -> {float(np.max(m_new)):.15g}"
        )
    c_bound = max(float(np.max(c.values)), sup_m_old)
    if float(np.max(c_new)) > c_bound + 1e-12:
        raise MonotonicityViolation(
            f"sup c {float(np.max(c_new)):.15g} above max(sup c, sup m) = {c_bound:.15g}"
        )
    mass_before = g.cell_area * float(np.sum(n.values))
    mass_after = g.cell_area * float(np.sum(n_new))
    if abs(mass_after - mass_before) > 1e-12 * max(mass_before, 1e-300):
        raise MonotonicityViolation(
            f"transport+diffusion changed n mass: {mass_before:.15g} -> {mass_after:.15g}"
        )

    grad_m_sq = -g.cell_area * float(np.sum(lap_values(m_new, g.hx, g.hy) * m_new))
    return ScalarSubstepResult(
        ScalarField(g, n_new), ScalarField(g, c_new), ScalarField(g, m_new), grad_m_sq, clamp
    )


def reaction_substep(n: ScalarField, m: ScalarField, dt: float) -> tuple[ScalarField, ScalarField]:
    """Patankar-type fertilization sink: r = n m / (1 + dt (n + m)).

    Subtracting dt*r from both fields keeps them nonnegative for any dt
    (closed form n (1 + dt n) / (1 + dt (n + m))) and removes identical mass
    from n and m, so the integral of n - m is conserved to round-off.
    """
    if float(np.min(n.values)) < 0 or float(np.min(m.values)) < 0:
        raise NegativeDensity("reaction_substep needs n, m >= 0")
    r = n.values * m.values / (1.0 + dt * (n.values + m.values))
    return ScalarField(n.grid, n.values - dt * r), ScalarField(m.grid, m.values - dt * r)


def _check_step_invariants(old: SimState, new: SimState, params: SimParams) -> None:
    refs = new.refs
    mass_n_old = integrate_cellwise(old.n)
    mass_n_new = integrate_cellwise(new.n)
    if mass_n_new > mass_n_old + 1e-12 * refs.mass_n0:
        raise InvariantViolation(
            "mass_n_monotone", f"{mass_n_old:.15g} -> {mass_n_new:.15g}"
        )
    diff = mass_n_new - integrate_cellwise(new.m)
    if abs(diff - refs.mass_diff0) > 1e-10 * (refs.mass_n0 + refs.mass_m0):
        raise InvariantViolation(
            "mass_diff_conserved", f"{refs.mass_diff0:.15g} -> {diff:.15g}"
        )
    if float(np.max(new.m.values)) > refs.sup_m0 + 1e-9:
        raise InvariantViolation("sup_m_bound", f"{float(np.max(new.m.values)):.15g}")
    if float(np.max(new.c.values)) > refs.m_star + 1e-9:
        raise InvariantViolation("sup_c_bound", f"{float(np.max(new.c.values)):.15g}")

    div_max = float(np.max(np.abs(divergence_mac(new.u).values)))
    allowed = 10.0 * params.poisson_tol * (1.0 + new.u.max_face_speed())
    if div_max > allowed:
        raise InvariantViolation("divergence_free", f"max|div u| = {div_max:.3e}")


def step(state: SimState, params: SimParams, ws: PoissonWorkspace) -> tuple[SimState, DtReport]:
    """Advance one full step: fluid, scalars, reaction; verify invariants."""
    report = choose_dt(state, params)
    dt = report.dt_used
    remaining = params.t_end - state.t
    if 0.0 < remaining < dt:
        dt = remaining
        report = DtReport(dt, "fixed", report.max_drift_speed)

    u_new, p_new = fluid_step(state, params, dt, ws)
    working = replace(state, u=u_new, p=p_new)

    scal = scalar_substep(working, params, dt)
    mass_mid = integrate_cellwise(scal.n)
    n_new, m_new = reaction_substep(scal.n, scal.m, dt)
    reaction_mass = mass_mid - integrate_cellwise(n_new)

    new_state = replace(
        state,
        t=state.t + dt,
        n=n_new,
        c=scal.c,
        m=m_new,
        u=u_new,
        p=p_new,
        step_index=state.step_index + 1,
        cum_reaction=state.cum_reaction + reaction_mass,
        cum_grad_m=state.cum_grad_m + 2.0 * dt * scal.grad_m_sq,
        clamp_total=state.clamp_total + scal.clamp_mass,
        last_dt=dt,
    )
    _check_step_invariants(state, new_state, params)
    return new_state, report
