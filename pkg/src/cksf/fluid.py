"""Velocity update by a non-incremental (Chorin) pressure projection.

One fluid step treats buoyancy and the optional nonlinear convection
explicitly, the viscous term implicitly (backward Euler on each staggered
component with homogeneous Dirichlet walls), and then projects onto the
discretely divergence-free space.  On the MAC grid the cell divergence of
the face gradient IS the 5-point Neumann Laplacian, so the projected field
satisfies max |div u| <= the residual left by the pressure solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CflViolation
from .grid import Grid2D, MacVelocity, ScalarField, SimParams, SimState
from .operators import divergence_mac, gradient_faces, lap_values
from .solvers import cg, neumann_eigenvalues, poisson_dct_solve


@dataclass
class PoissonWorkspace:
    """Scratch state for one simulation's pressure solves (single user)."""

    grid: Grid2D
    tol: float = 1e-10
    last_residual: float = 0.0
    last_iterations: int = 0
    _eig: np.ndarray | None = field(default=None, repr=False)
    _warm: np.ndarray | None = field(default=None, repr=False)

    @property
    def eig(self) -> np.ndarray:
        if self._eig is None:
            self._eig = neumann_eigenvalues(self.grid)
        return self._eig


def _max_iter(grid: Grid2D) -> int:
    return 50 * max(grid.nx, grid.ny) + 100


def pressure_poisson_solve(rhs: ScalarField, ws: PoissonWorkspace, tol: float) -> ScalarField:
    """Solve L p = rhs - mean(rhs) for mean-zero p.

    Preconditioned conjugate gradients on the positive-semidefinite operator
    -L; the constant null space is removed by subtracting the mean from the
    iterate and residual every iteration, and the spectral (cosine
    transform) inverse serves as preconditioner.  Stops when
    ||L p - rhs_corrected||_inf <= tol * (1 + ||rhs||_inf).
    """
    g = rhs.grid
    b = rhs.values
    b_corr = b - b.mean()
    if not np.any(b_corr):
        ws.last_residual = 0.0
        ws.last_iterations = 0
        return ScalarField.zeros(g)

    target = tol * (1.0 + float(np.max(np.abs(b))))
    eig = ws.eig
    x0 = ws._warm if ws._warm is not None else None
    x, res, iters = cg(
        lambda v: -lap_values(v, g.hx, g.hy),
        -b_corr,
        x0,
        target=target,
        max_iter=_max_iter(g),
        precond=lambda r: -poisson_dct_solve(r, eig),
        pin_mean=True,
    )
    ws._warm = x.copy()
    ws.last_residual = res
    ws.last_iterations = iters
    return ScalarField(g, x)


def project(u_star: MacVelocity, dt: float, ws: PoissonWorkspace) -> tuple[MacVelocity, ScalarField]:
    """Remove the gradient part of u_star: u = u_star - dt grad p.

    The pressure solve is run tight enough that
    max |div u| <= poisson_tol * (1 + max face speed), the MacVelocity type
    invariant; boundary faces stay exactly zero.
    """
    g = u_star.grid
    div = divergence_mac(u_star)
    speed = u_star.max_face_speed()
    rhs = ScalarField(g, div.values / dt)

    div_target = ws.tol * (1.0 + speed)
    rhs_sup = float(np.max(np.abs(rhs.values)))
    tol_eff = min(ws.tol, div_target / (dt * (1.0 + rhs_sup)))

    p = pressure_poisson_solve(rhs, ws, tol_eff)
    grad = gradient_faces(p)
    u = MacVelocity(g, u_star.ux - dt * grad.fx, u_star.uy - dt * grad.fy)
    u.zero_boundary_faces()
    return u, p


# ---------------------------------------------------------------------------
# Forces and the viscous/convective operators on staggered components
# ---------------------------------------------------------------------------


def buoyancy_force(n: ScalarField, m: ScalarField, params: SimParams) -> MacVelocity:
    """(n + m) grad(phi) interpolated to faces; zero on boundary faces."""
    g = n.grid
    w = n.values + m.values
    phix, phiy = params.phi_gradient
    f = MacVelocity.zeros(g)
    f.ux[:, 1:-1] = 0.5 * (w[:, :-1] + w[:, 1:]) * phix
    f.uy[1:-1, :] = 0.5 * (w[:-1, :] + w[1:, :]) * phiy
    return f


def _lap_dirichlet_ux(ux: np.ndarray, g: Grid2D) -> np.ndarray:
    """Laplacian of the x velocity: Dirichlet ends in x, no-slip ghost in y."""
    out = np.zeros_like(ux)
    out[:, 1:-1] = (ux[:, 2:] - 2.0 * ux[:, 1:-1] + ux[:, :-2]) / (g.hx * g.hx)
    ypad = np.vstack([-ux[:1, :], ux, -ux[-1:, :]])
    out[:, 1:-1] += (
        (ypad[2:, 1:-1] - 2.0 * ypad[1:-1, 1:-1] + ypad[:-2, 1:-1]) / (g.hy * g.hy)
    )
    return out


def _lap_dirichlet_uy(uy: np.ndarray, g: Grid2D) -> np.ndarray:
    out = np.zeros_like(uy)
    out[1:-1, :] = (uy[2:, :] - 2.0 * uy[1:-1, :] + uy[:-2, :]) / (g.hy * g.hy)
    xpad = np.hstack([-uy[:, :1], uy, -uy[:, -1:]])
    out[1:-1, :] += (
        (xpad[1:-1, 2:] - 2.0 * xpad[1:-1, 1:-1] + xpad[1:-1, :-2]) / (g.hx * g.hx)
    )
    return out


def velocity_grad_sq(u: MacVelocity) -> float:
    """Discrete Dirichlet energy ||grad_h u||_2^2 (includes wall shear)."""
    g = u.grid
    return -g.cell_area * (
        float(np.sum(_lap_dirichlet_ux(u.ux, g) * u.ux))
        + float(np.sum(_lap_dirichlet_uy(u.uy, g) * u.uy))
    )


def convective_term(u: MacVelocity, params: SimParams) -> MacVelocity:
    """kappa (u . grad) u, first-order upwind per staggered component.

    Returns exact zeros for kappa = 0 (the Stokes branch).
    """
    g = u.grid
    out = MacVelocity.zeros(g)
    if params.kappa == 0.0:
        return out
    ux, uy = u.ux, u.uy
    hx, hy = g.hx, g.hy

    # x component on interior x-faces; v is the 4-point uy average there
    uxi = ux[:, 1:-1]
    ddx = np.where(uxi > 0.0, (uxi - ux[:, :-2]) / hx, (ux[:, 2:] - uxi) / hx)
    v_at = 0.25 * (uy[:-1, :-1] + uy[:-1, 1:] + uy[1:, :-1] + uy[1:, 1:])
    ypad = np.vstack([-ux[:1, :], ux, -ux[-1:, :]])
    ddy = np.where(
        v_at > 0.0,
        (ypad[1:-1, 1:-1] - ypad[:-2, 1:-1]) / hy,
        (ypad[2:, 1:-1] - ypad[1:-1, 1:-1]) / hy,
    )
    out.ux[:, 1:-1] = params.kappa * (uxi * ddx + v_at * ddy)

    # y component on interior y-faces; u is the 4-point ux average there
    uyi = uy[1:-1, :]
    ddy = np.where(uyi > 0.0, (uyi - uy[:-2, :]) / hy, (uy[2:, :] - uyi) / hy)
    u_at = 0.25 * (ux[:-1, :-1] + ux[:-1, 1:] + ux[1:, :-1] + ux[1:, 1:])
    xpad = np.hstack([-uy[:, :1], uy, -uy[:, -1:]])
    ddx = np.where(
        u_at > 0.0,
        (xpad[1:-1, 1:-1] - xpad[1:-1, :-2]) / hx,
        (xpad[1:-1, 2:] - xpad[1:-1, 1:-1]) / hx,
    )
    out.uy[1:-1, :] = params.kappa * (uyi * ddy + u_at * ddx)
    return out


def fluid_step(
    state: SimState, params: SimParams, dt: float, ws: PoissonWorkspace
) -> tuple[MacVelocity, ScalarField]:
    """One velocity/pressure update.

    Backward-Euler viscous solve (I - dt L_dirichlet) w = u per component
    (matrix-free CG, warm-started from u), then the explicit pieces
    u* = w + dt (buoyancy - convection), then (u, p) = project(u*, dt).

    Adding the force after the viscous inverse keeps the scheme
    well-balanced: a constant buoyancy on the closed box is a pure discrete
    gradient, so the projection absorbs it into the pressure exactly and the
    rest state stays at the projection-residual level (hydrostatic balance).
    """
    g = state.grid
    u = state.u
    if params.kappa != 0.0:
        if dt * u.max_face_speed() / min(g.hx, g.hy) > 1.0:
            raise CflViolation(
                f"dt={dt:g} exceeds the advective CFL for max speed {u.max_face_speed():g}"
            )

    force = buoyancy_force(state.n, state.m, params)
    conv = convective_term(u, params)

    def viscous_solve(b, lap):
        def apply_a(v):
            return v - dt * lap(v, g)

        target = params.implicit_tol * (1.0 + float(np.max(np.abs(b))))
        x, _, _ = cg(apply_a, b, b, target=target, max_iter=_max_iter(g))
        return x

    ux_star = viscous_solve(u.ux, _lap_dirichlet_ux) + dt * (force.ux - conv.ux)
    uy_star = viscous_solve(u.uy, _lap_dirichlet_uy) + dt * (force.uy - conv.uy)
    u_star = MacVelocity(g, ux_star, uy_star)
    u_star.zero_boundary_faces()

    return project(u_star, dt, ws)
