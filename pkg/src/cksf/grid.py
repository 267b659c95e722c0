"""Discrete domain, field storage and full simulation state.

Layout conventions, fixed once for the whole package:

* cell-centered scalars are ``(ny, nx)`` float64 arrays in C order, so the
  flattened array is row-major with x fastest;
* the cell (i, j) has its center at ``((i + 1/2) hx, (j + 1/2) hy)``;
* MAC velocity: ``ux`` lives on vertical faces, shape ``(ny, nx + 1)``;
  ``uy`` lives on horizontal faces, shape ``(ny + 1, nx)``.  Boundary faces
  always carry the value 0 (no-slip walls).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigRangeError, CustomFieldNegative, GridMismatch

#: positivity floor used by the built-in presets for c and m
EPS_FLOOR = 1e-8


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular cell-centered grid with MAC-staggered faces.

    ``lx`` and ``ly`` are re-stored as ``hx * nx`` / ``hy * ny`` after
    computing the spacings, so the products hold exactly in floating point.
    """

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0
    hx: float = field(init=False)
    hy: float = field(init=False)

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ConfigRangeError(f"grid needs nx, ny >= 4, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ConfigRangeError("domain side lengths must be positive")
        hx = self.lx / self.nx
        hy = self.ly / self.ny
        object.__setattr__(self, "hx", hx)
        object.__setattr__(self, "hy", hy)
        object.__setattr__(self, "lx", hx * self.nx)
        object.__setattr__(self, "ly", hy * self.ny)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def cell_centers(self):
        """Return (X, Y) arrays of cell-center coordinates, shape (ny, nx)."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)

    def zeros_cells(self) -> np.ndarray:
        return np.zeros((self.ny, self.nx))

    def zeros_faces_x(self) -> np.ndarray:
        return np.zeros((self.ny, self.nx + 1))

    def zeros_faces_y(self) -> np.ndarray:
        return np.zeros((self.ny + 1, self.nx))


@dataclass
class ScalarField:
    """Cell-centered scalar field; ``values`` has shape (ny, nx)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise GridMismatch(
                f"field shape {self.values.shape} does not match grid "
                f"({self.grid.ny}, {self.grid.nx})"
            )

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField":
        return cls(grid, grid.zeros_cells())

    @classmethod
    def full(cls, grid: Grid2D, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.ny, grid.nx), float(value)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(np.min(self.values))


@dataclass
class MacVelocity:
    """Face-centered velocity; boundary faces are pinned to 0 (no slip)."""

    grid: Grid2D
    ux: np.ndarray
    uy: np.ndarray

    def __post_init__(self):
        self.ux = np.asarray(self.ux, dtype=float)
        self.uy = np.asarray(self.uy, dtype=float)
        g = self.grid
        if self.ux.shape != (g.ny, g.nx + 1) or self.uy.shape != (g.ny + 1, g.nx):
            raise GridMismatch(
                f"velocity shapes {self.ux.shape}/{self.uy.shape} do not match grid"
            )

    @classmethod
    def zeros(cls, grid: Grid2D) -> "MacVelocity":
        return cls(grid, grid.zeros_faces_x(), grid.zeros_faces_y())

    def copy(self) -> "MacVelocity":
        return MacVelocity(self.grid, self.ux.copy(), self.uy.copy())

    def max_face_speed(self) -> float:
        return max(float(np.max(np.abs(self.ux))), float(np.max(np.abs(self.uy))))

    def boundary_faces_zero(self) -> bool:
        return (
            not np.any(self.ux[:, 0])
            and not np.any(self.ux[:, -1])
            and not np.any(self.uy[0, :])
            and not np.any(self.uy[-1, :])
        )

    def zero_boundary_faces(self) -> None:
        self.ux[:, 0] = 0.0
        self.ux[:, -1] = 0.0
        self.uy[0, :] = 0.0
        self.uy[-1, :] = 0.0


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of one run.

    ``alpha`` is the sensitivity exponent of S(n) = c_s (1 + n)^(-alpha),
    ``kappa`` switches between Stokes (0) and Navier-Stokes (otherwise),
    ``phi_gradient`` is the constant gravitational-potential gradient.
    """

    alpha: float = -0.4
    kappa: float = 1.0
    c_s: float = 1.0
    phi_gradient: tuple[float, float] = (0.0, -1.0)
    dt_policy: str = "cfl"  # "cfl" or "fixed"
    dt_max: float = 1e-3
    t_end: float = 2.0
    poisson_tol: float = 1e-10
    implicit_tol: float = 1e-10

    def __post_init__(self):
        if not self.c_s > 0:
            raise ConfigRangeError(f"c_s must be > 0, got {self.c_s}")
        if self.t_end < 0:
            raise ConfigRangeError(f"t_end must be >= 0, got {self.t_end}")
        if not 0 < self.poisson_tol < 1e-4:
            raise ConfigRangeError(f"poisson_tol must be in (0, 1e-4), got {self.poisson_tol}")
        if not 0 < self.implicit_tol < 1e-4:
            raise ConfigRangeError(f"implicit_tol must be in (0, 1e-4), got {self.implicit_tol}")
        if self.dt_policy not in ("cfl", "fixed"):
            raise ConfigRangeError(f"dt_policy must be 'cfl' or 'fixed', got {self.dt_policy!r}")
        if not self.dt_max > 0:
            raise ConfigRangeError(f"dt_max must be > 0, got {self.dt_max}")
        if len(self.phi_gradient) != 2:
            raise ConfigRangeError("phi_gradient must be a 2-vector")


@dataclass(frozen=True)
class InitialRefs:
    """Frozen reference values of the initial data, used by invariant checks.

    ``m_star`` is the ceiling max(sup c0, sup m0) that bounds the signal c
    for all time.
    """

    mass_n0: float
    mass_m0: float
    mass_diff0: float
    sup_m0: float
    sup_c0: float
    m_star: float
    l2_m0_sq: float


@dataclass
class SimState:
    """Full simulation state: the quintuple (n, c, m, u, p) plus bookkeeping.

    The cumulative accumulators are advanced by the stepper:
    ``cum_reaction`` is the running time integral of the fertilization sink,
    ``cum_grad_m`` the running 2*dt*||grad m||_2^2 of the diffusion substeps,
    ``clamp_total`` the total (integrated) mass restored by round-off
    clamping of tiny negative values.
    """

    t: float
    n: ScalarField
    c: ScalarField
    m: ScalarField
    u: MacVelocity
    p: ScalarField
    step_index: int = 0
    refs: InitialRefs | None = None
    cum_reaction: float = 0.0
    cum_grad_m: float = 0.0
    clamp_total: float = 0.0
    last_dt: float = 0.0

    @property
    def grid(self) -> Grid2D:
        return self.n.grid

    def copy(self) -> "SimState":
        return replace(
            self,
            n=self.n.copy(),
            c=self.c.copy(),
            m=self.m.copy(),
            u=self.u.copy(),
            p=self.p.copy(),
        )


def integrate_cellwise(f: ScalarField) -> float:
    """Midpoint-rule cell integral hx*hy*sum(values)."""
    return f.grid.cell_area * float(np.sum(f.values))


def l2_norm_sq(f: ScalarField) -> float:
    """Squared L2 norm hx*hy*sum(values^2)."""
    return f.grid.cell_area * float(np.sum(f.values * f.values))


def velocity_l2_sq(u: MacVelocity) -> float:
    """Squared L2 norm of a MAC field (plain face sum, uniform weights)."""
    return u.grid.cell_area * (float(np.sum(u.ux * u.ux)) + float(np.sum(u.uy * u.uy)))


# ---------------------------------------------------------------------------
# Initial presets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoBlobs:
    """Two separated Gaussian blobs of sperm and egg density.

    Desk-scale defaults: amplitude 5, width 0.08*lx, blob centers at
    (0.35 lx, 0.6 ly) and (0.65 lx, 0.6 ly); the signal starts at the floor.
    """

    amplitude: float = 5.0
    sigma_rel: float = 0.08


@dataclass(frozen=True)
class Uniform:
    n: float = 1.0
    c: float = 1.0
    m: float = 1.0


@dataclass(frozen=True)
class Custom:
    """Initial fields loaded from snapshot files; velocity is optional and
    gets projected to the discretely divergence-free space."""

    n_path: str
    c_path: str
    m_path: str
    ux_path: str | None = None
    uy_path: str | None = None


InitialPreset = TwoBlobs | Uniform | Custom


def _refs_from_fields(n, c, m):
    mass_n0 = integrate_cellwise(n)
    mass_m0 = integrate_cellwise(m)
    sup_m0 = float(np.max(m.values))
    sup_c0 = float(np.max(c.values))
    return InitialRefs(
        mass_n0=mass_n0,
        mass_m0=mass_m0,
        mass_diff0=mass_n0 - mass_m0,
        sup_m0=sup_m0,
        sup_c0=sup_c0,
        m_star=max(sup_c0, sup_m0),
        l2_m0_sq=l2_norm_sq(m),
    )


def make_initial_state(grid: Grid2D, preset: InitialPreset, params: SimParams) -> SimState:
    """Build a validated SimState from a preset.

    Guarantees n >= 0, c > 0, m > 0, u = 0 on boundary faces and u
    discretely divergence-free.
    """
    if isinstance(preset, TwoBlobs):
        X, Y = grid.cell_centers()
        sig = preset.sigma_rel * grid.lx
        a = preset.amplitude
        x1 = (0.35 * grid.lx, 0.6 * grid.ly)
        x2 = (0.65 * grid.lx, 0.6 * grid.ly)
        n = a * np.exp(-((X - x1[0]) ** 2 + (Y - x1[1]) ** 2) / (2 * sig * sig))
        m = a * np.exp(-((X - x2[0]) ** 2 + (Y - x2[1]) ** 2) / (2 * sig * sig)) + EPS_FLOOR
        c = np.full_like(n, EPS_FLOOR)
        u = MacVelocity.zeros(grid)
    elif isinstance(preset, Uniform):
        if preset.n < 0 or preset.c <= 0 or preset.m <= 0:
            raise CustomFieldNegative("uniform preset needs n >= 0, c > 0, m > 0")
        n = np.full((grid.ny, grid.nx), float(preset.n))
        c = np.full((grid.ny, grid.nx), float(preset.c))
        m = np.full((grid.ny, grid.nx), float(preset.m))
        u = MacVelocity.zeros(grid)
    elif isinstance(preset, Custom):
        from .snapshots import load_snapshot

        def load_cells(path, name):
            arr, _ = load_snapshot(path)
            if arr.shape != (grid.ny, grid.nx):
                raise GridMismatch(f"{name} field {arr.shape} does not match grid")
            return arr

        n = load_cells(preset.n_path, "n")
        c = load_cells(preset.c_path, "c")
        m = load_cells(preset.m_path, "m")
        if np.min(n) < 0:
            raise CustomFieldNegative(f"custom n has negative entries (min {np.min(n):g})")
        if np.min(c) <= 0:
            raise CustomFieldNegative(f"custom c must be positive (min {np.min(c):g})")
        if np.min(m) <= 0:
            raise CustomFieldNegative(f"custom m must be positive (min {np.min(m):g})")
        if preset.ux_path and preset.uy_path:
            ux, _ = load_snapshot(preset.ux_path)
            uy, _ = load_snapshot(preset.uy_path)
            u = MacVelocity(grid, ux, uy)
            u.zero_boundary_faces()
            from .fluid import PoissonWorkspace, project

            u, _ = project(u, 1.0, PoissonWorkspace(grid, params.poisson_tol))
        else:
            u = MacVelocity.zeros(grid)
    else:
        raise TypeError(f"unknown preset {preset!r}")

    nf = ScalarField(grid, n)
    cf = ScalarField(grid, c)
    mf = ScalarField(grid, m)
    state = SimState(
        t=0.0,
        n=nf,
        c=cf,
        m=mf,
        u=u,
        p=ScalarField.zeros(grid),
        refs=_refs_from_fields(nf, cf, mf),
    )
    return state


# ---------------------------------------------------------------------------
# State invariant checker
# ---------------------------------------------------------------------------


def check_state_invariants(state: SimState, params: SimParams) -> list[str]:
    """Return the names of violated state invariants (empty list == OK)."""
    bad = []
    g = state.grid
    for name, f in (("n", state.n), ("c", state.c), ("m", state.m), ("p", state.p)):
        if f.values.shape != (g.ny, g.nx):
            bad.append(f"shape:{name}")
    if float(np.min(state.n.values)) < 0:
        bad.append("nonneg:n")
    if float(np.min(state.c.values)) < 0:
        bad.append("nonneg:c")
    if float(np.min(state.m.values)) < 0:
        bad.append("nonneg:m")
    if not state.u.boundary_faces_zero():
        bad.append("noslip:u")

    pmax = float(np.max(np.abs(state.p.values)))
    pmean = abs(float(np.mean(state.p.values)))
    if pmean > 1e-12 * pmax:
        bad.append("pressure_mean_zero")

    from .operators import divergence_mac

    div = divergence_mac(state.u)
    div_bound = params.poisson_tol * (1.0 + state.u.max_face_speed())
    if float(np.max(np.abs(div.values))) > div_bound:
        bad.append("divergence_free:u")
    return bad
