"""cksf: finite-volume simulator for a coupled chemotaxis-(Navier-)Stokes
fertilization model on a rectangle, built so the scheme's provable discrete
properties (mass monotonicity, maximum principles, conserved mass
difference, dissipation inequalities) are machine-checked invariants."""

from .config import RunConfig, SweepSpec, parse_config, serialize_config
from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    Tolerances,
    Violation,
    assert_invariants,
    compute_record,
)
from .errors import (
    BadSnapshot,
    CflViolation,
    CksfError,
    ConfigError,
    ConfigRangeError,
    ConfigTypeError,
    CustomFieldNegative,
    GridMismatch,
    InvariantViolation,
    MonotonicityViolation,
    NegativeDensity,
    NoConvergence,
    UnknownKeyError,
)
from .fluid import (
    PoissonWorkspace,
    buoyancy_force,
    convective_term,
    fluid_step,
    pressure_poisson_solve,
    project,
    velocity_grad_sq,
)
from .grid import (
    Custom,
    Grid2D,
    InitialRefs,
    MacVelocity,
    ScalarField,
    SimParams,
    SimState,
    TwoBlobs,
    Uniform,
    check_state_invariants,
    integrate_cellwise,
    l2_norm_sq,
    make_initial_state,
    velocity_l2_sq,
)
from .operators import (
    FaceFluxField,
    advect_scalar,
    chemotactic_drift,
    chemotaxis_divergence,
    divergence_mac,
    gradient_faces,
    laplacian_neumann,
    sensitivity,
)
from .run import RunSummary, SweepRow, run, sweep
from .snapshots import SnapshotMeta, check_snapshot, load_snapshot, save_snapshot
from .stepper import DtReport, choose_dt, reaction_substep, scalar_substep, step

__version__ = "0.1.0"
