"""Per-step diagnostics: masses, sup norms, energy functionals, cumulative
integrals, and the record-to-record invariant checks.

All quantities use midpoint quadrature and face-difference gradients with a
deterministic summation order, so recomputing a record from the same state
reproduces it bitwise.  CSV values are written as the shortest round-trip
decimal of the 64-bit float (Python ``repr``), newline = LF.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import CksfError
from .fluid import velocity_grad_sq
from .grid import SimState, integrate_cellwise, l2_norm_sq, velocity_l2_sq
from .operators import gradient_faces

#: exact CSV column order; the header row is mandatory
CSV_COLUMNS = (
    "step,t,dt,mass_n,mass_m,mass_diff,sup_n,sup_c,sup_m,sup_u,l2_m_sq,"
    "grad_c_l2,grad_c_l4,entropy,grad_u_l2_sq,lyapunov,cum_reaction,"
    "cum_grad_m,clamp_total"
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    t: float
    dt: float
    mass_n: float
    mass_m: float
    mass_diff: float
    sup_n: float
    sup_c: float
    sup_m: float
    sup_u: float
    l2_m_sq: float
    grad_c_l2: float
    grad_c_l4: float
    entropy: float
    grad_u_l2_sq: float
    lyapunov: float
    cum_reaction: float
    cum_grad_m: float
    clamp_total: float


assert CSV_COLUMNS.split(",") == [f.name for f in fields(DiagnosticsRecord)]


def compute_record(state: SimState, prev: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Compute every monitored functional from the state.

    The cumulative columns (cum_reaction, cum_grad_m, clamp_total) are
    carried by the state itself, already extended step by step, so they
    continue ``prev`` automatically (and start at 0 for a fresh state).
    """
    g = state.grid
    area = g.cell_area
    n, c, m = state.n.values, state.c.values, state.m.values

    mass_n = integrate_cellwise(state.n)
    mass_m = integrate_cellwise(state.m)

    gc = gradient_faces(state.c)
    grad_c_l2_sq = area * (float(np.sum(gc.fx * gc.fx)) + float(np.sum(gc.fy * gc.fy)))
    # |grad c|^2 co-located at cell centers for the L4 power
    gx2 = 0.5 * (gc.fx[:, :-1] ** 2 + gc.fx[:, 1:] ** 2)
    gy2 = 0.5 * (gc.fy[:-1, :] ** 2 + gc.fy[1:, :] ** 2)
    grad_c_l4 = (area * float(np.sum((gx2 + gy2) ** 2))) ** 0.25

    log1pn = np.log1p(n)
    entropy = area * float(np.sum((n + 1.0) * log1pn))
    lyapunov = area * float(np.sum(log1pn)) + velocity_l2_sq(state.u) + grad_c_l2_sq

    return DiagnosticsRecord(
        step=state.step_index,
        t=state.t,
        dt=state.last_dt,
        mass_n=mass_n,
        mass_m=mass_m,
        mass_diff=mass_n - mass_m,
        sup_n=float(np.max(n)),
        sup_c=float(np.max(c)),
        sup_m=float(np.max(m)),
        sup_u=state.u.max_face_speed(),
        l2_m_sq=l2_norm_sq(state.m),
        grad_c_l2=grad_c_l2_sq**0.5,
        grad_c_l4=grad_c_l4,
        entropy=entropy,
        grad_u_l2_sq=velocity_grad_sq(state.u),
        lyapunov=lyapunov,
        cum_reaction=state.cum_reaction,
        cum_grad_m=state.cum_grad_m,
        clamp_total=state.clamp_total,
    )


@dataclass(frozen=True)
class Tolerances:
    """Invariant slacks, anchored at the run's initial record."""

    initial: DiagnosticsRecord
    mass_slack: float = 1e-12
    diff_slack: float = 1e-10
    sup_slack: float = 1e-9
    reaction_slack: float = 1e-8
    l2_slack: float = 1e-6
    clamp_slack: float = 1e-9


@dataclass(frozen=True)
class Violation:
    check: str
    value: float
    bound: float

    def __str__(self):
        return f"{self.check}: {self.value!r} exceeds {self.bound!r} (slack {self.value - self.bound:.3e})"


def assert_invariants(
    curr: DiagnosticsRecord, prev: DiagnosticsRecord, tolerances: Tolerances
) -> list[Violation]:
    """Check all monotonicity/conservation invariants between two records.

    Violations are returned as data, not raised; the caller decides whether
    to abort.
    """
    t = tolerances
    ini = t.initial
    out = []

    def check(name, value, bound):
        if value > bound:
            out.append(Violation(name, value, bound))

    check("mass_n_monotone", curr.mass_n, prev.mass_n + t.mass_slack * ini.mass_n)
    check(
        "mass_diff_conserved",
        abs(curr.mass_diff - ini.mass_diff),
        t.diff_slack * (ini.mass_n + ini.mass_m),
    )
    check("sup_m_bound", curr.sup_m, ini.sup_m + t.sup_slack)
    check("sup_c_bound", curr.sup_c, max(ini.sup_c, ini.sup_m) + t.sup_slack)
    check("cum_reaction_bound", curr.cum_reaction, min(ini.mass_n, ini.mass_m) + t.reaction_slack)
    check("l2_m_dissipation", curr.l2_m_sq + curr.cum_grad_m, ini.l2_m_sq * (1.0 + t.l2_slack))
    check("clamp_bound", curr.clamp_total, t.clamp_slack * ini.mass_n)
    return out


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------


def record_to_row(rec: DiagnosticsRecord) -> str:
    vals = [getattr(rec, f.name) for f in fields(DiagnosticsRecord)]
    return ",".join(str(v) if isinstance(v, int) else repr(float(v)) for v in vals)


class DiagnosticsWriter:
    """Streams records to a diagnostics.csv, flushing each row."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", newline="")
        self._fh.write(CSV_COLUMNS + "\n")
        self._fh.flush()

    def append(self, rec: DiagnosticsRecord) -> None:
        self._fh.write(record_to_row(rec) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path) -> list[DiagnosticsRecord]:
    """Parse a diagnostics.csv written by DiagnosticsWriter."""
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_COLUMNS:
            raise CksfError(f"unexpected diagnostics header: {header!r}")
        recs = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            recs.append(
                DiagnosticsRecord(int(parts[0]), *(float(x) for x in parts[1:]))
            )
    return recs
