"""Read-only access to a finished run directory.

plotkit consumes the simulator's two external file formats directly (the
19-column diagnostics.csv and CKSF1 binary snapshots) and never mutates a
run directory.  The column order of the CSV is asserted against the fixed
schema, not inferred.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: the fixed diagnostics schema, column order included
CSV_HEADER = (
    "step,t,dt,mass_n,mass_m,mass_diff,sup_n,sup_c,sup_m,sup_u,l2_m_sq,"
    "grad_c_l2,grad_c_l4,entropy,grad_u_l2_sq,lyapunov,cum_reaction,"
    "cum_grad_m,clamp_total"
)
COLUMNS = CSV_HEADER.split(",")

SNAPSHOT_MAGIC = "CKSF1"
CELL_FIELDS = ("n", "c", "m", "p")


class SchemaMismatch(Exception):
    """diagnostics.csv header differs from the fixed schema."""


class BadHeader(Exception):
    """Malformed CKSF1 snapshot header or truncated payload."""


@dataclass(frozen=True)
class Snapshot:
    path: Path
    field_name: str
    nx: int
    ny: int
    time: float

    def load(self) -> np.ndarray:
        with open(self.path, "rb") as fh:
            fh.readline()
            payload = fh.read()
        return np.frombuffer(payload, dtype="<f8").reshape(self.ny, self.nx)


def read_snapshot_header(path: Path) -> Snapshot:
    with open(path, "rb") as fh:
        line = fh.readline(4096)
    if not line.endswith(b"\n"):
        raise BadHeader(f"{path}: header line not terminated")
    try:
        parts = line[:-1].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise BadHeader(f"{path}: non-ASCII header") from exc
    if len(parts) != 5 or parts[0] != SNAPSHOT_MAGIC:
        raise BadHeader(f"{path}: bad header {line!r}")
    try:
        nx, ny, time = int(parts[2]), int(parts[3]), float(parts[4])
    except ValueError as exc:
        raise BadHeader(f"{path}: unparseable header fields") from exc
    if nx <= 0 or ny <= 0:
        raise BadHeader(f"{path}: nonpositive dimensions")
    expected = nx * ny * 8
    payload = path.stat().st_size - len(line)
    if payload != expected:
        raise BadHeader(f"{path}: payload {payload} bytes, expected {expected}")
    return Snapshot(path, parts[1], nx, ny, time)


@dataclass
class RunArtifacts:
    """A run directory: parsed CSV rows (raw strings kept for --dump) and
    the snapshot inventory grouped by field name."""

    run_dir: Path
    header: str
    raw_rows: list[list[str]]
    snapshots: dict[str, list[Snapshot]]

    @classmethod
    def scan(cls, run_dir) -> "RunArtifacts":
        run_dir = Path(run_dir)
        csv_path = run_dir / "diagnostics.csv"
        if not csv_path.exists():
            raise FileNotFoundError(f"no diagnostics.csv in {run_dir}")
        with open(csv_path, newline="") as fh:
            header = fh.readline().rstrip("\n")
            if header != CSV_HEADER:
                raise SchemaMismatch(f"unexpected diagnostics header: {header!r}")
            raw_rows = []
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != len(COLUMNS):
                    raise SchemaMismatch(f"row with {len(parts)} fields: {line!r}")
                raw_rows.append(parts)

        snapshots: dict[str, list[Snapshot]] = {}
        for path in sorted(run_dir.glob("*.cksf")):
            snap = read_snapshot_header(path)
            snapshots.setdefault(snap.field_name, []).append(snap)
        for snaps in snapshots.values():
            snaps.sort(key=lambda s: (s.time, s.path.name))

        cell_shapes = {
            (s.nx, s.ny) for name in CELL_FIELDS for s in snapshots.get(name, [])
        }
        if len(cell_shapes) > 1:
            raise BadHeader(f"cell snapshots disagree on grid shape: {cell_shapes}")
        return cls(run_dir, header, raw_rows, snapshots)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise SchemaMismatch(f"unknown column {name!r}")
        idx = COLUMNS.index(name)
        return np.array([float(row[idx]) for row in self.raw_rows])

    def raw_column(self, name: str) -> list[str]:
        """Column values exactly as they appear in the CSV (for --dump)."""
        if name not in COLUMNS:
            raise SchemaMismatch(f"unknown column {name!r}")
        idx = COLUMNS.index(name)
        return [row[idx] for row in self.raw_rows]

    def snapshot_at(self, field_name: str, time: float) -> Snapshot:
        """The snapshot of a field closest in time to the requested one."""
        snaps = self.snapshots.get(field_name)
        if not snaps:
            raise FileNotFoundError(f"no {field_name} snapshots in {self.run_dir}")
        return min(snaps, key=lambda s: (abs(s.time - time), s.path.name))
