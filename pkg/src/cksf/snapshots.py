"""CKSF1 snapshot files: one ASCII header line, then raw little-endian
float64 values, row-major with x fastest.

Header: ``CKSF1 <field_name> <nx> <ny> <time>`` followed by LF.  The payload
holds exactly nx*ny values.  The format is dependency-free and bit-exact:
load(save(field)) reproduces the array bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSnapshot

MAGIC = "CKSF1"


@dataclass(frozen=True)
class SnapshotMeta:
    field_name: str
    nx: int
    ny: int
    time: float


def save_snapshot(path, field_name: str, values: np.ndarray, time: float) -> None:
    """Write a (ny, nx)-shaped array; header carries the x-count first."""
    arr = np.ascontiguousarray(values, dtype="<f8")
    if arr.ndim != 2:
        raise BadSnapshot(f"snapshot arrays are 2-D, got shape {arr.shape}")
    ny, nx = arr.shape
    header = f"{MAGIC} {field_name} {nx} {ny} {float(time)!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(arr.tobytes())


def _parse_header(line: bytes, path) -> SnapshotMeta:
    try:
        parts = line.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise BadSnapshot(f"{path}: non-ASCII header") from exc
    if len(parts) != 5 or parts[0] != MAGIC:
        raise BadSnapshot(f"{path}: bad header {line!r}")
    try:
        nx, ny, time = int(parts[2]), int(parts[3]), float(parts[4])
    except ValueError as exc:
        raise BadSnapshot(f"{path}: bad header fields {parts[2:]!r}") from exc
    if nx <= 0 or ny <= 0:
        raise BadSnapshot(f"{path}: nonpositive dimensions {nx}x{ny}")
    return SnapshotMeta(parts[1], nx, ny, time)


def load_snapshot(path) -> tuple[np.ndarray, SnapshotMeta]:
    """Read a snapshot back as a (ny, nx) float64 array plus its metadata."""
    with open(path, "rb") as fh:
        line = fh.readline(4096)
        if not line.endswith(b"\n"):
            raise BadSnapshot(f"{path}: missing header newline")
        meta = _parse_header(line[:-1], path)
        payload = fh.read()
    expected = meta.nx * meta.ny * 8
    if len(payload) != expected:
        raise BadSnapshot(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f8").reshape(meta.ny, meta.nx).copy()
    return arr, meta


def check_snapshot(path) -> SnapshotMeta:
    """Validate header and payload length; returns the parsed metadata."""
    _, meta = load_snapshot(path)
    return meta
