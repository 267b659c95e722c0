"""Run orchestration: single runs with diagnostics/snapshots, and the
(alpha, kappa) regime sweep."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .config import RunConfig, SweepSpec
from .diagnostics import DiagnosticsWriter, Tolerances, assert_invariants, compute_record
from .errors import CksfError, InvariantViolation
from .fluid import PoissonWorkspace
from .grid import SimState, check_state_invariants, make_initial_state
from .snapshots import save_snapshot
from .stepper import step

log = logging.getLogger("cksf")

SNAPSHOT_FIELDS = ("n", "c", "m", "p")


@dataclass(frozen=True)
class RunSummary:
    out_dir: str
    steps: int
    t_final: float
    reached_t_end: bool
    final_mass_n: float
    final_mass_m: float
    initial_sup_n: float
    max_sup_n: float
    violations: int
    wall_time: float

    @property
    def max_sup_n_ratio(self) -> float:
        return self.max_sup_n / self.initial_sup_n if self.initial_sup_n > 0 else math.inf


def _write_snapshots(state: SimState, out: Path) -> None:
    tag = f"{state.step_index:06d}"
    for name in SNAPSHOT_FIELDS:
        field = getattr(state, name)
        save_snapshot(out / f"{name}_{tag}.cksf", name, field.values, state.t)
    save_snapshot(out / f"ux_{tag}.cksf", "ux", state.u.ux, state.t)
    save_snapshot(out / f"uy_{tag}.cksf", "uy", state.u.uy, state.t)


def _write_summary(out: Path, summary: RunSummary, failure: str | None = None) -> None:
    lines = [
        f"steps = {summary.steps}",
        f"t_final = {summary.t_final!r}",
        f"reached_t_end = {str(summary.reached_t_end).lower()}",
        f"final_mass_n = {summary.final_mass_n!r}",
        f"final_mass_m = {summary.final_mass_m!r}",
        f"max_sup_n = {summary.max_sup_n!r}",
        f"violations = {summary.violations}",
        f"wall_time_s = {summary.wall_time:.3f}",
    ]
    if failure:
        lines.append(f"failure = {failure}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")


def run(config: RunConfig) -> RunSummary:
    """Execute one simulation to t_end, streaming diagnostics and snapshots.

    Record-level invariant violations are counted (and logged); hard
    contract violations raised by the stepper abort the run after flushing
    the partial CSV and summary.
    """
    t0 = time.perf_counter()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params

    state = make_initial_state(config.grid, config.preset, params)
    bad = check_state_invariants(state, params)
    if bad:
        raise InvariantViolation("initial_state", ", ".join(bad))

    ws = PoissonWorkspace(config.grid, params.poisson_tol)
    violations = 0
    t_eps = 1e-12 * max(1.0, params.t_end)

    with DiagnosticsWriter(out / "diagnostics.csv") as writer:
        rec = compute_record(state)
        writer.append(rec)
        tol = Tolerances(rec)
        max_sup_n = rec.sup_n
        initial_sup_n = rec.sup_n
        # soft boundedness monitors: logged once, never asserted
        lyap_ceiling = 100.0 * max(rec.lyapunov, 1e-3)
        lyap_flagged = False
        growth_flagged = False
        _write_snapshots(state, out)
        failure = None

        try:
            while state.t < params.t_end - t_eps:
                state, report = step(state, params, ws)
                prev = rec
                rec = compute_record(state, prev)
                for v in assert_invariants(rec, prev, tol):
                    violations += 1
                    log.warning("step %d: %s", state.step_index, v)
                max_sup_n = max(max_sup_n, rec.sup_n)
                if not lyap_flagged and rec.lyapunov > lyap_ceiling:
                    lyap_flagged = True
                    log.warning(
                        "step %d: lyapunov %.3e above 100x its initial value",
                        state.step_index, rec.lyapunov,
                    )
                if not growth_flagged and initial_sup_n > 0 and rec.sup_n > 10.0 * initial_sup_n:
                    growth_flagged = True
                    log.warning(
                        "step %d: sup n grew over 10x its initial value; "
                        "run is suspected unbounded", state.step_index,
                    )
                writer.append(rec)
                if state.step_index % config.snapshot_every == 0:
                    _write_snapshots(state, out)
                if state.step_index % 200 == 0:
                    log.info(
                        "step %d t=%.4f dt=%.2e (%s) mass_n=%.6f sup_n=%.4f",
                        state.step_index, state.t, report.dt_used,
                        report.limiting_constraint, rec.mass_n, rec.sup_n,
                    )
        except CksfError as exc:
            failure = f"{type(exc).__name__}: {exc}"
            log.error("run aborted at step %d: %s", state.step_index, failure)
            violations += 1

        reached = failure is None and state.t >= params.t_end - t_eps
        if state.step_index % config.snapshot_every != 0:
            _write_snapshots(state, out)
        summary = RunSummary(
            out_dir=str(out),
            steps=state.step_index,
            t_final=state.t,
            reached_t_end=reached,
            final_mass_n=rec.mass_n,
            final_mass_m=rec.mass_m,
            initial_sup_n=initial_sup_n,
            max_sup_n=max_sup_n,
            violations=violations,
            wall_time=time.perf_counter() - t0,
        )
        _write_summary(out, summary, failure)
        if failure is not None:
            raise InvariantViolation("run_aborted", failure)
    return summary


# ---------------------------------------------------------------------------
# Regime sweep over (alpha, kappa)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    kappa: float
    completed: bool
    max_sup_n_ratio: float
    violations: int
    bounded: bool


def _run_cell(args) -> SweepRow:
    config, alpha, kappa = args
    cell_dir = Path(config.out_dir) / f"cell_a{alpha:g}_k{kappa:g}"
    cell = replace(
        config,
        params=replace(config.params, alpha=alpha, kappa=kappa),
        out_dir=str(cell_dir),
    )
    try:
        s = run(cell)
        ratio = s.max_sup_n_ratio
        return SweepRow(
            alpha, kappa, s.reached_t_end, ratio, s.violations,
            bool(ratio <= config.bound_ratio and s.violations == 0 and s.reached_t_end),
        )
    except CksfError as exc:
        log.warning("sweep cell (%g, %g) failed: %s", alpha, kappa, exc)
        return SweepRow(alpha, kappa, False, math.nan, 1, False)


def sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Run every (alpha, kappa) pair and write regime.csv in the base out_dir."""
    cells = [(spec.base, a, k) for a in spec.alpha_list for k in spec.kappa_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]

    out = Path(spec.base.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "regime.csv", "w", newline="") as fh:
        fh.write("alpha,kappa,completed,max_sup_n_ratio,violations,bounded\n")
        for r in rows:
            fh.write(
                f"{r.alpha!r},{r.kappa!r},{str(r.completed).lower()},"
                f"{r.max_sup_n_ratio!r},{r.violations},{str(r.bounded).lower()}\n"
            )
    return rows
