"""Command-line entry point: simulate, sweep, print-defaults, check-snapshot.

The CKSF_LOG environment variable selects verbosity: quiet, info or debug.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import SweepSpec, default_config_text, parse_config
from .errors import CksfError
from .run import run, sweep
from .snapshots import check_snapshot

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    name = os.environ.get("CKSF_LOG", "quiet").lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        print(f"warning: CKSF_LOG={name!r} not in {sorted(_LOG_LEVELS)}", file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _read_config(path: str | None) -> str:
    if path is None:
        return ""
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _overrides(args) -> dict[str, str]:
    pairs = {
        "alpha": args.alpha,
        "kappa": args.kappa,
        "nx": args.nx,
        "dt_max": args.dt,
        "t_end": args.t_end,
        "out_dir": args.out,
    }
    return {k: v for k, v in pairs.items() if v is not None}


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="cksf",
        description="Finite-volume chemotaxis-(Navier-)Stokes fertilization simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation")
    sim.add_argument("--config", help="config file (key = value lines)")
    sim.add_argument("--alpha", help="override sensitivity exponent")
    sim.add_argument("--kappa", help="override convection strength")
    sim.add_argument("--nx", help="override cell count in x")
    sim.add_argument("--dt", help="override dt_max")
    sim.add_argument("--t-end", dest="t_end", help="override end time")
    sim.add_argument("--out", help="override output directory")

    sw = sub.add_parser("sweep", help="run an (alpha, kappa) regime sweep")
    sw.add_argument("--config", help="base config file")
    sw.add_argument("--alphas", required=True, help="comma-separated alpha values")
    sw.add_argument("--kappas", required=True, help="comma-separated kappa values")
    sw.add_argument("--out", help="output directory for cells and regime.csv")
    sw.add_argument("--jobs", type=int, default=1, help="parallel cells")

    sub.add_parser("print-defaults", help="print the default configuration")

    chk = sub.add_parser("check-snapshot", help="validate a CKSF1 snapshot file")
    chk.add_argument("file")

    args = parser.parse_args(argv)

    try:
        if args.command == "print-defaults":
            sys.stdout.write(default_config_text())
            return 0

        if args.command == "check-snapshot":
            meta = check_snapshot(args.file)
            print(f"{args.file}: field={meta.field_name} {meta.nx}x{meta.ny} t={meta.time!r}")
            return 0

        if args.command == "simulate":
            config = parse_config(_read_config(args.config), _overrides(args))
            summary = run(config)
            print(
                f"completed {summary.steps} steps to t={summary.t_final:g} "
                f"({summary.wall_time:.1f}s), violations={summary.violations}"
            )
            return 0 if summary.violations == 0 and summary.reached_t_end else 1

        if args.command == "sweep":
            overrides = {"out_dir": args.out} if args.out else {}
            base = parse_config(_read_config(args.config), overrides)
            try:
                alphas = tuple(float(x) for x in args.alphas.split(",") if x.strip())
                kappas = tuple(float(x) for x in args.kappas.split(",") if x.strip())
            except ValueError:
                print("error: --alphas/--kappas must be comma-separated numbers", file=sys.stderr)
                return 2
            rows = sweep(SweepSpec(alphas, kappas, base), jobs=max(1, args.jobs))
            ok = all(r.completed for r in rows)
            for r in rows:
                print(
                    f"alpha={r.alpha:g} kappa={r.kappa:g} completed={r.completed} "
                    f"ratio={r.max_sup_n_ratio:.3g} violations={r.violations} bounded={r.bounded}"
                )
            return 0 if ok else 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CksfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
