"""plotkit command line: timeseries and field-panel rendering."""

from __future__ import annotations

import argparse
import sys

from .artifacts import COLUMNS, BadHeader, SchemaMismatch
from .fields import plot_fields
from .timeseries import plot_timeseries


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Plot cksf run artifacts (offline, read-only)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ts = sub.add_parser("timeseries", help="plot diagnostics columns over time")
    ts.add_argument("run_dir")
    ts.add_argument(
        "--columns",
        default="mass_n,mass_diff",
        help=f"comma-separated column names from: {','.join(COLUMNS[1:])}",
    )
    ts.add_argument("--out", default="plots", help="output directory")
    ts.add_argument(
        "--dump", action="store_true",
        help="also write each column's raw CSV values, one per line",
    )

    fl = sub.add_parser("fields", help="heatmap panel of n, m, c (+ u quiver)")
    fl.add_argument("run_dir")
    fl.add_argument("--time", type=float, default=0.0, help="snapshot time to plot")
    fl.add_argument("--out", default="plots", help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "timeseries":
            columns = [c.strip() for c in args.columns.split(",") if c.strip()]
            if not columns:
                print("error: no columns requested", file=sys.stderr)
                return 2
            written = plot_timeseries(args.run_dir, columns, args.out, dump=args.dump)
            for path in written:
                print(path)
            return 0
        if args.command == "fields":
            print(plot_fields(args.run_dir, args.time, args.out))
            return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SchemaMismatch, BadHeader) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
