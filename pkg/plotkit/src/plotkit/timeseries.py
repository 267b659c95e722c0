"""Time-series plots of diagnostics columns."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .artifacts import RunArtifacts


def plot_timeseries(run_dir, columns, out_dir, dump: bool = False) -> list[Path]:
    """One PNG per requested column; mass_diff gets a horizontal reference
    line at its initial value.  With ``dump`` the raw CSV column strings are
    written next to each plot, one value per line, byte-for-byte."""
    arts = RunArtifacts.scan(run_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t = arts.column("t")
    written = []
    for name in columns:
        values = arts.column(name)
        fig, ax = plt.subplots(figsize=(6, 4))
        if len(t) == 1:
            ax.plot(t, values, marker="o")
        else:
            ax.plot(t, values, lw=1.2)
        if name == "mass_diff" and len(values):
            ax.axhline(values[0], color="crimson", ls="--", lw=0.8, label="initial value")
            ax.legend(loc="best", fontsize=8)
        ax.set_xlabel("t")
        ax.set_ylabel(name)
        ax.set_title(f"{name} vs t")
        fig.tight_layout()
        png = out_dir / f"{name}.png"
        fig.savefig(png, dpi=110)
        plt.close(fig)
        written.append(png)
        if dump:
            txt = out_dir / f"{name}.txt"
            txt.write_bytes(("\n".join(arts.raw_column(name)) + "\n").encode("ascii"))
            written.append(txt)
    return written
