"""Field heatmap panels from CKSF1 snapshots."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .artifacts import RunArtifacts


def count_local_maxima(values: np.ndarray) -> int:
    """Strict interior local maxima (greater than all 8 neighbours)."""
    count = 0
    ny, nx = values.shape
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            neighbours = values[j - 1 : j + 2, i - 1 : i + 2].ravel().tolist()
            center = neighbours.pop(4)
            if center > max(neighbours):
                count += 1
    return count


def plot_fields(run_dir, time: float, out_dir) -> Path:
    """2x2 heatmap panel of n, m, c (+ velocity quiver when available).

    n and m share one color scale; c gets its own.  The snapshot set closest
    to the requested time is used.
    """
    arts = RunArtifacts.scan(run_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    snaps = {name: arts.snapshot_at(name, time) for name in ("n", "m", "c")}
    fields = {name: s.load() for name, s in snaps.items()}
    t_used = snaps["n"].time

    fig, axes = plt.subplots(2, 2, figsize=(9, 8))
    nm_max = max(fields["n"].max(), fields["m"].max(), 1e-300)
    for ax, name in zip(axes.flat[:2], ("n", "m")):
        im = ax.imshow(fields[name], origin="lower", vmin=0.0, vmax=nm_max, cmap="viridis")
        ax.set_title(f"{name} (t={snaps[name].time:g})")
        fig.colorbar(im, ax=ax, shrink=0.85)
    im = axes[1, 0].imshow(fields["c"], origin="lower", cmap="magma")
    axes[1, 0].set_title(f"c (t={snaps['c'].time:g})")
    fig.colorbar(im, ax=axes[1, 0], shrink=0.85)

    ax = axes[1, 1]
    try:
        ux = arts.snapshot_at("ux", time).load()
        uy = arts.snapshot_at("uy", time).load()
        ucc = 0.5 * (ux[:, :-1] + ux[:, 1:])
        vcc = 0.5 * (uy[:-1, :] + uy[1:, :])
        speed = float(np.hypot(ucc, vcc).max())
        if speed < 1e-14:  # quiver autoscale chokes on an all-zero field
            ax.axis("off")
            ax.set_title(f"u ~ 0 (max speed {speed:.1e})")
        else:
            stride = max(1, ucc.shape[0] // 16)
            ax.quiver(ucc[::stride, ::stride], vcc[::stride, ::stride])
            ax.set_title("u (cell-centered quiver)")
    except FileNotFoundError:
        ax.axis("off")
        ax.set_title("no velocity snapshots")
    fig.suptitle(f"fields at t={t_used:g}")
    fig.tight_layout()
    png = out_dir / f"fields_t{t_used:g}.png"
    fig.savefig(png, dpi=110)
    plt.close(fig)
    return png
