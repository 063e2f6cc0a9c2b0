"""Plot-ready data series and rendered figures for a completed run.

Two delimited series files are always written (consumable by any plotting
tool), and the same content is rendered to PNG with matplotlib:

    speeds.csv / speeds.png                  time vs per-vehicle speed
    spacing_errors.csv / spacing_errors.png  time vs per-follower spacing error
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np  # noqa: E402

from .params import RunResult  # noqa: E402


def _write_series(path: Path, header: list[str], times: np.ndarray,
                  columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for k in range(times.size):
        row = [repr(float(times[k]))]
        row.extend(repr(float(col[k])) for col in columns)
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def emit_plot_data(result: RunResult, output_dir: str | Path) -> list[Path]:
    """Write the per-figure CSV series; returns the created paths."""
    if result.times.size == 0:
        raise ValueError("empty run result")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = result.n_vehicles
    speeds_path = out / "speeds.csv"
    _write_series(speeds_path, ["time"] + [f"v{i}" for i in range(n)],
                  result.times, [result.speed[:, i] for i in range(n)])
    errors_path = out / "spacing_errors.csv"
    _write_series(errors_path, ["time"] + [f"e{i}" for i in range(1, n)],
                  result.times, [result.spacing_error[:, i] for i in range(1, n)])
    return [speeds_path, errors_path]


def render_figures(result: RunResult, output_dir: str | Path) -> list[Path]:
    """Render the speed and spacing-error trajectories to PNG files."""
    if result.times.size == 0:
        raise ValueError("empty run result")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = result.n_vehicles
    created = []

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for i in range(n):
        label = "leader" if i == 0 else f"vehicle {i}"
        ax.plot(result.times, result.speed[:, i], lw=1.0, label=label)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("speed [m/s]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out / "speeds.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    created.append(path)

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for i in range(1, n):
        ax.plot(result.times, result.spacing_error[:, i], lw=1.0, label=f"vehicle {i}")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("spacing error [m]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out / "spacing_errors.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    created.append(path)
    return created
