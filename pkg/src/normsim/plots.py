"""Static vector figures from batch results or previously written CSVs.

Per condition group four SVG files are rendered: trait means (3 panels),
trait variances (3 panels), population properties (6 panels: population,
hypocrite fraction, sanction damage, sanction cost, total consumed,
resource), and noise-gene means (3 panels). Individual runs are light lines,
the cross-run mean is the heavy dark line.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import BatchResult  # noqa: E402

_FAMILIES = (
    ("traits", ("mean_B", "mean_T", "mean_S"), (1, 3)),
    ("variances", ("var_B", "var_T", "var_S"), (1, 3)),
    ("properties",
     ("population", "hypocrite_fraction", "sanction_damage",
      "sanction_cost", "total_consumed", "resource"), (2, 3)),
    ("noise", ("mean_BN", "mean_TN", "mean_SN"), (1, 3)),
)

_LABELS = {
    "mean_B": "mean bite size",
    "mean_T": "mean sanction threshold",
    "mean_S": "mean sanction strength",
    "var_B": "bite size variance",
    "var_T": "sanction threshold variance",
    "var_S": "sanction strength variance",
    "mean_BN": "mean bite noise",
    "mean_TN": "mean threshold noise",
    "mean_SN": "mean strength noise",
    "population": "population",
    "hypocrite_fraction": "hypocrite fraction",
    "sanction_damage": "sanction damage",
    "sanction_cost": "sanction cost",
    "total_consumed": "total consumed",
    "resource": "resource",
}


@dataclass
class PlotGroup:
    """What a figure needs: a label, per-run row dicts, aggregate row dicts."""

    label: str
    runs: list[list[dict]]
    aggregate: list[dict]


def _series(rows: list[dict], column: str) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([r["round"] for r in rows], dtype=float)
    y = np.array([np.nan if r[column] is None else float(r[column]) for r in rows])
    return x, y


def render_groups(groups: list[PlotGroup], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for group in groups:
        if not group.runs:
            print(f"plot: group {group.label} has no runs, nothing to draw",
                  file=sys.stderr)
            continue
        for family, columns, (nrows, ncols) in _FAMILIES:
            fig, axes = plt.subplots(
                nrows, ncols, figsize=(4.0 * ncols, 2.8 * nrows), squeeze=False)
            for ax, col in zip(axes.flat, columns):
                for rows in group.runs:
                    x, y = _series(rows, col)
                    ax.plot(x, y, color="steelblue", alpha=0.35, lw=0.8)
                if group.aggregate:
                    x, y = _series(group.aggregate, col)
                    ax.plot(x, y, color="black", lw=2.0)
                ax.set_title(_LABELS[col], fontsize=9)
                ax.set_xlabel("round", fontsize=8)
                ax.tick_params(labelsize=7)
            fig.suptitle(group.label, fontsize=10)
            fig.tight_layout()
            path = out / f"fig_{family}_{group.label}.svg"
            fig.savefig(path, format="svg")
            plt.close(fig)
            written.append(path)
    return written


def emit_plots(batch: BatchResult, out_dir: str | Path) -> list[Path]:
    """Render every condition group of a batch; returns files written.

    An empty batch writes nothing and says so on stderr.
    """
    groups = [
        PlotGroup(
            label=g.label,
            runs=[[row.as_row() for row in r.rounds] for r in g.runs],
            aggregate=g.aggregate,
        )
        for g in batch.groups
    ]
    if not any(g.runs for g in groups):
        print("plot: batch contains no runs, no figures written", file=sys.stderr)
        return []
    return render_groups(groups, out_dir)
