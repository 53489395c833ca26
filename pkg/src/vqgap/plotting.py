"""Summary figures rendered next to the CSV reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# keep the PNG bytes a pure function of the data
_SAVE = {"format": "png", "dpi": 120, "metadata": {"Software": None}}


def _finite(v) -> float:
    try:
        v = float(v)
    except (TypeError, ValueError):
        return math.nan
    return v


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, **_SAVE)
    plt.close(fig)
    tmp.replace(path)
    return path


def comparison_figure(rows: list[dict], path: str | Path) -> Path:
    """Bar charts of P_feas, C_feas and C_best per configuration."""
    path = Path(path)
    labels = [r["label"] for r in rows]
    panels = [
        ("P_feas_mean", "P_feas", "P_feas_std"),
        ("C_feas_mean", "C_feas", None),
        ("C_best_mean", "C_best", None),
    ]
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.2))
    x = range(len(rows))
    for ax, (col, title, err) in zip(axes, panels):
        heights = [_finite(r[col]) for r in rows]
        yerr = [_finite(r[err]) for r in rows] if err else None
        ax.bar(x, heights, yerr=yerr, color="0.55", edgecolor="black", capsize=3)
        if col.startswith("C_"):
            ax.axhline(1.0, color="black", linestyle="--", linewidth=0.8)
        ax.set_xticks(list(x), labels, rotation=30, ha="right", fontsize=8)
        ax.set_title(title)
    return _save(fig, path)


def sweep_figure(rows: list[dict], param: str, path: str | Path) -> Path:
    """Mean P_feas against the swept value, one line per configuration."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    by_label: dict[str, list[tuple[float, float, float]]] = {}
    for r in rows:
        by_label.setdefault(r["label"], []).append(
            (_finite(r["value"]), _finite(r["P_feas_mean"]), _finite(r["P_feas_std"]))
        )
    for label, pts in by_label.items():
        pts.sort()
        xs, ys, es = zip(*pts)
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=label)
    ax.set_xlabel(param)
    ax.set_ylabel("P_feas")
    ax.legend(fontsize=8)
    return _save(fig, path)
