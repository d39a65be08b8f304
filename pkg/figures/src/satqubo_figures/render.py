"""Render the four figure kinds from satqubo CSV outputs.

Inputs are the long-format CSVs written by the satqubo harness; this package
never imports satqubo, only its file formats.  Output format follows the
file extension (.png or .svg); SVG output is made byte-deterministic via a
fixed hash salt and stripped date metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "satqubo-figures"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("stats-box", "metrics-curves", "spectrum-box", "hamming-bars")

REQUIRED_COLUMNS = {
    "stats-box": ("transform", "bits", "distinct_quadratic", "value_range"),
    "metrics-curves": ("transform", "budget", "solved_instances_pct", "correct_solutions_pct"),
    "spectrum-box": ("transform", "ground_deg", "e1_deg", "gap"),
    "hamming-bars": ("transform", "set_pair", "distance", "count"),
}

SET_PAIR_ORDER = ("ground-ground", "excited-excited", "ground-excited")
SET_PAIR_LABELS = {
    "ground-ground": "within ground",
    "excited-excited": "within 1st excited",
    "ground-excited": "ground vs excited",
}


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        if len(self.inputs) != 1:
            raise ValueError(f"{self.kind} takes exactly one input CSV, got {len(self.inputs)}")


def load_rows(path: str, required: Sequence[str]) -> list[dict]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [col for col in required if col not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def transform_order(rows: Iterable[dict]) -> list[str]:
    """Transforms in first-appearance order (the harness writes them grouped)."""
    seen: list[str] = []
    for row in rows:
        if row["transform"] not in seen:
            seen.append(row["transform"])
    return seen


def _grouped_boxplots(ax, rows, transforms, column):
    data = [
        [float(r[column]) for r in rows if r["transform"] == t] for t in transforms
    ]
    ax.boxplot(data, tick_labels=transforms)
    ax.tick_params(axis="x", rotation=30)
    ax.grid(True, alpha=0.3)


def build_stats_box(rows: list[dict]):
    transforms = transform_order(rows)
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    for ax, column, title in zip(
        axes,
        ("bits", "distinct_quadratic", "value_range"),
        ("bits required", "distinct quadratic values", "quadratic value range"),
    ):
        _grouped_boxplots(ax, rows, transforms, column)
        ax.set_title(title)
    fig.suptitle("QUBO matrix properties per transformation")
    fig.tight_layout()
    return fig


def build_metrics_curves(rows: list[dict]):
    transforms = transform_order(rows)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    series = {}
    for t in transforms:
        pts = sorted(
            (int(r["budget"]), float(r["solved_instances_pct"]), float(r["correct_solutions_pct"]))
            for r in rows
            if r["transform"] == t
        )
        series[t] = pts
    for ax, col, title in zip(axes, (1, 2), ("solved instances [%]", "correct solutions [%]")):
        for t in transforms:
            budgets = [p[0] for p in series[t]]
            values = [p[col] for p in series[t]]
            ax.plot(budgets, values, marker="o", label=t)
        ax.set_xscale("log")
        ax.set_xlabel("iterations")
        ax.set_ylabel(title)
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)

    budgets_all = sorted({int(r["budget"]) for r in rows})
    if len(budgets_all) >= 3:
        # inset zooming the upper budget range where the curves cross over
        inset = axes[1].inset_axes([0.55, 0.12, 0.4, 0.45])
        cutoff = budgets_all[len(budgets_all) // 2]
        for t in transforms:
            pts = [(b, v) for b, _, v in series[t] if b >= cutoff]
            if pts:
                inset.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3)
        inset.set_xscale("log")
        inset.tick_params(labelsize=6)
    fig.suptitle("solver performance vs iteration budget")
    fig.tight_layout()
    return fig


def build_spectrum_box(rows: list[dict]):
    transforms = transform_order(rows)
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    for ax, column, title in zip(
        axes,
        ("ground_deg", "e1_deg", "gap"),
        ("ground degeneracy", "1st excited degeneracy", "spectral gap"),
    ):
        _grouped_boxplots(ax, rows, transforms, column)
        ax.set_title(title)
    fig.suptitle("exhaustive spectrum statistics per transformation")
    fig.tight_layout()
    return fig


def build_hamming_bars(rows: list[dict]):
    transforms = transform_order(rows)
    pairs = [p for p in SET_PAIR_ORDER if any(r["set_pair"] == p for r in rows)]
    fig, axes = plt.subplots(
        len(transforms),
        len(pairs),
        figsize=(3.4 * len(pairs), 2.4 * len(transforms)),
        squeeze=False,
    )
    for row_idx, t in enumerate(transforms):
        for col_idx, pair in enumerate(pairs):
            ax = axes[row_idx][col_idx]
            sub = [r for r in rows if r["transform"] == t and r["set_pair"] == pair]
            instances = {r["instance_id"] for r in sub} if sub and "instance_id" in sub[0] else set()
            n_instances = max(len(instances), 1)
            totals: dict[int, float] = {}
            for r in sub:
                d = int(r["distance"])
                totals[d] = totals.get(d, 0.0) + float(r["count"])
            dists = sorted(totals)
            means = [totals[d] / n_instances for d in dists]
            ax.bar(dists, means, width=0.8)
            if row_idx == 0:
                ax.set_title(SET_PAIR_LABELS.get(pair, pair), fontsize=9)
            if col_idx == 0:
                ax.set_ylabel(t, fontsize=8)
            ax.tick_params(labelsize=7)
    fig.suptitle("average Hamming-distance frequency per pair count")
    fig.tight_layout()
    return fig


_BUILDERS = {
    "stats-box": build_stats_box,
    "metrics-curves": build_metrics_curves,
    "spectrum-box": build_spectrum_box,
    "hamming-bars": build_hamming_bars,
}


def build_figure(spec: FigureSpec):
    rows = load_rows(spec.inputs[0], REQUIRED_COLUMNS[spec.kind])
    return _BUILDERS[spec.kind](rows)


def render(spec: FigureSpec) -> Path:
    """Build the figure and write it to spec.output (png or svg)."""
    out = Path(spec.output)
    suffix = out.suffix.lower().lstrip(".")
    if suffix not in ("png", "svg"):
        raise ValueError(f"output must be .png or .svg, got {out.suffix!r}")
    fig = build_figure(spec)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        metadata = {"Date": None} if suffix == "svg" else None
        fig.savefig(out, format=suffix, dpi=150, metadata=metadata)
    finally:
        plt.close(fig)
    return out
