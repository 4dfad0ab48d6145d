"""Figure rendering for round reports.

Every chart is drawn from a RoundStats value, the same object the stats
CLI and the dashboard serialize, so figures can never disagree with the
delimited output they sit next to.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analytics import RoundStats
from .domain import Fate

_FATE_COLORS = {
    "A": "#4c72b0", "B1": "#55a868", "B2": "#8cd17d", "C": "#dd8452", "D": "#c44e52",
}


def _bar_from_histogram(ax, histogram: dict[int, int], title: str, xlabel: str) -> None:
    if histogram:
        keys = sorted(histogram)
        ax.bar(keys, [histogram[k] for k in keys], width=0.9, color="#4c72b0")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("examples")


def render_round_figures(stats: RoundStats, outdir: str | Path) -> list[Path]:
    """Write the per-round charts as PNG files; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n = stats.round_number
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    _bar_from_histogram(ax, stats.tries_histogram, f"Round {n}: tries per verified example", "tries")
    paths.append(_save(fig, outdir / f"round{n}_tries_hist.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    _bar_from_histogram(
        ax, stats.seconds_histogram, f"Round {n}: seconds per verified example", "seconds"
    )
    paths.append(_save(fig, outdir / f"round{n}_seconds_hist.png"))

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    _bar_from_histogram(axes[0], stats.context_token_histogram, "Context length", "tokens")
    _bar_from_histogram(axes[1], stats.hypothesis_token_histogram, "Hypothesis length", "tokens")
    fig.suptitle(f"Round {n}: token counts")
    paths.append(_save(fig, outdir / f"round{n}_token_lengths.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    total = sum(stats.fate_counts.values()) or 1
    left = 0.0
    for fate in Fate:
        share = 100.0 * stats.fate_counts.get(fate.value, 0) / total
        ax.barh([0], [share], left=left, color=_FATE_COLORS[fate.value], label=fate.value)
        left += share
    ax.set_xlim(0, 100)
    ax.set_yticks([])
    ax.set_xlabel("% of collected examples")
    ax.set_title(f"Round {n}: outcome proportions")
    ax.legend(ncol=5, loc="upper center", bbox_to_anchor=(0.5, -0.15))
    paths.append(_save(fig, outdir / f"round{n}_fate_proportions.png"))
    return paths


def render_campaign_figures(stats_list: Sequence[RoundStats], outdir: str | Path) -> list[Path]:
    """Cross-round charts: error-rate trend and stacked outcome proportions."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rounds = [s.round_number for s in stats_list]
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rounds, [100 * s.unverified_error_rate for s in stats_list], "o-", label="unverified")
    ax.plot(rounds, [100 * s.verified_error_rate for s in stats_list], "s-", label="verified")
    ax.set_xlabel("round")
    ax.set_ylabel("model error rate (%)")
    ax.set_xticks(rounds)
    ax.set_title("Model error rate by round")
    ax.legend()
    paths.append(_save(fig, outdir / "campaign_error_rates.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    bottoms = [0.0] * len(stats_list)
    for fate in Fate:
        totals = [sum(s.fate_counts.values()) or 1 for s in stats_list]
        shares = [
            100.0 * s.fate_counts.get(fate.value, 0) / t for s, t in zip(stats_list, totals)
        ]
        ax.bar(rounds, shares, bottom=bottoms, label=fate.value, color=_FATE_COLORS[fate.value])
        bottoms = [b + s for b, s in zip(bottoms, shares)]
    ax.set_xlabel("round")
    ax.set_ylabel("% of collected examples")
    ax.set_xticks(rounds)
    ax.set_title("Outcome proportions by round")
    ax.legend(ncol=5, fontsize=8)
    paths.append(_save(fig, outdir / "campaign_fate_proportions.png"))
    return paths


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
