"""The four figure kinds rendered from simulation CSV bundles.

Every function is a pure function of the CSV content: groups are sorted, the
style is pinned (fixed figure size, dpi and color cycle) and nothing depends
on wall-clock state, so re-rendering the same inputs reproduces the same
pixels.  Box glyphs show quartiles with min/max whiskers, matching the
summary statistics emitted by the simulator.
"""

from __future__ import annotations

import sys
import warnings

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from . import readers

FIGSIZE = (8.0, 4.5)
DPI = 110
COLORS = ["#e9d3cf", "#bf8fa0", "#7c5277", "#2c2239", "#2b8cbe", "#e34a33"]


def _finish(fig, out_path: str) -> None:
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def _group_labels(df: pd.DataFrame) -> list[str]:
    return sorted(df["scenario_name"].unique())


def plot_pl_curves(in_path: str, out_path: str) -> None:
    """Path loss vs distance for the three propagation variants."""
    df = readers.read_curves(in_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    styles = [
        ("classical_two_ray_db", "2-ray", "-", COLORS[4]),
        ("modified_two_ray_db", "modified 2-ray", ":", COLORS[5]),
        ("free_space_db", "free space", "--", "#666666"),
    ]
    for col, label, ls, color in styles:
        ax.plot(df["d_m"], df[col], ls, color=color, label=label, linewidth=1.4)
    ax.set_xlabel("Distance [m]")
    ax.set_ylabel("Path loss [dB]")
    ax.grid(True, alpha=0.4)
    ax.legend()
    _finish(fig, out_path)


def _boxes(ax, df: pd.DataFrame, x_values, groups, stat_prefix: str, unit_scale: float = 1.0):
    """Grouped boxes from precomputed quartile/whisker columns."""
    width = 0.8 / max(len(groups), 1)
    for gi, group in enumerate(groups):
        stats = []
        positions = []
        for xi, x in enumerate(x_values):
            sel = df[(df["scenario_name"] == group) & (df["_x"] == x)]
            if sel.empty or sel[f"{stat_prefix}_p50"].isna().all():
                continue
            # Several runs per point: average each box statistic.
            row = sel[[f"{stat_prefix}_{s}" for s in ("min", "p25", "p50", "p75", "max")]].mean()
            stats.append(
                {
                    "med": row[f"{stat_prefix}_p50"] * unit_scale,
                    "q1": row[f"{stat_prefix}_p25"] * unit_scale,
                    "q3": row[f"{stat_prefix}_p75"] * unit_scale,
                    "whislo": row[f"{stat_prefix}_min"] * unit_scale,
                    "whishi": row[f"{stat_prefix}_max"] * unit_scale,
                    "fliers": [],
                }
            )
            positions.append(xi + (gi - (len(groups) - 1) / 2) * width)
        if stats:
            art = ax.bxp(stats, positions=positions, widths=width * 0.9, showfliers=False, patch_artist=True)
            for patch in art["boxes"]:
                patch.set_facecolor(COLORS[gi % len(COLORS)])
    ax.set_xticks(range(len(x_values)))
    ax.set_xticklabels([f"{x:g}" for x in x_values])
    ax.grid(True, axis="y", alpha=0.4)


def _legend(ax, groups):
    handles = [plt.Rectangle((0, 0), 1, 1, facecolor=COLORS[i % len(COLORS)], edgecolor="black") for i in range(len(groups))]
    ax.legend(handles, groups, fontsize=8)


def plot_sinr_box(in_dir: str, out_path: str) -> None:
    """DL SNR, interference and SINR boxes vs rain rate, one group per scenario."""
    df = readers.load_campaign_summaries(in_dir)
    links = df[(df["kind"] == "links") & (df["direction"] == "dl")].copy()
    links["_x"] = links["rain_rate_mmh"]
    rains = sorted(links["_x"].unique())
    groups = _group_labels(links)
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 4.0))
    panels = [("snr_db", "DL SNR [dB]"), ("interference_dbm", "DL interference [dBm]"), ("sinr_db", "DL SINR [dB]")]
    for ax, (prefix, label) in zip(axes, panels):
        cols = {}
        for stat in ("min", "p25", "p50", "p75", "max"):
            src = f"{prefix.rsplit('_', 1)[0]}_{stat}_{prefix.rsplit('_', 1)[1]}"
            cols[f"{prefix}_{stat}"] = src
        sub = links.copy()
        for dst, src in cols.items():
            if src in sub.columns:
                sub[dst] = sub[src]
            else:  # interference has no min/max columns: reuse the quartiles
                base = src.replace("_min_", "_p25_").replace("_max_", "_p75_")
                sub[dst] = sub[base]
        _boxes(ax, sub, rains, groups, prefix)
        ax.set_xlabel("Rain rate [mm/h]")
        ax.set_ylabel(label)
    _legend(axes[0], groups)
    _finish(fig, out_path)


def plot_pdr_bars(in_dir: str, out_path: str) -> None:
    """DL and UL delivery ratio vs source rate, grouped bars per scenario."""
    df = readers.load_campaign_summaries(in_dir)
    rows = df[(df["kind"] == "direction")].copy()
    if rows.empty or rows["pdr"].isna().all():
        warnings.warn("packet table empty: PDR plot omitted")
        print("warning: no packets in any bundle, PDR plot omitted", file=sys.stderr)
        return
    rows["_x"] = rows["dl_rate_bps"] / 1e6
    rates = sorted(rows["_x"].unique())
    groups = _group_labels(rows)
    fig, axes = plt.subplots(1, 2, figsize=FIGSIZE)
    for ax, direction in zip(axes, ("dl", "ul")):
        width = 0.8 / max(len(groups), 1)
        for gi, group in enumerate(groups):
            vals = []
            for x in rates:
                sel = rows[(rows["scenario_name"] == group) & (rows["_x"] == x) & (rows["direction"] == direction)]
                vals.append(sel["pdr"].mean() if not sel.empty else np.nan)
            pos = np.arange(len(rates)) + (gi - (len(groups) - 1) / 2) * width
            ax.bar(pos, vals, width * 0.9, color=COLORS[gi % len(COLORS)], edgecolor="black", linewidth=0.4, label=group)
        ax.set_xticks(range(len(rates)))
        ax.set_xticklabels([f"{r:g}" for r in rates])
        ax.set_xlabel("DL source rate [Mb/s]")
        ax.set_ylabel(f"{direction.upper()} PDR")
        ax.set_ylim(0.0, 1.05)
        ax.grid(True, axis="y", alpha=0.4)
    axes[0].legend(fontsize=8)
    _finish(fig, out_path)


def plot_latency_box(in_dir: str, out_path: str) -> None:
    """DL and UL latency boxes vs source rate, one group per scenario."""
    df = readers.load_campaign_summaries(in_dir)
    rows = df[(df["kind"] == "direction")].copy()
    rows["_x"] = rows["dl_rate_bps"] / 1e6
    rates = sorted(rows["_x"].unique())
    groups = _group_labels(rows)
    fig, axes = plt.subplots(1, 2, figsize=FIGSIZE)
    for ax, direction in zip(axes, ("dl", "ul")):
        sub = rows[rows["direction"] == direction].copy()
        for stat in ("min", "p25", "p50", "p75", "max"):
            sub[f"latency_{stat}"] = sub[f"latency_{stat}_ms"]
        _boxes(ax, sub, rates, groups, "latency")
        ax.set_xlabel("DL source rate [Mb/s]")
        ax.set_ylabel(f"{direction.upper()} latency [ms]")
        ax.set_yscale("log")
    _legend(axes[0], groups)
    _finish(fig, out_path)


KINDS = {
    "pl_curves": plot_pl_curves,
    "sinr_box": plot_sinr_box,
    "pdr_bars": plot_pdr_bars,
    "latency_box": plot_latency_box,
}
