"""Readers for the simulator's CSV interface.

The column sets below are the published wire contract of the simulator's
metric bundles; a file whose header deviates is rejected with a column diff
so schema drift surfaces immediately.
"""

from __future__ import annotations

import os

import pandas as pd

CAMPAIGN_COLUMNS = [
    "point_id",
    "run_index",
    "seed",
    "scenario_name",
    "rain_rate_mmh",
    "dl_rate_bps",
    "ul_rate_factor",
    "slot_pattern",
    "mux_mode",
    "n_s_odd",
    "duration_s",
    "path",
]

SUMMARY_COLUMNS = [
    "kind",
    "id",
    "direction",
    "generated",
    "delivered",
    "dropped_overflow",
    "dropped_no_route",
    "in_flight",
    "pdr",
    "offered_bits",
    "carried_bits",
    "latency_min_ms",
    "latency_p25_ms",
    "latency_p50_ms",
    "latency_p75_ms",
    "latency_max_ms",
    "snr_min_db",
    "snr_p25_db",
    "snr_p50_db",
    "snr_p75_db",
    "snr_max_db",
    "interference_p25_dbm",
    "interference_p50_dbm",
    "interference_p75_dbm",
    "zero_interference_share",
    "sinr_min_db",
    "sinr_p25_db",
    "sinr_p50_db",
    "sinr_p75_db",
    "sinr_max_db",
    "n_link_samples",
]

CURVES_COLUMNS = ["d_m", "free_space_db", "classical_two_ray_db", "modified_two_ray_db"]


class SchemaError(Exception):
    """A CSV does not match the simulator's published schema."""


def _check_columns(path: str, actual: list[str], expected: list[str]) -> None:
    if list(actual) != expected:
        missing = [c for c in expected if c not in actual]
        extra = [c for c in actual if c not in expected]
        raise SchemaError(f"{path}: column mismatch; missing {missing}, unexpected {extra}")


def read_campaign(path: str) -> pd.DataFrame:
    manifest = os.path.join(path, "campaign.csv")
    if not os.path.exists(manifest):
        raise SchemaError(f"{manifest}: no campaign manifest found")
    df = pd.read_csv(manifest)
    _check_columns(manifest, list(df.columns), CAMPAIGN_COLUMNS)
    return df


def read_summary(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    _check_columns(path, list(df.columns), SUMMARY_COLUMNS)
    return df


def read_curves(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    _check_columns(path, list(df.columns), CURVES_COLUMNS)
    return df


def load_campaign_summaries(in_dir: str) -> pd.DataFrame:
    """Join the manifest with every run's summary rows."""
    manifest = read_campaign(in_dir)
    frames = []
    for _, row in manifest.iterrows():
        summary = read_summary(os.path.join(in_dir, row["path"], "summary.csv"))
        summary = summary.assign(**{c: row[c] for c in CAMPAIGN_COLUMNS if c != "path"})
        frames.append(summary)
    return pd.concat(frames, ignore_index=True)
