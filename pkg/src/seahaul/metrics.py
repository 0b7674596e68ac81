"""Metric aggregation and the CSV bundle format.

A run bundle is a directory holding three files with frozen headers:

``links.csv``
    One row per (slot, tree edge) in the slot's transmission direction.
``packets.csv``
    One row per packet lifecycle.
``summary.csv``
    Per-flow, per-direction and link-sample aggregates.  Box statistics are
    quartiles with min/max whiskers (linear-interpolation percentiles).

Interference is written as the literal string ``none`` where a sample saw no
concurrent transmission; dB aggregation operates on dB values directly, and
"none" samples are excluded from the dB percentiles but reported through
``zero_interference_share``.  Packets created during the warm-up window (10 %
of the run by default) are excluded from PDR and latency summaries; packets
still in flight at the end of the run count against PDR.
"""

from __future__ import annotations

import csv
import math
import os
from typing import Iterable

import numpy as np

from . import engine, sched

LINKS_HEADER = [
    "slot",
    "time_s",
    "tx",
    "rx",
    "direction",
    "pl_db",
    "rain_db",
    "g_tx_db",
    "g_rx_db",
    "rx_power_dbm",
    "noise_dbm",
    "snr_db",
    "interference_dbm",
    "sinr_db",
    "pl_clamped",
]

PACKETS_HEADER = [
    "pkt_id",
    "flow_id",
    "direction",
    "size_bytes",
    "created_s",
    "delivered_s",
    "latency_s",
    "hops",
    "outcome",
]

SUMMARY_HEADER = [
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

NONE_FIELD = "none"

CAMPAIGN_HEADER = [
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


def _fmt(x) -> str:
    """Exact, deterministic field formatting (floats round-trip)."""
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return ""
        return repr(x)
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _percentiles(values: np.ndarray) -> dict[str, float]:
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return {"min": q[0], "p25": q[1], "p50": q[2], "p75": q[3], "max": q[4]}


def links_rows(result: engine.RunResult) -> Iterable[list]:
    """Materialise links.csv rows in (slot, edge) order."""
    dt = result.slot_duration_s
    for t in range(result.n_slots):
        direction = "dl" if result.slot_kinds[t] == sched.DL else "ul"
        tape = result.tapes[direction]
        sinr = result.sinr_db[direction]
        inter = result.interference_dbm[direction]
        for i, (tx, rx) in enumerate(tape.edges):
            s = sinr[i, t]
            if math.isnan(s):
                continue
            g_tx = tape.tx_end[i].gain_db[t]
            g_rx = tape.rx_end[i].gain_db[t]
            iv = inter[i, t]
            yield [
                t,
                t * dt,
                tx,
                rx,
                direction,
                tape.pl_db[i, t],
                tape.rain_db[i, t],
                g_tx,
                g_rx,
                tape.rx_dbm[i, t],
                tape.noise_dbm[i],
                tape.snr_db[i, t],
                NONE_FIELD if math.isnan(iv) else iv,
                s,
                int(tape.clamped[i, t]),
            ]


def packets_rows(result: engine.RunResult) -> Iterable[list]:
    cols = result.packets
    n = cols["flow_id"].size
    for pid in range(n):
        delivered = cols["delivered_s"][pid]
        has_latency = not math.isnan(delivered)
        yield [
            pid,
            int(cols["flow_id"][pid]),
            result.flow_direction(int(cols["flow_id"][pid])),
            int(cols["size_bytes"][pid]),
            float(cols["created_s"][pid]),
            float(delivered) if has_latency else None,
            float(delivered - cols["created_s"][pid]) if has_latency else None,
            int(cols["hops"][pid]),
            engine.OUTCOME_NAMES[int(cols["outcome"][pid])],
        ]


def _packet_scope_row(kind: str, ident: str, direction: str, sel: dict[str, np.ndarray]) -> dict:
    out = cols_to_none()
    out.update(kind=kind, id=ident, direction=direction)
    outcome = sel["outcome"]
    generated = int(outcome.size)
    delivered_mask = outcome == engine.OUTCOME_DELIVERED
    out["generated"] = generated
    out["delivered"] = int(np.count_nonzero(delivered_mask))
    out["dropped_overflow"] = int(np.count_nonzero(outcome == engine.OUTCOME_DROPPED_OVERFLOW))
    out["dropped_no_route"] = int(np.count_nonzero(outcome == engine.OUTCOME_DROPPED_NO_ROUTE))
    out["in_flight"] = int(np.count_nonzero(outcome == engine.OUTCOME_IN_FLIGHT))
    out["pdr"] = None if generated == 0 else out["delivered"] / generated
    out["offered_bits"] = int(sel["size_bytes"].sum()) * 8
    out["carried_bits"] = int(sel["size_bytes"][delivered_mask].sum()) * 8
    if out["delivered"]:
        lat_ms = (sel["delivered_s"][delivered_mask] - sel["created_s"][delivered_mask]) * 1e3
        p = _percentiles(lat_ms)
        out["latency_min_ms"] = p["min"]
        out["latency_p25_ms"] = p["p25"]
        out["latency_p50_ms"] = p["p50"]
        out["latency_p75_ms"] = p["p75"]
        out["latency_max_ms"] = p["max"]
    return out


def cols_to_none() -> dict:
    return {k: None for k in SUMMARY_HEADER}


def _link_scope_row(direction: str, snr: np.ndarray, sinr: np.ndarray, inter: np.ndarray) -> dict:
    out = cols_to_none()
    out.update(kind="links", id="", direction=direction)
    n = sinr.size
    out["n_link_samples"] = n
    if n == 0:
        return out
    p = _percentiles(snr)
    out["snr_min_db"], out["snr_p25_db"], out["snr_p50_db"] = p["min"], p["p25"], p["p50"]
    out["snr_p75_db"], out["snr_max_db"] = p["p75"], p["max"]
    p = _percentiles(sinr)
    out["sinr_min_db"], out["sinr_p25_db"], out["sinr_p50_db"] = p["min"], p["p25"], p["p50"]
    out["sinr_p75_db"], out["sinr_max_db"] = p["p75"], p["max"]
    with_i = inter[~np.isnan(inter)]
    out["zero_interference_share"] = 1.0 - with_i.size / n
    if with_i.size:
        q = np.percentile(with_i, [25, 50, 75])
        out["interference_p25_dbm"], out["interference_p50_dbm"], out["interference_p75_dbm"] = q[0], q[1], q[2]
    return out


def summarize(result: engine.RunResult) -> list[dict]:
    """Pure aggregation of one run into summary rows."""
    scn = result.scenario
    warmup_s = scn.warmup_fraction * scn.duration_s
    cols = result.packets
    measured = cols["created_s"] >= warmup_s

    rows: list[dict] = []
    for flow_id in sorted(result.flows):
        mask = measured & (cols["flow_id"] == flow_id)
        sel = {k: v[mask] for k, v in cols.items()}
        rows.append(_packet_scope_row("flow", str(flow_id), result.flows[flow_id].direction, sel))
    for direction in ("dl", "ul"):
        fids = np.array([f for f in result.flows if result.flows[f].direction == direction])
        mask = measured & np.isin(cols["flow_id"], fids)
        sel = {k: v[mask] for k, v in cols.items()}
        rows.append(_packet_scope_row("direction", "", direction, sel))
    for direction in ("dl", "ul"):
        slots = result.recorded_slots(direction)
        sinr = result.sinr_db[direction][:, slots]
        inter = result.interference_dbm[direction][:, slots]
        snr = result.tapes[direction].snr_db[:, slots]
        recorded = ~np.isnan(sinr)
        rows.append(_link_scope_row(direction, snr[recorded], sinr[recorded], inter[recorded]))
    return rows


def summarize_tables(
    link_rows: list[dict],
    packet_rows: list[dict],
    flow_directions: dict[int, str],
    warmup_s: float,
) -> list[dict]:
    """Summary recomputed from raw tables (e.g. re-read from CSV).

    Produces exactly the same rows as :func:`summarize` on the originating
    run; used to pin that the summary is a pure function of the raw tables.
    """
    out: list[dict] = []
    created = np.array([r["created_s"] for r in packet_rows])
    flow_id = np.array([r["flow_id"] for r in packet_rows], dtype=np.int64)
    size = np.array([r["size_bytes"] for r in packet_rows], dtype=np.int64)
    delivered_s = np.array([math.nan if r["delivered_s"] is None else r["delivered_s"] for r in packet_rows])
    outcome = np.array(
        [
            {v: k for k, v in engine.OUTCOME_NAMES.items()}[r["outcome"]]
            for r in packet_rows
        ],
        dtype=np.int8,
    )
    measured = created >= warmup_s
    cols = {
        "flow_id": flow_id,
        "size_bytes": size,
        "created_s": created,
        "delivered_s": delivered_s,
        "outcome": outcome,
    }
    for fid in sorted(flow_directions):
        mask = measured & (flow_id == fid)
        sel = {k: v[mask] for k, v in cols.items()}
        out.append(_packet_scope_row("flow", str(fid), flow_directions[fid], sel))
    for direction in ("dl", "ul"):
        fids = np.array([f for f, d in flow_directions.items() if d == direction])
        mask = measured & np.isin(flow_id, fids)
        sel = {k: v[mask] for k, v in cols.items()}
        out.append(_packet_scope_row("direction", "", direction, sel))
    for direction in ("dl", "ul"):
        rows_d = [r for r in link_rows if r["direction"] == direction]
        snr = np.array([r["snr_db"] for r in rows_d])
        sinr = np.array([r["sinr_db"] for r in rows_d])
        inter = np.array([math.nan if r["interference_dbm"] is None else r["interference_dbm"] for r in rows_d])
        out.append(_link_scope_row(direction, snr, sinr, inter))
    return out


def write_bundle(result: engine.RunResult, out_dir: str) -> None:
    """Write links.csv, packets.csv and summary.csv for one run."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "links.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LINKS_HEADER)
        for row in links_rows(result):
            w.writerow([_fmt(v) for v in row])
    with open(os.path.join(out_dir, "packets.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PACKETS_HEADER)
        for row in packets_rows(result):
            w.writerow([_fmt(v) for v in row])
    write_summary(summarize(result), os.path.join(out_dir, "summary.csv"))


def write_summary(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in SUMMARY_HEADER])


def _parse(value: str, as_int: bool = False):
    if value == "":
        return None
    return int(value) if as_int else float(value)


def read_links_csv(path: str) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(
                {
                    "slot": int(r["slot"]),
                    "time_s": float(r["time_s"]),
                    "tx": int(r["tx"]),
                    "rx": int(r["rx"]),
                    "direction": r["direction"],
                    "pl_db": float(r["pl_db"]),
                    "rain_db": float(r["rain_db"]),
                    "g_tx_db": float(r["g_tx_db"]),
                    "g_rx_db": float(r["g_rx_db"]),
                    "rx_power_dbm": float(r["rx_power_dbm"]),
                    "noise_dbm": float(r["noise_dbm"]),
                    "snr_db": float(r["snr_db"]),
                    "interference_dbm": None if r["interference_dbm"] == NONE_FIELD else float(r["interference_dbm"]),
                    "sinr_db": float(r["sinr_db"]),
                    "pl_clamped": bool(int(r["pl_clamped"])),
                }
            )
    return out


def read_packets_csv(path: str) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.append(
                {
                    "pkt_id": int(r["pkt_id"]),
                    "flow_id": int(r["flow_id"]),
                    "direction": r["direction"],
                    "size_bytes": int(r["size_bytes"]),
                    "created_s": float(r["created_s"]),
                    "delivered_s": _parse(r["delivered_s"]),
                    "latency_s": _parse(r["latency_s"]),
                    "hops": int(r["hops"]),
                    "outcome": r["outcome"],
                }
            )
    return out


def read_summary_csv(path: str) -> list[dict]:
    out = []
    int_cols = {"generated", "delivered", "dropped_overflow", "dropped_no_route", "in_flight", "offered_bits", "carried_bits", "n_link_samples"}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            row: dict = {"kind": r["kind"], "id": r["id"], "direction": r["direction"]}
            for k in SUMMARY_HEADER[3:]:
                row[k] = _parse(r[k], as_int=k in int_cols)
            out.append(row)
    return out
