"""Constant-bit-rate packet sources.

Every flow emits one packet per inter-packet interval; the rate is carried
entirely by the packet size, ``round(rate * interval / 8)`` bytes.  The only
randomness is a per-flow start-phase jitter, uniform within one interval and
drawn from a seed-derived stream, so runs are reproducible and distinct run
indices decorrelate the flows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class TrafficSpec:
    """Rates and timing shared by the default DL/UL flow set."""

    dl_rate_bps: float = 60e6
    ul_rate_factor: float = 0.2  # r_ul = factor * r_dl
    inter_packet_interval_s: float = 50e-6
    start_s: float = 0.0
    stop_s: float | None = None  # None: the whole run

    def __post_init__(self) -> None:
        if self.dl_rate_bps < 0 or self.ul_rate_factor < 0:
            raise ConfigError("rates must be >= 0")
        if self.inter_packet_interval_s <= 0:
            raise ConfigError("inter-packet interval must be > 0")

    @property
    def ul_rate_bps(self) -> float:
        return self.dl_rate_bps * self.ul_rate_factor


def packet_size_bytes(rate_bps: float, interval_s: float) -> int:
    """Payload size carrying ``rate_bps`` at one packet per interval."""
    if rate_bps == 0:
        return 0
    size = round(rate_bps * interval_s / 8.0)
    if size < 1:
        raise ConfigError(f"rate {rate_bps} b/s yields sub-byte packets at {interval_s}s intervals")
    return size


@dataclass
class CbrSource:
    """Packet arrival process of one flow."""

    flow_id: int
    rate_bps: float
    interval_s: float
    start_s: float
    stop_s: float
    phase_s: float  # start jitter in [0, interval)
    emitted: int = 0
    size_bytes: int = 0

    def __post_init__(self) -> None:
        self.size_bytes = packet_size_bytes(self.rate_bps, self.interval_s)

    def arrivals_until(self, t_end_s: float) -> list[float]:
        """Creation timestamps in [previous call's end, t_end_s)."""
        if self.rate_bps == 0:
            return []
        out = []
        while True:
            t = self.start_s + self.phase_s + self.emitted * self.interval_s
            if t >= t_end_s or t >= self.stop_s:
                break
            out.append(t)
            self.emitted += 1
        return out


def build_sources(
    spec: TrafficSpec,
    flow_ids_dl: list[int],
    flow_ids_ul: list[int],
    duration_s: float,
    seed: int,
    jitter: bool = True,
) -> dict[int, CbrSource]:
    """One CBR source per flow, phases drawn from a seed-split stream."""
    stop = duration_s if spec.stop_s is None else min(spec.stop_s, duration_s)
    ordered = sorted(flow_ids_dl) + sorted(flow_ids_ul)
    streams = np.random.SeedSequence(seed).spawn(len(ordered))
    sources: dict[int, CbrSource] = {}
    for flow_id, stream in zip(ordered, streams):
        rate = spec.dl_rate_bps if flow_id in set(flow_ids_dl) else spec.ul_rate_bps
        phase = float(np.random.default_rng(stream).random()) * spec.inter_packet_interval_s if jitter else 0.0
        sources[flow_id] = CbrSource(
            flow_id=flow_id,
            rate_bps=rate,
            interval_s=spec.inter_packet_interval_s,
            start_s=spec.start_s,
            stop_s=stop,
            phase_s=phase,
        )
    return sources
