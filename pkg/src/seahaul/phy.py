"""Per-slot link budgets: received power, interference aggregation, rate.

The rate abstraction is truncated Shannon: spectral efficiency follows
``log2(1 + sinr)`` up to a cap, with a hard cutoff below a minimum SINR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import antenna, channel

#: Links shorter than this are evaluated at this distance to avoid a singular
#: spreading loss.
MIN_LINK_DISTANCE_M = 1.0

SYMBOLS_PER_SLOT = 14


@dataclass
class LinkSample:
    """Radio state of one link in one slot."""

    slot_index: int
    tx_node: int
    rx_node: int
    direction: str
    pl_db: float
    rain_db: float
    g_tx_db: float
    g_rx_db: float
    rx_power_dbm: float
    noise_dbm: float
    snr_db: float
    interference_dbm: Optional[float] = None  # None encodes "no interference"
    sinr_db: float = math.nan
    pl_clamped: bool = False
    tx_beam: Optional[antenna.Beam] = None
    rx_beam: Optional[antenna.Beam] = None

    def __post_init__(self) -> None:
        if math.isnan(self.sinr_db):
            self.sinr_db = self.snr_db


@dataclass(frozen=True)
class RateMap:
    """Truncated-Shannon link adaptation."""

    se_max_bps_hz: float = 7.4
    se_min_sinr_db: float = -6.0

    def spectral_efficiency(self, sinr_db: float) -> float:
        if sinr_db < self.se_min_sinr_db:
            return 0.0
        return min(math.log2(1.0 + 10.0 ** (sinr_db / 10.0)), self.se_max_bps_hz)


def clamped_geometry(d2d_m: float, h_tx_m: float, h_rx_m: float) -> channel.Geometry:
    """Link geometry with the short-range distance guard applied."""
    dh = h_tx_m - h_rx_m
    if math.hypot(d2d_m, dh) < MIN_LINK_DISTANCE_M:
        d2d_m = math.sqrt(max(MIN_LINK_DISTANCE_M**2 - dh * dh, 1e-12))
    return channel.Geometry(d2d_m=d2d_m, h_tx_m=h_tx_m, h_rx_m=h_rx_m)


def link_budget(
    slot_index: int,
    tx_node: int,
    rx_node: int,
    tx_pos: tuple[float, float, float],
    rx_pos: tuple[float, float, float],
    tx_antenna: antenna.UpaConfig,
    rx_antenna: antenna.UpaConfig,
    params: channel.ChannelParams,
    rain_gamma_db_km: float,
    tx_power_dbm: float,
    noise_dbm: float,
    direction: str = "dl",
) -> LinkSample:
    """Full budget of one intended link: pl, rain, beam gains, SNR.

    Beams are selected from the codebook toward the peer's current position;
    gains are evaluated at the geometric direction, so quantisation of the
    codebook shows up as a (small) pointing loss.
    """
    if tx_node == rx_node:
        raise ValueError("tx and rx must differ")
    d2d = math.hypot(rx_pos[0] - tx_pos[0], rx_pos[1] - tx_pos[1])
    geom = clamped_geometry(d2d, tx_pos[2], rx_pos[2])
    pl, clamped = channel.path_loss_db(geom, params)
    rain = channel.rain_loss_db(rain_gamma_db_km, geom.distance_3d_m)

    tx_beam = antenna.select_beam(tx_pos, rx_pos, tx_antenna)
    rx_beam = antenna.select_beam(rx_pos, tx_pos, rx_antenna)
    tx_az, tx_el = antenna.direction_offsets(tx_pos, rx_pos, tx_antenna)
    rx_az, rx_el = antenna.direction_offsets(rx_pos, tx_pos, rx_antenna)
    g_tx = antenna.total_gain_db(tx_beam, tx_az, tx_el, tx_antenna)
    g_rx = antenna.total_gain_db(rx_beam, rx_az, rx_el, rx_antenna)

    rx_power = tx_power_dbm + g_tx + g_rx - pl - rain
    return LinkSample(
        slot_index=slot_index,
        tx_node=tx_node,
        rx_node=rx_node,
        direction=direction,
        pl_db=pl,
        rain_db=rain,
        g_tx_db=g_tx,
        g_rx_db=g_rx,
        rx_power_dbm=rx_power,
        noise_dbm=noise_dbm,
        snr_db=rx_power - noise_dbm,
        pl_clamped=clamped,
        tx_beam=tx_beam,
        rx_beam=rx_beam,
    )


def interferer_power_dbm(
    interferer_pos: tuple[float, float, float],
    interferer_beam: antenna.Beam,
    interferer_antenna: antenna.UpaConfig,
    victim_pos: tuple[float, float, float],
    victim_beam: antenna.Beam,
    victim_antenna: antenna.UpaConfig,
    params: channel.ChannelParams,
    rain_gamma_db_km: float,
    tx_power_dbm: float,
) -> float:
    """Power leaked into a victim receiver by one concurrent transmitter.

    The interferer keeps the beam committed to its own link; the victim keeps
    the receive beam pointed at its own transmitter.
    """
    d2d = math.hypot(victim_pos[0] - interferer_pos[0], victim_pos[1] - interferer_pos[1])
    geom = clamped_geometry(d2d, interferer_pos[2], victim_pos[2])
    pl, _ = channel.path_loss_db(geom, params)
    rain = channel.rain_loss_db(rain_gamma_db_km, geom.distance_3d_m)
    tx_az, tx_el = antenna.direction_offsets(interferer_pos, victim_pos, interferer_antenna)
    rx_az, rx_el = antenna.direction_offsets(victim_pos, interferer_pos, victim_antenna)
    g_tx = antenna.total_gain_db(interferer_beam, tx_az, tx_el, interferer_antenna)
    g_rx = antenna.total_gain_db(victim_beam, rx_az, rx_el, victim_antenna)
    return tx_power_dbm + g_tx + g_rx - pl - rain


def combine_interference(
    rx_power_dbm: float,
    noise_dbm: float,
    contributions: Sequence[tuple[float, float]],
) -> tuple[Optional[float], float]:
    """Fold ``(power_dbm, overlap_fraction)`` interferers into one SINR.

    Returns ``(interference_dbm_or_None, sinr_db)``; interference combines
    linearly in mW, weighted by the time/frequency overlap with the victim.
    """
    i_mw = 0.0
    for power_dbm, overlap in contributions:
        if not 0.0 < overlap <= 1.0:
            raise ValueError(f"overlap fraction must be in (0, 1], got {overlap}")
        i_mw += overlap * 10.0 ** (power_dbm / 10.0)
    if i_mw <= 0.0:
        return None, rx_power_dbm - noise_dbm
    noise_mw = 10.0 ** (noise_dbm / 10.0)
    sinr = rx_power_dbm - 10.0 * math.log10(noise_mw + i_mw)
    return 10.0 * math.log10(i_mw), sinr


def aggregate_sinr(intended: LinkSample, interferers: Sequence[tuple[float, float]]) -> LinkSample:
    """Fill the interference and SINR fields of an intended-link sample.

    With no interferers the SINR equals the SNR and the interference stays
    "none".
    """
    interference, sinr = combine_interference(intended.rx_power_dbm, intended.noise_dbm, interferers)
    intended.interference_dbm = interference
    intended.sinr_db = sinr
    return intended


def achievable_bits(
    sinr_db: float,
    n_symbols: int,
    subband_hz: float,
    rate_map: RateMap,
    slot_duration_s: float,
) -> int:
    """Transport capacity of one allocation, in whole bits.

    ``floor(SE(sinr) * B * T_slot * n_symbols / 14)``; zero symbols or an
    SINR below the cutoff yield zero bits.
    """
    if not 0 <= n_symbols <= SYMBOLS_PER_SLOT:
        raise ValueError(f"symbol count {n_symbols} outside [0, {SYMBOLS_PER_SLOT}]")
    if not subband_hz > 0.0:
        raise ValueError("subband width must be > 0")
    se = rate_map.spectral_efficiency(sinr_db)
    return int(math.floor(se * subband_hz * slot_duration_s * n_symbols / SYMBOLS_PER_SLOT))
