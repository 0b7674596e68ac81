"""Uniform planar array model with codebook-based analog beamforming.

The element pattern is the 3GPP TR 38.901 parabolic form (65 deg HPBW per
cut, 30 dB floor); the array factor assumes uniform excitation and a 2D DFT
codebook with one entry per element pair.  Directions are given as (azimuth,
elevation) offsets from the array boresight, in degrees.

Codebook entries are ordered by ascending spatial frequency per axis, so the
index increases monotonically with the steered sine-angle; entry
``(n_rows // 2, n_cols // 2)`` is the broadside beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HPBW_DEG = 65.0
PER_CUT_FLOOR_DB = 30.0
COMBINED_FLOOR_DB = 30.0

# Amplitude floor so the array factor in an exact null stays finite in dB.
_AMPLITUDE_FLOOR = 1e-12


@dataclass(frozen=True)
class UpaConfig:
    """Geometry and element pattern of one uniform planar array."""

    n_rows: int = 8
    n_cols: int = 8
    element_spacing_wavelengths: float = 0.5
    element_max_gain_dbi: float = 13.0
    boresight_azimuth_deg: float = 0.0
    boresight_elevation_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array needs at least one element per axis")
        if not self.element_spacing_wavelengths > 0.0:
            raise ValueError("element spacing must be > 0")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    def codebook_size(self) -> int:
        return self.n_elements


@dataclass(frozen=True)
class Beam:
    """One DFT codebook entry: nominal steering angles plus its index."""

    steering_azimuth_deg: float
    steering_elevation_deg: float
    codebook_index: int


def _wrap_deg(angle: float) -> float:
    """Wrap to (-180, 180]."""
    wrapped = math.fmod(angle + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0


def element_gain_db(azimuth_off_deg: float, elevation_off_deg: float, cfg: UpaConfig) -> float:
    """Single-element gain toward an offset direction, in dBi.

    Parabolic attenuation ``12 (theta / 65)^2`` in both cuts, each capped at
    30 dB, with the combined attenuation capped at 30 dB as well.  Total
    function: angles are wrapped before use.
    """
    az = _wrap_deg(azimuth_off_deg)
    el = _wrap_deg(elevation_off_deg)
    att_az = min(12.0 * (az / HPBW_DEG) ** 2, PER_CUT_FLOOR_DB)
    att_el = min(12.0 * (el / HPBW_DEG) ** 2, PER_CUT_FLOOR_DB)
    return cfg.element_max_gain_dbi - min(att_az + att_el, COMBINED_FLOOR_DB)


def codebook_frequencies(n: int) -> np.ndarray:
    """Per-axis DFT spatial frequencies, ascending over [-1/2, 1/2)."""
    return (np.arange(n) - n // 2) / float(n)


def beam_from_index(index: int, cfg: UpaConfig) -> Beam:
    """Materialise a codebook entry; nominal angles clamp at end-fire."""
    if not 0 <= index < cfg.codebook_size():
        raise ValueError(f"codebook index {index} out of range")
    j_row, j_col = divmod(index, cfg.n_cols)
    s = cfg.element_spacing_wavelengths
    sin_el = max(-1.0, min(1.0, codebook_frequencies(cfg.n_rows)[j_row] / s))
    el = math.degrees(math.asin(sin_el))
    cos_el = math.cos(math.radians(el))
    if cos_el < 1e-9:
        az = 0.0
    else:
        sin_az = max(-1.0, min(1.0, codebook_frequencies(cfg.n_cols)[j_col] / (s * cos_el)))
        az = math.degrees(math.asin(sin_az))
    return Beam(steering_azimuth_deg=az, steering_elevation_deg=el, codebook_index=index)


def _direction_phases(azimuth_off_deg: float, elevation_off_deg: float, cfg: UpaConfig) -> tuple[float, float]:
    """Per-element phase advance (row, col) toward a direction, in radians."""
    az = math.radians(azimuth_off_deg)
    el = math.radians(elevation_off_deg)
    two_pi_s = 2.0 * math.pi * cfg.element_spacing_wavelengths
    return two_pi_s * math.sin(el), two_pi_s * math.cos(el) * math.sin(az)


def _dirichlet_mag(x: float, n: int) -> float:
    """|sin(n x / 2) / sin(x / 2)| with the n-element limit at x = 2 pi k."""
    half = 0.5 * x
    denom = math.sin(half)
    if abs(denom) < 1e-12:
        return float(n)
    return abs(math.sin(n * half) / denom)


def array_factor_db(beam: Beam, azimuth_off_deg: float, elevation_off_deg: float, cfg: UpaConfig) -> float:
    """Uniform-excitation array factor of one codebook beam, in dB.

    Normalised so a perfectly steered array contributes ``10 log10(N)`` and a
    single element 0 dB in every direction.
    """
    if not 0 <= beam.codebook_index < cfg.codebook_size():
        raise ValueError(f"beam index {beam.codebook_index} invalid for this array")
    j_row, j_col = divmod(beam.codebook_index, cfg.n_cols)
    psi_row, psi_col = _direction_phases(azimuth_off_deg, elevation_off_deg, cfg)
    x_row = psi_row - 2.0 * math.pi * codebook_frequencies(cfg.n_rows)[j_row]
    x_col = psi_col - 2.0 * math.pi * codebook_frequencies(cfg.n_cols)[j_col]
    amp = _dirichlet_mag(x_row, cfg.n_rows) * _dirichlet_mag(x_col, cfg.n_cols)
    amp /= math.sqrt(cfg.n_elements)
    return 20.0 * math.log10(max(amp, _AMPLITUDE_FLOOR))


def select_beam_for_direction(azimuth_off_deg: float, elevation_off_deg: float, cfg: UpaConfig) -> Beam:
    """Codebook entry maximising the array factor toward one direction.

    The 2D search factorises into independent per-axis scans because the
    array factor is a product of positive per-axis kernels; ties resolve to
    the lowest index, so the result is deterministic.
    """
    psi_row, psi_col = _direction_phases(azimuth_off_deg, elevation_off_deg, cfg)

    def best(psi: float, n: int) -> int:
        freqs = codebook_frequencies(n)
        best_j, best_v = 0, -1.0
        for j in range(n):
            v = _dirichlet_mag(psi - 2.0 * math.pi * freqs[j], n)
            if v > best_v + 1e-12:
                best_j, best_v = j, v
        return best_j

    j_row = best(psi_row, cfg.n_rows)
    j_col = best(psi_col, cfg.n_cols)
    return beam_from_index(j_row * cfg.n_cols + j_col, cfg)


def direction_offsets(
    from_pos: tuple[float, float, float],
    to_pos: tuple[float, float, float],
    cfg: UpaConfig,
) -> tuple[float, float]:
    """(azimuth, elevation) offsets of ``to_pos`` seen from ``from_pos``.

    Positions are (x, y, z) in metres; raises on coincident positions.
    """
    dx = to_pos[0] - from_pos[0]
    dy = to_pos[1] - from_pos[1]
    dz = to_pos[2] - from_pos[2]
    horiz = math.hypot(dx, dy)
    if horiz == 0.0 and dz == 0.0:
        raise ValueError("coincident positions have no direction")
    az = math.degrees(math.atan2(dy, dx)) - cfg.boresight_azimuth_deg
    el = math.degrees(math.atan2(dz, horiz)) - cfg.boresight_elevation_deg
    return _wrap_deg(az), _wrap_deg(el)


def select_beam(
    tx_pos: tuple[float, float, float],
    rx_pos: tuple[float, float, float],
    cfg: UpaConfig,
) -> Beam:
    """Best codebook beam from ``tx_pos`` toward ``rx_pos``."""
    az, el = direction_offsets(tx_pos, rx_pos, cfg)
    return select_beam_for_direction(az, el, cfg)


def total_gain_db(beam: Beam, azimuth_off_deg: float, elevation_off_deg: float, cfg: UpaConfig) -> float:
    """Element gain plus array factor toward a direction, in dBi."""
    return element_gain_db(azimuth_off_deg, elevation_off_deg, cfg) + array_factor_db(
        beam, azimuth_off_deg, elevation_off_deg, cfg
    )
