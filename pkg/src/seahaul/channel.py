"""Deterministic propagation models for over-sea links.

Path loss follows a two-ray ground-reflection formulation in which the phase
of the reflected ray can be damped by a frequency-dependent coefficient, which
removes most of the deep interference nulls observed with the classical model
at mmWave frequencies.  Rain attenuation follows ITU-R P.838-3 and thermal
noise the usual -174 dBm/Hz floor.

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT_M_S = 299_792_458.0

#: Field-magnitude floor applied when the two rays cancel.  Clamping at 1e-6
#: (about +120 dB of extra loss) keeps downstream SINR arithmetic finite.
DEEP_NULL_FLOOR = 1e-6

VALID_MODELS = ("modified_two_ray", "classical_two_ray", "free_space")
VALID_POLARIZATIONS = ("horizontal", "vertical")


@dataclass(frozen=True)
class ChannelParams:
    """Carrier, sea-reflection and weather parameters of the radio channel."""

    carrier_freq_ghz: float = 26.0
    reflection_coeff: float = -1.0
    rain_rate_mmh: float = 0.0
    polarization: str = "horizontal"
    model: str = "modified_two_ray"

    def __post_init__(self) -> None:
        if not math.isfinite(self.carrier_freq_ghz) or not 1.0 <= self.carrier_freq_ghz <= 100.0:
            raise ValueError(f"carrier frequency {self.carrier_freq_ghz} GHz outside [1, 100]")
        if not math.isfinite(self.rain_rate_mmh) or self.rain_rate_mmh < 0.0:
            raise ValueError(f"rain rate must be finite and >= 0, got {self.rain_rate_mmh}")
        if self.polarization not in VALID_POLARIZATIONS:
            raise ValueError(f"unknown polarization {self.polarization!r}")
        if self.model not in VALID_MODELS:
            raise ValueError(f"unknown path loss model {self.model!r}")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / (self.carrier_freq_ghz * 1e9)


@dataclass(frozen=True)
class Geometry:
    """Horizontal separation and antenna heights of one link."""

    d2d_m: float
    h_tx_m: float
    h_rx_m: float

    def __post_init__(self) -> None:
        if not self.d2d_m > 0.0:
            raise ValueError(f"horizontal separation must be > 0, got {self.d2d_m}")
        if self.h_tx_m <= 0.0 or self.h_rx_m <= 0.0:
            raise ValueError("antenna heights must be > 0")

    @property
    def distance_3d_m(self) -> float:
        """Direct-ray length."""
        return math.hypot(self.d2d_m, self.h_tx_m - self.h_rx_m)

    @property
    def reflected_path_m(self) -> float:
        """Length of the sea-surface first-order reflection path."""
        return math.hypot(self.d2d_m, self.h_tx_m + self.h_rx_m)


def alpha_freq_coeff(f_ghz: float) -> float:
    """Unit-less phase-damping coefficient of the reflected ray.

    Least-squares fit over measured sea-path data:
    ``1.091 * exp(-0.06256 f) + 0.06982`` with ``f`` in GHz.
    """
    if not math.isfinite(f_ghz):
        raise ValueError(f"frequency must be finite, got {f_ghz}")
    if f_ghz < 0.0:
        raise ValueError(f"frequency must be >= 0, got {f_ghz}")
    return 1.091 * math.exp(-0.06256 * f_ghz) + 0.06982


def path_loss_db(geom: Geometry, params: ChannelParams) -> tuple[float, bool]:
    """Path loss in dB for one link; returns ``(loss_db, clamped)``.

    The loss is ``-20 log10((lambda / 4 pi d) * |1 + R exp(j a 2 pi dd / lambda)|)``
    with ``d`` the direct 3D distance and ``dd`` the reflected/direct path
    length difference.  ``a`` is :func:`alpha_freq_coeff` for the modified
    model, exactly 1 for the classical model, and the whole reflection term is
    dropped in free-space mode.  When the two rays cancel, the field magnitude
    is clamped at :data:`DEEP_NULL_FLOOR` and ``clamped`` is True; the function
    never returns infinity.
    """
    lam = params.wavelength_m
    d = geom.distance_3d_m
    spread = lam / (4.0 * math.pi * d)
    if params.model == "free_space":
        factor = 1.0
    else:
        alpha = 1.0 if params.model == "classical_two_ray" else alpha_freq_coeff(params.carrier_freq_ghz)
        # reflected - direct, in the cancellation-free form
        # (r^2 - d^2) / (r + d) = 4 h_tx h_rx / (r + d).
        delta_d = 4.0 * geom.h_tx_m * geom.h_rx_m / (geom.reflected_path_m + d)
        phase = alpha * 2.0 * math.pi * delta_d / lam
        factor = abs(1.0 + params.reflection_coeff * complex(math.cos(phase), math.sin(phase)))
    clamped = factor < DEEP_NULL_FLOOR
    if clamped:
        factor = DEEP_NULL_FLOOR
    return -20.0 * math.log10(spread * factor), clamped


def peak_count(pl_curve: Sequence[tuple[float, float]]) -> int:
    """Number of strict local maxima of a sampled loss-vs-distance curve.

    Diagnostic used to compare how often the two-ray variants swing through
    interference peaks over a distance span.
    """
    if len(pl_curve) < 3:
        raise ValueError("need at least 3 samples to count peaks")
    dist = np.asarray([p[0] for p in pl_curve], dtype=float)
    loss = np.asarray([p[1] for p in pl_curve], dtype=float)
    if not np.all(np.diff(dist) > 0.0):
        raise ValueError("distances must be strictly increasing")
    interior = (loss[1:-1] > loss[:-2]) & (loss[1:-1] > loss[2:])
    return int(np.count_nonzero(interior))


@dataclass(frozen=True)
class RainCoefficientTable:
    """ITU-R P.838-3 regression coefficients for one polarization.

    ``k_terms`` holds exactly 4 ``(a, b, c)`` Gaussian terms for ``log10 k``
    and ``alpha_terms`` exactly 5 for ``alpha``; ``*_linear`` are the ``(m, c)``
    tails of the two fits.
    """

    polarization: str
    k_terms: tuple[tuple[float, float, float], ...]
    k_linear: tuple[float, float]
    alpha_terms: tuple[tuple[float, float, float], ...]
    alpha_linear: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.k_terms) != 4:
            raise ConfigError(f"log10(k) fit needs 4 Gaussian terms, got {len(self.k_terms)}")
        if len(self.alpha_terms) != 5:
            raise ConfigError(f"alpha fit needs 5 Gaussian terms, got {len(self.alpha_terms)}")

    def k_alpha(self, f_ghz: float) -> tuple[float, float]:
        """Evaluate the ``k`` and ``alpha`` power-law parameters at ``f_ghz``."""
        x = math.log10(f_ghz)
        log10_k = sum(a * math.exp(-(((x - b) / c) ** 2)) for a, b, c in self.k_terms)
        log10_k += self.k_linear[0] * x + self.k_linear[1]
        alpha = sum(a * math.exp(-(((x - b) / c) ** 2)) for a, b, c in self.alpha_terms)
        alpha += self.alpha_linear[0] * x + self.alpha_linear[1]
        return 10.0 ** log10_k, alpha


def load_rain_tables(path: str | None = None) -> dict[str, RainCoefficientTable]:
    """Parse the coefficient file into one table per polarization.

    Uses the bundled ITU-R P.838-3 transcription when ``path`` is omitted.
    Validates that every polarization carries 4 + 5 Gaussian terms and both
    linear tails.
    """
    if path is None:
        text = resources.files("seahaul.data").joinpath("itu_r_p838_3.txt").read_text()
        lines: Iterable[str] = text.splitlines()
        origin = "<bundled itu_r_p838_3.txt>"
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read rain coefficient file {path}: {exc}") from exc
        origin = path

    terms: dict[tuple[str, str], dict[int, tuple[float, float, float]]] = {}
    linear: dict[tuple[str, str], tuple[float, float]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "term":
                _, quantity, pol, j, a, b, c = parts
                terms.setdefault((quantity, pol), {})[int(j)] = (float(a), float(b), float(c))
            elif parts[0] == "linear":
                _, quantity, pol, m, c = parts
                linear[(quantity, pol)] = (float(m), float(c))
            else:
                raise ValueError(f"unknown record type {parts[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{origin}:{lineno}: malformed record: {exc}") from exc

    tables: dict[str, RainCoefficientTable] = {}
    for pol in VALID_POLARIZATIONS:
        for quantity in ("k", "alpha"):
            if (quantity, pol) not in terms:
                raise ConfigError(f"{origin}: missing {quantity} terms for {pol} polarization")
            if (quantity, pol) not in linear:
                raise ConfigError(f"{origin}: missing {quantity} linear tail for {pol} polarization")
        k_idx = terms[("k", pol)]
        a_idx = terms[("alpha", pol)]
        tables[pol] = RainCoefficientTable(
            polarization=pol,
            k_terms=tuple(k_idx[j] for j in sorted(k_idx)),
            k_linear=linear[("k", pol)],
            alpha_terms=tuple(a_idx[j] for j in sorted(a_idx)),
            alpha_linear=linear[("alpha", pol)],
        )
    return tables


_BUNDLED_TABLES: dict[str, RainCoefficientTable] | None = None


def bundled_rain_table(polarization: str) -> RainCoefficientTable:
    """Rain coefficient table shipped with the package, cached."""
    global _BUNDLED_TABLES
    if _BUNDLED_TABLES is None:
        _BUNDLED_TABLES = load_rain_tables()
    try:
        return _BUNDLED_TABLES[polarization]
    except KeyError:
        raise ConfigError(f"no rain table for polarization {polarization!r}") from None


def rain_specific_attenuation(params: ChannelParams, table: RainCoefficientTable) -> float:
    """Specific attenuation ``gamma = k rho^alpha`` in dB/km.

    Zero when the rain rate is zero.
    """
    if table is None:
        raise ConfigError("rain coefficient table not loaded")
    if params.rain_rate_mmh == 0.0:
        return 0.0
    k, alpha = table.k_alpha(params.carrier_freq_ghz)
    return k * params.rain_rate_mmh**alpha


def rain_loss_db(gamma_db_km: float, distance_m: float) -> float:
    """Rain loss over one link; additive in dB with the path loss."""
    return gamma_db_km * distance_m / 1000.0


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise floor ``-174 + 10 log10(B) + NF`` in dBm."""
    if not bandwidth_hz > 0.0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz}")
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
