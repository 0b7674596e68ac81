"""TDD frame structure, symbol partitioning and round-robin allocation.

Slots carry 14 OFDM symbols; the first and last are reserved for control in
DL and UL slots, leaving 12 data symbols (indices 1..12).  Switch (SW) slots
expose only their last 4 symbols, for UL, the rest being guard.

Half duplex is realised by a static parity partition: writing ``layer`` for
the hop count from the donor, transmissions by interfaces of odd-layer nodes
and even-layer nodes use disjoint resources, either disjoint symbol ranges
(TDM, ``n_s_odd`` symbols to the odd class) or disjoint subbands (FDM).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError

SYMBOLS_PER_SLOT = 14
DATA_SYMBOLS = tuple(range(1, 13))  # symbols 0 and 13 carry control
SW_UL_SYMBOLS = (10, 11, 12, 13)  # last 4 symbols of a switch slot

DL, SW, UL = "DL", "SW", "UL"

KNOWN_PATTERNS = {
    "4DS2U": (DL, DL, DL, DL, SW, UL, UL),
    "3DS2U": (DL, DL, DL, SW, UL, UL),
}


@dataclass(frozen=True)
class Numerology:
    """5G NR numerology: subcarrier spacing scales slot duration."""

    index: int = 3

    def __post_init__(self) -> None:
        if not 0 <= self.index <= 6:
            raise ConfigError(f"numerology index {self.index} outside [0, 6]")

    @property
    def scs_khz(self) -> float:
        return 15.0 * 2**self.index

    @property
    def slot_duration_s(self) -> float:
        return 1e-3 / 2**self.index

    @property
    def symbols_per_slot(self) -> int:
        return SYMBOLS_PER_SLOT


@dataclass(frozen=True)
class SlotPattern:
    name: str
    sequence: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.sequence:
            raise ConfigError("slot pattern must not be empty")
        for s in self.sequence:
            if s not in (DL, SW, UL):
                raise ConfigError(f"unknown slot type {s!r}")

    @property
    def period(self) -> int:
        return len(self.sequence)

    @classmethod
    def parse(cls, spec: str | Sequence[str]) -> "SlotPattern":
        """Accept a known pattern name or an explicit slot-type sequence."""
        if isinstance(spec, str):
            if spec not in KNOWN_PATTERNS:
                raise ConfigError(f"unknown slot pattern {spec!r}; known: {sorted(KNOWN_PATTERNS)}")
            return cls(name=spec, sequence=KNOWN_PATTERNS[spec])
        return cls(name="custom", sequence=tuple(spec))


def slot_type(slot_index: int, pattern: SlotPattern) -> str:
    if slot_index < 0:
        raise ValueError("slot index must be >= 0")
    return pattern.sequence[slot_index % pattern.period]


@dataclass(frozen=True)
class ExtraControl:
    """Additional control symbols at a custom periodicity.

    ``n_symbols`` data symbols per ``periodicity_slots``-slot period are
    re-purposed for control, spread evenly across the period's slots,
    earliest data symbols first.
    """

    n_symbols: int
    periodicity_slots: int

    def __post_init__(self) -> None:
        if self.periodicity_slots < 1:
            raise ConfigError("extra-control periodicity must be >= 1 slot")
        if self.n_symbols < 0:
            raise ConfigError("extra-control symbol count must be >= 0")
        if self.n_symbols > self.periodicity_slots * len(DATA_SYMBOLS):
            raise ConfigError("extra control symbols exceed available data symbols")

    def removed_in_slot(self, slot_index: int) -> int:
        base, rem = divmod(self.n_symbols, self.periodicity_slots)
        extra = 1 if (slot_index % self.periodicity_slots) < rem else 0
        return base + extra


def apply_extra_control(extra: Optional[ExtraControl], symbols: tuple[int, ...], slot_index: int) -> tuple[int, ...]:
    """Remove this slot's share of extra control symbols, earliest first."""
    if extra is None:
        return symbols
    k = extra.removed_in_slot(slot_index)
    if k > len(symbols):
        raise ConfigError(f"slot {slot_index}: {k} control symbols requested, {len(symbols)} data symbols present")
    return symbols[k:]


@dataclass(frozen=True)
class MultiplexMode:
    """MT/DU separation: time (symbol parity split) or frequency (subbands)."""

    mode: str = "tdm"  # "tdm" | "fdm"
    n_s_odd: int = 6
    du_bandwidth_fraction: float = 0.5
    extra_control: Optional[ExtraControl] = None

    def __post_init__(self) -> None:
        if self.mode not in ("tdm", "fdm"):
            raise ConfigError(f"unknown multiplex mode {self.mode!r}")
        if not 0 <= self.n_s_odd <= len(DATA_SYMBOLS):
            raise ConfigError(f"n_s_odd {self.n_s_odd} outside [0, {len(DATA_SYMBOLS)}]")
        if not 0.0 < self.du_bandwidth_fraction < 1.0:
            raise ConfigError("du_bandwidth_fraction must lie in (0, 1)")


def data_symbols(kind: str, mode: MultiplexMode, slot_index: int) -> tuple[int, ...]:
    """Data symbols usable in one slot, extra control already removed.

    SW slots expose only their 4 UL symbols; extra control is not charged to
    them (the guard period already dominates).
    """
    if kind == SW:
        return SW_UL_SYMBOLS
    return apply_extra_control(mode.extra_control, DATA_SYMBOLS, slot_index)


def symbol_partition(parity: int, mode: MultiplexMode, kind: str, slot_index: int = 0) -> tuple[int, ...]:
    """Symbols usable by transmitters of one layer parity in one slot.

    TDM assigns the first ``n_s_odd`` data symbols to odd-layer interfaces
    and the remainder to even-layer ones; the 4 UL symbols of an SW slot are
    split by the same proportion, rounded toward the odd class.  Under FDM the
    time split does not apply and the full data-symbol set is returned.
    """
    symbols = data_symbols(kind, mode, slot_index)
    if mode.mode == "fdm":
        return symbols
    if kind == SW:
        n_odd = math.ceil(len(SW_UL_SYMBOLS) * mode.n_s_odd / len(DATA_SYMBOLS))
    else:
        n_odd = min(mode.n_s_odd, len(symbols))
    if parity % 2 == 1:
        return symbols[:n_odd]
    return symbols[n_odd:]


def subband_for_parity(parity: int, mode: MultiplexMode, bandwidth_hz: float) -> tuple[float, float]:
    """(offset_hz, width_hz) of the carrier slice used by one parity class.

    TDM uses the whole carrier; FDM splits it once, the even class taking the
    ``du_bandwidth_fraction`` share (the donor DU sits at layer 0).
    """
    if mode.mode == "tdm":
        return 0.0, bandwidth_hz
    split = mode.du_bandwidth_fraction * bandwidth_hz
    if parity % 2 == 0:
        return 0.0, split
    return split, bandwidth_hz - split


def subbands_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] < b[0] + b[1] and b[0] < a[0] + a[1]


@dataclass
class Allocation:
    """One scheduling grant: a link, a symbol set and a subband."""

    slot_index: int
    tx_node: int
    rx_node: int
    direction: str
    symbols: tuple[int, ...]
    subband: tuple[float, float]
    granted_bits: int = 0
    sinr_db: float = math.nan

    @property
    def symbol_mask(self) -> int:
        mask = 0
        for s in self.symbols:
            mask |= 1 << s
        return mask


@dataclass
class RrPointer:
    """Persistent round-robin position for one (DU, direction)."""

    position: int = 0


def rr_allocate(
    links: Sequence[tuple[int, int]],
    active: Sequence[tuple[int, int]],
    symbols: tuple[int, ...],
    pointer: RrPointer,
) -> dict[tuple[int, int], tuple[int, ...]]:
    """Deal symbols one at a time round-robin over the active links.

    ``links`` fixes the stable order; ``active`` is the subset with queued
    traffic.  Dealing starts at the pointer and the pointer advances past the
    last symbol's recipient, so fairness holds across slots.
    """
    if not active:
        return {}
    active_set = set(active)
    n = len(links)
    rotation = [links[(pointer.position + k) % n] for k in range(n)]
    rotation = [l for l in rotation if l in active_set]
    if not rotation:
        return {}
    shares: dict[tuple[int, int], list[int]] = {l: [] for l in rotation}
    last = rotation[0]
    for i, sym in enumerate(symbols):
        last = rotation[i % len(rotation)]
        shares[last].append(sym)
    if symbols:
        pointer.position = (links.index(last) + 1) % n
    return {l: tuple(s) for l, s in shares.items() if s}


def half_duplex_check(allocations: Sequence[Allocation]) -> list[tuple[int, Allocation, Allocation]]:
    """Find nodes that would transmit and receive on overlapping resources.

    Returns ``(node, tx_allocation, rx_allocation)`` triples; empty means the
    slot respects the half-duplex constraint.
    """
    tx_by_node: dict[int, list[Allocation]] = {}
    rx_by_node: dict[int, list[Allocation]] = {}
    for a in allocations:
        tx_by_node.setdefault(a.tx_node, []).append(a)
        rx_by_node.setdefault(a.rx_node, []).append(a)
    violations = []
    for node, tx_allocs in tx_by_node.items():
        for rx_a in rx_by_node.get(node, ()):
            for tx_a in tx_allocs:
                if (tx_a.symbol_mask & rx_a.symbol_mask) and subbands_overlap(tx_a.subband, rx_a.subband):
                    violations.append((node, tx_a, rx_a))
    return violations
