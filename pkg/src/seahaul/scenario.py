"""Scenario definition, validation, JSON (de)serialisation, built-in layouts.

The canonical file format is JSON (schema documented in the README, versioned
through ``schema_version``).  Omitted fields take the reference-campaign
defaults: 26 GHz carrier, 30 dBm, 400 MHz, numerology 3, 4DS2U, TDM with 6
odd-layer symbols, 2 s runs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

from . import bap
from .channel import ChannelParams
from .antenna import UpaConfig
from .errors import ConfigError, TopologyError
from .phy import RateMap
from .sched import ExtraControl, MultiplexMode, Numerology, SlotPattern
from .traffic import TrafficSpec
from .tunnels import DEFAULT_QUEUE_MAX_BYTES

SCHEMA_VERSION = 1

DONOR = "donor"
NODE = "node"

DEFAULT_DONOR_HEIGHT_M = 20.0
DEFAULT_NODE_HEIGHT_M = 10.0
DEFAULT_NODE_SPEED_MPS = (5.0, 0.0)
#: DUs face the vessel field (+Y) unless configured; MTs always track their
#: parent, so only the DU mount direction is a free parameter.
DEFAULT_DU_BORESIGHT_DEG = 90.0


@dataclass(frozen=True)
class NodeSpec:
    """One network element: a shore donor or a vessel relay."""

    node_id: int
    role: str
    x_m: float
    y_m: float
    height_m: float
    velocity_mps: tuple[float, float] = (0.0, 0.0)
    parent: Optional[int] = None
    du_boresight_deg: float = DEFAULT_DU_BORESIGHT_DEG

    def __post_init__(self) -> None:
        if self.role not in (DONOR, NODE):
            raise ConfigError(f"unknown role {self.role!r}")
        if self.role == DONOR and self.parent is not None:
            raise TopologyError(f"donor {self.node_id} must not have a parent")
        if self.role == NODE and self.parent is None:
            raise TopologyError(f"node {self.node_id} needs a parent")

    @property
    def address(self) -> int:
        return bap.address_of(self.node_id)


@dataclass(frozen=True)
class Scenario:
    """Complete, validated simulation input."""

    nodes: tuple[NodeSpec, ...]
    name: str = "scenario"
    schema_version: int = SCHEMA_VERSION
    channel: ChannelParams = field(default_factory=ChannelParams)
    antenna: UpaConfig = field(default_factory=UpaConfig)
    tx_power_dbm: float = 30.0
    noise_figure_db: float = 5.0
    bandwidth_hz: float = 400e6
    numerology: Numerology = field(default_factory=Numerology)
    slot_pattern: SlotPattern = field(default_factory=lambda: SlotPattern.parse("4DS2U"))
    mux: MultiplexMode = field(default_factory=MultiplexMode)
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    traffic_kind: str = "non_pdu"  # default flows are LAN-anchored
    rate_map: RateMap = field(default_factory=RateMap)
    queue_max_bytes: int = DEFAULT_QUEUE_MAX_BYTES
    rain_table_path: Optional[str] = None
    duration_s: float = 2.0
    seed: int = 1
    run_count: int = 50
    warmup_fraction: float = 0.1
    traffic_jitter: bool = True
    strict: bool = True

    def __post_init__(self) -> None:
        self.validate()

    # -- structure ---------------------------------------------------------
    def validate(self) -> None:
        ids = [n.node_id for n in self.nodes]
        if len(ids) != len(set(ids)):
            raise ConfigError("duplicate node ids")
        if not any(n.role == DONOR for n in self.nodes):
            raise TopologyError("at least one donor is required")
        known = set(ids)
        for n in self.nodes:
            if n.parent is not None and n.parent not in known:
                raise TopologyError(f"node {n.node_id} references unknown parent {n.parent}")
        # Raises TopologyError on cycles / orphans.
        bap.build_routing_tables(self.parent_map())
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("warmup fraction must lie in [0, 1)")
        if self.duration_s <= 0:
            raise ConfigError("duration must be > 0")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth must be > 0")
        if self.run_count < 1:
            raise ConfigError("run count must be >= 1")
        if self.traffic_kind not in ("pdu", "non_pdu"):
            raise ConfigError(f"unknown traffic kind {self.traffic_kind!r}")

    def parent_map(self) -> dict[int, Optional[int]]:
        return {n.node_id: n.parent for n in self.nodes}

    def donors(self) -> list[NodeSpec]:
        return [n for n in self.nodes if n.role == DONOR]

    def relays(self) -> list[NodeSpec]:
        return [n for n in self.nodes if n.role == NODE]

    def layers(self) -> dict[int, int]:
        tables = bap.build_routing_tables(self.parent_map())
        return {nid: t.layer for nid, t in tables.items()}

    def max_depth(self) -> int:
        return max(self.layers().values())

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "schema_version": self.schema_version,
            "name": self.name,
            "nodes": [
                {
                    "node_id": n.node_id,
                    "role": n.role,
                    "x_m": n.x_m,
                    "y_m": n.y_m,
                    "height_m": n.height_m,
                    "velocity_mps": list(n.velocity_mps),
                    "parent": n.parent,
                    "du_boresight_deg": n.du_boresight_deg,
                }
                for n in self.nodes
            ],
            "channel": asdict(self.channel),
            "antenna": asdict(self.antenna),
            "tx_power_dbm": self.tx_power_dbm,
            "noise_figure_db": self.noise_figure_db,
            "bandwidth_hz": self.bandwidth_hz,
            "numerology_index": self.numerology.index,
            "slot_pattern": self.slot_pattern.name if self.slot_pattern.name != "custom" else list(self.slot_pattern.sequence),
            "mux": {
                "mode": self.mux.mode,
                "n_s_odd": self.mux.n_s_odd,
                "du_bandwidth_fraction": self.mux.du_bandwidth_fraction,
                "extra_control": None
                if self.mux.extra_control is None
                else {"n_symbols": self.mux.extra_control.n_symbols, "periodicity_slots": self.mux.extra_control.periodicity_slots},
            },
            "traffic": asdict(self.traffic),
            "traffic_kind": self.traffic_kind,
            "rate_map": asdict(self.rate_map),
            "queue_max_bytes": self.queue_max_bytes,
            "rain_table_path": self.rain_table_path,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "run_count": self.run_count,
            "warmup_fraction": self.warmup_fraction,
            "traffic_jitter": self.traffic_jitter,
            "strict": self.strict,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Scenario":
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        try:
            nodes = tuple(
                NodeSpec(
                    node_id=int(n["node_id"]),
                    role=n["role"],
                    x_m=float(n["x_m"]),
                    y_m=float(n["y_m"]),
                    height_m=float(n.get("height_m", DEFAULT_DONOR_HEIGHT_M if n["role"] == DONOR else DEFAULT_NODE_HEIGHT_M)),
                    velocity_mps=tuple(n.get("velocity_mps", (0.0, 0.0) if n["role"] == DONOR else DEFAULT_NODE_SPEED_MPS)),
                    parent=n.get("parent"),
                    du_boresight_deg=float(n.get("du_boresight_deg", DEFAULT_DU_BORESIGHT_DEG)),
                )
                for n in d["nodes"]
            )
        except KeyError as exc:
            raise ConfigError(f"node record missing field {exc}") from exc

        mux_d = d.get("mux", {})
        extra_d = mux_d.get("extra_control")
        defaults = cls.__dataclass_fields__
        return cls(
            nodes=nodes,
            name=d.get("name", "scenario"),
            channel=ChannelParams(**d["channel"]) if "channel" in d else ChannelParams(),
            antenna=UpaConfig(**d["antenna"]) if "antenna" in d else UpaConfig(),
            tx_power_dbm=float(d.get("tx_power_dbm", 30.0)),
            noise_figure_db=float(d.get("noise_figure_db", 5.0)),
            bandwidth_hz=float(d.get("bandwidth_hz", 400e6)),
            numerology=Numerology(int(d.get("numerology_index", 3))),
            slot_pattern=SlotPattern.parse(d.get("slot_pattern", "4DS2U")),
            mux=MultiplexMode(
                mode=mux_d.get("mode", "tdm"),
                n_s_odd=int(mux_d.get("n_s_odd", 6)),
                du_bandwidth_fraction=float(mux_d.get("du_bandwidth_fraction", 0.5)),
                extra_control=None if extra_d is None else ExtraControl(**extra_d),
            ),
            traffic=TrafficSpec(**d["traffic"]) if "traffic" in d else TrafficSpec(),
            traffic_kind=d.get("traffic_kind", "non_pdu"),
            rate_map=RateMap(**d["rate_map"]) if "rate_map" in d else RateMap(),
            queue_max_bytes=int(d.get("queue_max_bytes", DEFAULT_QUEUE_MAX_BYTES)),
            rain_table_path=d.get("rain_table_path"),
            duration_s=float(d.get("duration_s", 2.0)),
            seed=int(d.get("seed", 1)),
            run_count=int(d.get("run_count", 50)),
            warmup_fraction=float(d.get("warmup_fraction", 0.1)),
            traffic_jitter=bool(d.get("traffic_jitter", True)),
            strict=bool(d.get("strict", True)),
        )


def save(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load(path: str) -> Scenario:
    """Parse and validate a scenario file; config errors report positions."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return Scenario.from_dict(d)


# -- built-in layouts --------------------------------------------------------
#
# Eight vessels in three rows plus one (or two) shore donors.  Vessels sail
# along +X at 5 m/s; donors are static.  Edge sets follow the reference
# deployment figures; the depth-3 variants hang the back row off the middle
# row instead of the front one.

_VESSEL_XY = (
    (400.0, 1000.0),
    (800.0, 1000.0),
    (1200.0, 1000.0),
    (100.0, 2000.0),
    (500.0, 2000.0),
    (900.0, 2000.0),
    (400.0, 3500.0),
    (900.0, 3500.0),
)

# parent index per vessel (0-based vessel index; "d0"/"d1" for donors)
_TOPOLOGY_PARENTS: dict[int, tuple] = {
    1: ("d0",) * 8,
    2: ("d0", "d0", "d0", 0, 1, 2, 0, 1),
    3: ("d0", "d0", "d0", 0, 1, 2, 4, 5),
    4: ("d1", "d0", "d0", "d1", 0, 2, 0, 5),
}


def builtin_topology(k: int, **overrides: Any) -> Scenario:
    """Reference deployments 1..4; keyword overrides patch scenario fields.

    Depths are 1, 2, 3 and 3; layout 4 has two donors and two trees.
    """
    if k not in _TOPOLOGY_PARENTS:
        raise ConfigError(f"topology index must be in 1..4, got {k}")
    donors_xy = [(800.0, 0.0)]
    if k == 4:
        donors_xy.append((0.0, 0.0))

    nodes: list[NodeSpec] = []
    for i, (x, y) in enumerate(donors_xy):
        nodes.append(
            NodeSpec(node_id=i, role=DONOR, x_m=x, y_m=y, height_m=DEFAULT_DONOR_HEIGHT_M, velocity_mps=(0.0, 0.0))
        )
    donor_ids = {f"d{i}": i for i in range(len(donors_xy))}
    base = len(donors_xy)
    parents = _TOPOLOGY_PARENTS[k]
    for v, (x, y) in enumerate(_VESSEL_XY):
        p = parents[v]
        parent_id = donor_ids[p] if isinstance(p, str) else base + p
        nodes.append(
            NodeSpec(
                node_id=base + v,
                role=NODE,
                x_m=x,
                y_m=y,
                height_m=DEFAULT_NODE_HEIGHT_M,
                velocity_mps=DEFAULT_NODE_SPEED_MPS,
                parent=parent_id,
            )
        )
    return Scenario(nodes=tuple(nodes), name=f"topology{k}", **overrides)
