"""User-plane data path: flow classification, tunnel overhead, RLC queues.

Tunnelled (PDU-session) traffic pays a 36-byte inner tunnel header (GTP-U 8 +
UDP 8 + IPv4 20) plus the 3-byte routing header on every backhaul hop;
LAN-anchored (non-PDU) traffic bypasses the tunnel entirely and pays only the
routing header, with the LAN flag set.

Queues are unacknowledged-mode FIFOs with drop-tail overflow; there is no
segmentation, so a packet is transmitted only once a single slot grant covers
it whole.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .bap import BapHeader, encode_header
from .errors import RoutingError

TUNNEL_OVERHEAD_BYTES = 36  # GTP-U 8 + UDP 8 + IPv4 20
BAP_OVERHEAD_BYTES = 3
DEFAULT_QUEUE_MAX_BYTES = 5_000_000

PDU = "pdu"
NON_PDU = "non_pdu"


class ClassificationError(RoutingError):
    """Packet does not match any traffic-flow template."""


@dataclass(frozen=True)
class Flow:
    """One unidirectional traffic flow between a donor gateway and a node."""

    flow_id: int
    direction: str  # "dl" | "ul"
    kind: str = NON_PDU  # "pdu" | "non_pdu"
    teid: int = 0
    src_node: int = 0
    dst_node: int = 0
    dest_address: int = 0  # BAP address terminating the backhaul leg
    path_id: int = 1

    def __post_init__(self) -> None:
        if self.direction not in ("dl", "ul"):
            raise ValueError(f"bad flow direction {self.direction!r}")
        if self.kind not in (PDU, NON_PDU):
            raise ValueError(f"bad flow kind {self.kind!r}")
        if not 0 <= self.teid < 2**32:
            raise ValueError("teid must fit in 32 bits")


def classify(flow_table: dict[int, Flow], flow_id: int) -> int:
    """Map a packet's flow id to its tunnel endpoint id."""
    try:
        return flow_table[flow_id].teid
    except KeyError:
        raise ClassificationError(f"no traffic-flow template for flow {flow_id}") from None


@dataclass
class Packet:
    """A packet in flight through the backhaul."""

    pkt_id: int
    flow_id: int
    size_bytes: int  # application payload
    created_s: float
    header: Optional[BapHeader] = None
    wire_bytes: int = 0  # payload + headers as carried on each hop
    hops: int = 0
    hop_trace: list[int] = field(default_factory=list)

    @property
    def wire_bits(self) -> int:
        return self.wire_bytes * 8


def encapsulate(packet: Packet, flow: Flow) -> Packet:
    """Attach tunnel and routing headers at the backhaul ingress.

    For DL PDU traffic this happens at the donor, for UL PDU traffic at the
    access node; non-PDU traffic gets only the routing header, LAN flag set.
    """
    if flow.dest_address <= 0:
        raise RoutingError(f"flow {flow.flow_id} has no forwarding entry")
    header = BapHeader(dest=flow.dest_address, path=flow.path_id)
    if flow.kind == NON_PDU:
        header = header.with_lan_flag()
        overhead = BAP_OVERHEAD_BYTES
    else:
        overhead = TUNNEL_OVERHEAD_BYTES + BAP_OVERHEAD_BYTES
    packet.header = header
    packet.wire_bytes = packet.size_bytes + overhead
    encode_header(header)  # exercise the wire codec; bytes are not retained
    return packet


def decapsulate(packet: Packet) -> Packet:
    """Strip headers at the backhaul egress, restoring the payload size."""
    packet.header = None
    packet.wire_bytes = packet.size_bytes
    return packet


ACCEPTED = "accepted"
DROPPED_OVERFLOW = "dropped_overflow"


@dataclass
class RlcQueue:
    """Drop-tail FIFO for one (link, direction) RLC channel."""

    tx_node: int
    rx_node: int
    direction: str
    max_bytes: int = DEFAULT_QUEUE_MAX_BYTES
    cur_bytes: int = 0
    fifo: deque = field(default_factory=deque)

    def __len__(self) -> int:
        return len(self.fifo)

    def enqueue(self, packet: Packet) -> str:
        if self.cur_bytes + packet.wire_bytes > self.max_bytes:
            return DROPPED_OVERFLOW
        self.fifo.append(packet)
        self.cur_bytes += packet.wire_bytes
        return ACCEPTED

    def dequeue_up_to(self, budget_bits: int) -> list[Packet]:
        """Remove the maximal FIFO prefix whose total size fits the budget.

        No fragmentation: a head-of-line packet larger than the remaining
        budget stays queued (and blocks the rest of the queue).
        """
        if budget_bits < 0:
            raise ValueError("budget must be >= 0")
        out: list[Packet] = []
        remaining = budget_bits
        while self.fifo and self.fifo[0].wire_bits <= remaining:
            pkt = self.fifo.popleft()
            remaining -= pkt.wire_bits
            self.cur_bytes -= pkt.wire_bytes
            out.append(pkt)
        return out


# Lifecycle outcomes recorded per packet.
DELIVERED = "delivered"
DROPPED_OVERFLOW_OUTCOME = "dropped_overflow"
DROPPED_NO_ROUTE = "dropped_no_route"
IN_FLIGHT = "in_flight"


@dataclass
class PacketRecord:
    """Final lifecycle record of one packet."""

    pkt_id: int
    flow_id: int
    size_bytes: int
    created_at_s: float
    delivered_at_s: Optional[float] = None
    hop_trace: list[int] = field(default_factory=list)
    outcome: str = IN_FLIGHT

    def latency_s(self) -> Optional[float]:
        if self.delivered_at_s is None:
            return None
        return self.delivered_at_s - self.created_at_s
