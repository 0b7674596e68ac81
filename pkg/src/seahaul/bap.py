"""Backhaul adaptation layer: header codec, routing tables, forwarding.

Wire contract (bit-exact, MSB first within each byte)::

    byte 0:  D/C | R2 | R1 | R0 | DEST9 DEST8 DEST7 DEST6
    byte 1:  DEST5 DEST4 DEST3 DEST2 DEST1 DEST0 | PATH9 PATH8
    byte 2:  PATH7 ... PATH0

D/C = 0 marks a data PDU.  DEST and PATH are 10-bit unsigned fields, so up to
1024 addresses and 1024 paths.  R is a 3-bit reserved field whose least
significant bit (R0) flags LAN-originated (non tunnelled) traffic.

Addresses are donor-assigned at scenario load: ``address = node_id + 1``;
address 0 is reserved and invalid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import FramingError, RoutingError, TopologyError

LAN_FLAG_BIT = 0  # R bit carrying the PDU / non-PDU discriminator
HEADER_LEN = 3
MAX_ADDRESS = 1023
DEFAULT_PATH_ID = 1


@dataclass(frozen=True)
class BapHeader:
    """Fields of the 3-byte data-PDU routing header."""

    dest: int
    path: int = DEFAULT_PATH_ID
    dc: int = 0
    r_bits: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.dest <= MAX_ADDRESS:
            raise ValueError(f"dest {self.dest} does not fit in 10 bits")
        if not 0 <= self.path <= MAX_ADDRESS:
            raise ValueError(f"path {self.path} does not fit in 10 bits")
        if self.dc not in (0, 1):
            raise ValueError("dc is a single bit")
        if not 0 <= self.r_bits <= 7:
            raise ValueError("r_bits is a 3-bit field")

    @property
    def lan_flag(self) -> bool:
        return bool((self.r_bits >> LAN_FLAG_BIT) & 1)

    def with_lan_flag(self) -> "BapHeader":
        return BapHeader(dest=self.dest, path=self.path, dc=self.dc, r_bits=self.r_bits | (1 << LAN_FLAG_BIT))


def encode_header(h: BapHeader) -> bytes:
    """Pack a header into its 3-byte wire form."""
    b0 = (h.dc << 7) | (h.r_bits << 4) | (h.dest >> 6)
    b1 = ((h.dest & 0x3F) << 2) | (h.path >> 8)
    b2 = h.path & 0xFF
    return bytes((b0, b1, b2))


def decode_header(data: bytes) -> BapHeader:
    """Inverse of :func:`encode_header`."""
    if len(data) != HEADER_LEN:
        raise FramingError(f"BAP header must be exactly {HEADER_LEN} bytes, got {len(data)}")
    b0, b1, b2 = data
    return BapHeader(
        dc=b0 >> 7,
        r_bits=(b0 >> 4) & 0x7,
        dest=((b0 & 0xF) << 6) | (b1 >> 2),
        path=((b1 & 0x3) << 8) | b2,
    )


def encode_headers(dc: np.ndarray, r_bits: np.ndarray, dest: np.ndarray, path: np.ndarray) -> np.ndarray:
    """Vectorised encoder: field arrays to an ``(n, 3)`` uint8 array.

    Same bit layout as :func:`encode_header`; used for bulk validation over
    the whole header space.
    """
    dc = np.asarray(dc, dtype=np.uint32)
    r_bits = np.asarray(r_bits, dtype=np.uint32)
    dest = np.asarray(dest, dtype=np.uint32)
    path = np.asarray(path, dtype=np.uint32)
    if dest.max(initial=0) > MAX_ADDRESS or path.max(initial=0) > MAX_ADDRESS:
        raise ValueError("dest or path exceeds 10 bits")
    out = np.empty((dest.shape[0], 3), dtype=np.uint8)
    out[:, 0] = (dc << 7) | (r_bits << 4) | (dest >> 6)
    out[:, 1] = ((dest & 0x3F) << 2) | (path >> 8)
    out[:, 2] = path & 0xFF
    return out


def decode_headers(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised decoder returning ``(dc, r_bits, dest, path)`` arrays."""
    data = np.asarray(data, dtype=np.uint32)
    if data.ndim != 2 or data.shape[1] != HEADER_LEN:
        raise FramingError(f"expected an (n, {HEADER_LEN}) byte array, got shape {data.shape}")
    b0, b1, b2 = data[:, 0], data[:, 1], data[:, 2]
    dc = b0 >> 7
    r_bits = (b0 >> 4) & 0x7
    dest = ((b0 & 0xF) << 6) | (b1 >> 2)
    path = ((b1 & 0x3) << 8) | b2
    return dc, r_bits, dest, path


def address_of(node_id: int) -> int:
    """Donor-assigned BAP address of a node; 0 stays reserved."""
    addr = node_id + 1
    if not 1 <= addr <= MAX_ADDRESS:
        raise ValueError(f"node id {node_id} cannot be addressed")
    return addr


@dataclass
class RoutingTable:
    """(dest, path) to next-hop map for one direction at one node."""

    direction: str  # "dl" | "ul"
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    def lookup(self, dest: int, path: int) -> Optional[int]:
        return self.entries.get((dest, path))


@dataclass
class NodeTables:
    node_id: int
    address: int
    layer: int
    root: int  # donor node id of this tree
    dl: RoutingTable = field(default_factory=lambda: RoutingTable("dl"))
    ul: RoutingTable = field(default_factory=lambda: RoutingTable("ul"))


def build_routing_tables(parents: Mapping[int, Optional[int]]) -> dict[int, NodeTables]:
    """Derive per-node UL and DL tables from the parent map.

    ``parents[node] is None`` marks a donor (tree root).  DL entries at a node
    send each descendant's address to the child whose subtree contains it; UL
    entries send every same-tree address outside the own subtree to the
    parent (the donor re-injects such traffic downward).  Addresses in other
    trees stay unroutable.  Path id is 1 throughout (spanning-tree topologies
    have a single route).
    """
    node_ids = sorted(parents)
    for node, parent in parents.items():
        if parent is not None and parent not in parents:
            raise TopologyError(f"node {node} references unknown parent {parent}")
        if parent == node:
            raise TopologyError(f"node {node} is its own parent")

    children: dict[int, list[int]] = {n: [] for n in node_ids}
    roots = []
    for node in node_ids:
        parent = parents[node]
        if parent is None:
            roots.append(node)
        else:
            children[parent].append(node)
    if not roots:
        raise TopologyError("no donor-rooted tree: every node has a parent")

    layer = {r: 0 for r in roots}
    root_of = {r: r for r in roots}
    order = list(roots)
    seen = set(roots)
    i = 0
    while i < len(order):
        node = order[i]
        i += 1
        for child in children[node]:
            if child in seen:
                raise TopologyError(f"node {child} reached twice; not a tree")
            seen.add(child)
            layer[child] = layer[node] + 1
            root_of[child] = root_of[node]
            order.append(child)
    if len(seen) != len(node_ids):
        orphans = sorted(set(node_ids) - seen)
        raise TopologyError(f"cycle detected: nodes {orphans} are unreachable from any donor")

    # Subtree address sets, leaves first, and per-tree address sets.
    subtree: dict[int, set[int]] = {}
    for node in reversed(order):
        addrs = {address_of(node)}
        for child in children[node]:
            addrs |= subtree[child]
        subtree[node] = addrs
    tree_addrs = {r: subtree[r] for r in roots}

    tables: dict[int, NodeTables] = {}
    for node in node_ids:
        t = NodeTables(node_id=node, address=address_of(node), layer=layer[node], root=root_of[node])
        for child in children[node]:
            for addr in subtree[child]:
                t.dl.entries[(addr, DEFAULT_PATH_ID)] = child
        parent = parents[node]
        if parent is not None:
            for addr in tree_addrs[root_of[node]] - subtree[node]:
                t.ul.entries[(addr, DEFAULT_PATH_ID)] = parent
        tables[node] = t
    return tables


@dataclass(frozen=True)
class ForwardDecision:
    action: str  # "deliver_to_upper_layers" | "deliver_to_lan" | "forward"
    next_hop: Optional[int] = None


def forward(node: NodeTables, header: BapHeader) -> ForwardDecision:
    """Routing decision for one received data PDU at one node."""
    if header.dest == node.address:
        if header.lan_flag:
            return ForwardDecision("deliver_to_lan")
        return ForwardDecision("deliver_to_upper_layers")
    next_hop = node.dl.lookup(header.dest, header.path)
    if next_hop is None:
        next_hop = node.ul.lookup(header.dest, header.path)
    if next_hop is None:
        raise RoutingError(f"node {node.node_id}: no route toward address {header.dest} path {header.path}")
    return ForwardDecision("forward", next_hop=next_hop)
