"""Header codec golden vectors and routing-table correctness.

The codec oracle assembles the 24-bit string field by field, independently of
the packed arithmetic in the implementation; routing decisions are checked
against networkx tree paths.
"""

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seahaul import bap
from seahaul.errors import FramingError, RoutingError, TopologyError


def bitstring_oracle(dc: int, r_bits: int, dest: int, path: int) -> bytes:
    """Reference encoder: assemble the bit string, then chop into bytes."""
    bits = f"{dc:01b}{r_bits:03b}{dest:010b}{path:010b}"
    assert len(bits) == 24
    return bytes(int(bits[i : i + 8], 2) for i in (0, 8, 16))


class TestHeaderCodec:
    def test_all_zero(self):
        assert bap.encode_header(bap.BapHeader(dest=0, path=0)) == b"\x00\x00\x00"
        assert bap.decode_header(b"\x00\x00\x00") == bap.BapHeader(dest=0, path=0, dc=0, r_bits=0)

    def test_all_ones(self):
        h = bap.BapHeader(dest=1023, path=1023, dc=1, r_bits=7)
        assert bap.encode_header(h) == b"\xff\xff\xff"
        assert bap.decode_header(b"\xff\xff\xff") == h

    def test_small_fields_against_oracle(self):
        h = bap.BapHeader(dest=5, path=3, dc=0, r_bits=0)
        assert bap.encode_header(h) == bitstring_oracle(0, 0, 5, 3)
        assert bap.encode_header(h) == b"\x00\x14\x03"

    @given(
        dc=st.integers(0, 1),
        r=st.integers(0, 7),
        dest=st.integers(0, 1023),
        path=st.integers(0, 1023),
    )
    @settings(max_examples=2000, deadline=None)
    def test_roundtrip_and_oracle(self, dc, r, dest, path):
        h = bap.BapHeader(dest=dest, path=path, dc=dc, r_bits=r)
        wire = bap.encode_header(h)
        assert wire == bitstring_oracle(dc, r, dest, path)
        assert bap.decode_header(wire) == h

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(11)
        n = 5000
        dc = rng.integers(0, 2, n)
        r = rng.integers(0, 8, n)
        dest = rng.integers(0, 1024, n)
        path = rng.integers(0, 1024, n)
        bulk = bap.encode_headers(dc, r, dest, path)
        for i in range(0, n, 97):
            h = bap.BapHeader(dest=int(dest[i]), path=int(path[i]), dc=int(dc[i]), r_bits=int(r[i]))
            assert bytes(bulk[i]) == bap.encode_header(h)
        back = bap.decode_headers(bulk)
        assert (back[0] == dc).all() and (back[1] == r).all()
        assert (back[2] == dest).all() and (back[3] == path).all()

    def test_wrong_length_rejected(self):
        with pytest.raises(FramingError):
            bap.decode_header(b"\x00\x00")
        with pytest.raises(FramingError):
            bap.decode_header(b"\x00\x00\x00\x00")

    def test_field_ranges(self):
        with pytest.raises(ValueError):
            bap.BapHeader(dest=1024, path=0)
        with pytest.raises(ValueError):
            bap.BapHeader(dest=0, path=1024)
        with pytest.raises(ValueError):
            bap.BapHeader(dest=0, path=0, r_bits=8)

    def test_lan_flag_is_lowest_reserved_bit(self):
        h = bap.BapHeader(dest=1, path=1).with_lan_flag()
        assert h.r_bits == 1
        assert h.lan_flag
        assert not bap.BapHeader(dest=1, path=1, r_bits=0b110).lan_flag
        assert bap.BapHeader(dest=1, path=1, r_bits=0b001).lan_flag


# Parent maps of the reference deployments (donor ids first).
CHAIN = {0: None, 1: 0, 2: 1}
TOPO3 = {0: None, 1: 0, 2: 0, 3: 0, 4: 1, 5: 2, 6: 3, 7: 5, 8: 6}
TOPO4 = {0: None, 1: None, 2: 1, 3: 0, 4: 0, 5: 1, 6: 2, 7: 4, 8: 2, 9: 6}


class TestRoutingTables:
    def test_three_node_chain(self):
        tables = bap.build_routing_tables(CHAIN)
        at_mid = tables[1]
        assert at_mid.dl.lookup(bap.address_of(2), 1) == 2
        assert at_mid.ul.lookup(bap.address_of(0), 1) == 0
        assert tables[0].dl.lookup(bap.address_of(2), 1) == 1

    def test_depth_three_route_takes_three_hops(self):
        tables = bap.build_routing_tables(TOPO3)
        dest = bap.address_of(7)
        node, hops = 0, 0
        while tables[node].address != dest:
            node = bap.forward(tables[node], bap.BapHeader(dest=dest)).next_hop
            hops += 1
        assert hops == 3

    def test_forwarding_matches_tree_path_oracle(self):
        tables = bap.build_routing_tables(TOPO3)
        g = nx.Graph((c, p) for c, p in TOPO3.items() if p is not None)
        for src in TOPO3:
            for dst in TOPO3:
                if src == dst:
                    continue
                path = nx.shortest_path(g, src, dst)
                decision = bap.forward(tables[src], bap.BapHeader(dest=bap.address_of(dst)))
                assert decision.action == "forward"
                assert decision.next_hop == path[1]

    def test_two_tree_forest_has_no_cross_entries(self):
        tables = bap.build_routing_tables(TOPO4)
        roots = {n: tables[n].root for n in TOPO4}
        for n in TOPO4:
            if TOPO4[n] is None:
                continue
            # Every UL entry goes to the parent, stays within the own tree
            # and the own donor is reachable.
            own_tree = {bap.address_of(m) for m in TOPO4 if roots[m] == roots[n]}
            assert set(tables[n].ul.entries.values()) == {TOPO4[n]}
            assert set(a for a, _ in tables[n].ul.entries) <= own_tree
            assert tables[n].ul.lookup(bap.address_of(roots[n]), 1) == TOPO4[n]
            other_root = 1 - roots[n]
            with pytest.raises(RoutingError):
                bap.forward(tables[n], bap.BapHeader(dest=bap.address_of(other_root)))

    def test_cycle_rejected(self):
        with pytest.raises(TopologyError):
            bap.build_routing_tables({0: None, 1: 2, 2: 1})

    def test_self_parent_rejected(self):
        with pytest.raises(TopologyError):
            bap.build_routing_tables({0: None, 1: 1})

    def test_unknown_parent_rejected(self):
        with pytest.raises(TopologyError):
            bap.build_routing_tables({0: None, 1: 9})

    def test_all_parents_no_root_rejected(self):
        with pytest.raises(TopologyError):
            bap.build_routing_tables({0: 1, 1: 0})


class TestForward:
    def test_deliver_to_upper_layers(self):
        tables = bap.build_routing_tables(CHAIN)
        d = bap.forward(tables[2], bap.BapHeader(dest=bap.address_of(2)))
        assert d.action == "deliver_to_upper_layers"

    def test_deliver_to_lan(self):
        tables = bap.build_routing_tables(CHAIN)
        d = bap.forward(tables[2], bap.BapHeader(dest=bap.address_of(2)).with_lan_flag())
        assert d.action == "deliver_to_lan"

    def test_missing_route_raises(self):
        tables = bap.build_routing_tables(CHAIN)
        with pytest.raises(RoutingError):
            bap.forward(tables[2], bap.BapHeader(dest=999))

    def test_packets_reach_destination_without_loops(self):
        tables = bap.build_routing_tables(TOPO3)
        layers = {n: tables[n].layer for n in TOPO3}
        for dst in TOPO3:
            if dst == 0:
                continue
            node = 0
            visited = [0]
            while True:
                d = bap.forward(tables[node], bap.BapHeader(dest=bap.address_of(dst)))
                if d.action != "forward":
                    break
                node = d.next_hop
                assert node not in visited, "loop"
                assert layers[node] == layers[visited[-1]] + 1, "DL must descend"
                visited.append(node)
            assert node == dst
