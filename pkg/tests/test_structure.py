import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcptsearch.classic import classic_bounds
from rcptsearch.generate import random_network
from rcptsearch.network import Network, make_network
from rcptsearch.postman import chinese_postman
from rcptsearch.structure import (
    EULERIAN,
    GENERAL,
    TREE,
    WEAKLY_EULERIAN,
    classify,
    contract_blocks,
    decompose,
    find_bridges,
    identify_nodes,
)

seeds = st.integers(min_value=0, max_value=10**6)
kinds = st.sampled_from(["tree", "eulerian", "weakly_eulerian", "general", "bridgeless"])


def _multigraph(net, skip=None):
    g = nx.MultiGraph()
    g.add_nodes_from(net.nodes)
    for a in net.arcs:
        if a.id != skip:
            g.add_edge(a.u, a.v, key=a.id)
    return g


def test_tree_all_bridges(star):
    r = decompose(star)
    assert r.bridges == {"s1", "s2"}
    assert r.mu1 == 3 and r.mu2 == 0
    assert len(r.blocks) == 3
    assert classify(r) == TREE


def test_triangle_single_block(triangle):
    r = decompose(triangle)
    assert not r.bridges
    assert r.mu1 == 0 and r.mu2 == 3
    assert r.is_eulerian and r.is_weakly_eulerian
    assert len(r.blocks) == 1
    assert classify(r) == EULERIAN


def test_lollipop(lollipop):
    r = decompose(lollipop)
    assert r.bridges == {"b"}
    assert (r.mu1, r.mu2) == (1, 3)
    assert not r.is_eulerian and r.is_weakly_eulerian
    assert classify(r) == WEAKLY_EULERIAN
    assert r.bridge_block_tree == ((r.block_of["O"], r.block_of["u"], "b"),)


def test_three_arc_is_general(three_arc):
    r = decompose(three_arc)
    assert not r.bridges
    assert not r.is_weakly_eulerian
    assert classify(r) == GENERAL


def test_parallel_arcs_are_not_bridges():
    net = make_network("A", ["A", "B", "C"], [("p", "A", "B", 1), ("q", "B", "A", 2), ("r", "B", "C", 1)])
    assert find_bridges(net) == {"r"}


def test_self_loop_block_bridge_mix():
    net = make_network("O", ["O", "x"], [("b", "O", "x", 1), ("l", "x", "x", 2)])
    r = decompose(net)
    assert r.bridges == {"b"}
    assert classify(r) == WEAKLY_EULERIAN


def test_single_node_is_tree():
    net = make_network("O", ["O"], [])
    assert classify(decompose(net)) == TREE


@settings(max_examples=80, deadline=None)
@given(kinds, seeds)
def test_bridges_brute_force(kind, seed):
    net = random_network(kind, seed)
    r = decompose(net)
    for arc in net.arcs:
        disconnects = not nx.is_connected(_multigraph(net, skip=arc.id))
        assert disconnects == (arc.id in r.bridges), arc.id


@settings(max_examples=80, deadline=None)
@given(kinds, seeds)
def test_report_invariants(kind, seed):
    net = random_network(kind, seed)
    r = decompose(net)
    assert r.mu1 + r.mu2 == pytest.approx(net.total_length, abs=1e-12)
    block_arcs = [a for b in r.blocks for a in b.arcs]
    assert len(block_arcs) == len(set(block_arcs))
    assert set(block_arcs) | r.bridges == {a.id for a in net.arcs}
    assert not set(block_arcs) & r.bridges
    assert len(r.blocks) - 1 == len(r.bridges)
    # bridge-block structure is a tree
    t = nx.MultiGraph()
    t.add_nodes_from(b.id for b in r.blocks)
    t.add_edges_from((x, y) for x, y, _ in r.bridge_block_tree)
    assert nx.is_tree(t)
    assert r.is_eulerian == all(net.degree(n) % 2 == 0 for n in net.nodes)
    # 2-arc-connectivity inside each block matches networkx's bridge-free components
    g = _multigraph(net)
    for b in r.blocks:
        if len(b.nodes) > 1:
            sub = nx.Graph(g.subgraph(b.nodes))
            assert nx.is_connected(sub)


@settings(max_examples=60, deadline=None)
@given(kinds, seeds)
def test_contracted_surrogate(kind, seed):
    net = random_network(kind, seed)
    r = decompose(net)
    q = contract_blocks(net, r)
    rq = decompose(q)
    assert q.total_length == pytest.approx(net.total_length)
    assert rq.is_weakly_eulerian
    assert len(q.nodes) == len(r.blocks)
    assert chinese_postman(q).length == pytest.approx(2 * r.mu1 + r.mu2)
    # the surrogate's exact value is the original's lower bound
    cq = classic_bounds(q)
    assert cq.exact_value == pytest.approx(classic_bounds(net).v_lower, abs=1e-9)


def test_contract_examples(star, three_arc, lollipop):
    assert contract_blocks(star) == star
    q = contract_blocks(three_arc)
    assert q.nodes == ("A",)
    assert all(a.is_loop and a.length == 1 for a in q.arcs)
    assert decompose(q).is_eulerian
    ql = contract_blocks(lollipop)
    assert len(ql.nodes) == 2
    assert sum(a.is_loop for a in ql.arcs) == 3
    assert chinese_postman(ql).length == 5


def test_identify_nodes_keeps_root_name(triangle):
    q = identify_nodes(triangle, ["O", "P"])
    assert q.root == "O"
    assert isinstance(q, Network)
    assert {a.id for a in q.arcs if a.is_loop} == {"e1"}
