import json
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcptsearch.generate import random_network
from rcptsearch.network import (
    Arc,
    Network,
    NetworkError,
    Point,
    distances,
    dump_network,
    make_network,
    parse_network,
    point_distance,
)

seeds = st.integers(min_value=0, max_value=10**6)
kinds = st.sampled_from(["tree", "eulerian", "weakly_eulerian", "general", "bridgeless"])


def test_parse_three_arc(data_dir):
    net = parse_network((data_dir / "three_arc.json").read_text())
    assert net.total_length == 3
    assert net.root == "A"
    assert [a.id for a in net.arcs] == ["a1", "a2", "a3"]
    assert net.degree("A") == 3


def test_single_node_network():
    net = parse_network('{"root": "O", "nodes": ["O"], "arcs": []}')
    assert net.total_length == 0
    assert distances(net).d_max == 0


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ('{"root": "A", "nodes": ["A"], "arcs": [{"id": "a", "u": "A", "v": "X", "length": 1}]}', "unknown endpoint"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": [{"id": "a", "u": "A", "v": "B", "length": 0}]}', "nonpositive"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": [{"id": "a", "u": "A", "v": "B", "length": -2}]}', "nonpositive"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": []}', "disconnected"),
        ('{"root": "Z", "nodes": ["A"], "arcs": []}', "root"),
        ('{"nodes": ["A"], "arcs": []}', "missing"),
        ('{"root": "A", "nodes": ["A"], "arcs": [], "extra": 1}', "unknown keys"),
        ('{"root": "A", "nodes": ["A", "A"], "arcs": []}', "duplicate node"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": [{"id": "a", "u": "A", "v": "B", "length": 1}, {"id": "a", "u": "A", "v": "B", "length": 1}]}', "duplicate arc"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": [{"id": "a", "u": "A", "v": "B", "length": 1, "w": 3}]}', "unknown arc keys"),
        ('{"root": "A", "nodes": ["A", "B"], "arcs": [{"id": "a", "u": "A", "v": "B", "length": "1"}]}', "number"),
        ("[1, 2", "malformed"),
    ],
)
def test_parse_rejects(doc, fragment):
    with pytest.raises(NetworkError, match=fragment):
        parse_network(doc)


def test_roundtrip(three_arc):
    assert parse_network(dump_network(three_arc)) == three_arc


def test_self_loop_counts_twice():
    net = make_network("O", ["O"], [("l", "O", "O", 1.0)])
    assert net.degree("O") == 2
    assert net.odd_nodes() == []


def test_point_canonical(three_arc):
    assert three_arc.point("a1", 0) == Point(node="A")
    assert three_arc.point("a1", 1.0) == Point(node="B")
    assert three_arc.point("a1", 1e-12) == Point(node="A")
    assert three_arc.point("a2", 0.25) == Point(arc="a2", offset=0.25)
    with pytest.raises(ValueError):
        three_arc.point("a1", 1.5)


def test_star_distances(star):
    o = distances(star)
    assert o.d_max == 2
    assert o.witness == Point(node="y")


def test_triangle_farthest_point_is_midpoint(triangle):
    o = distances(triangle)
    assert o.d_max == pytest.approx(1.5, abs=1e-12)
    assert o.witness == Point(arc="e2", offset=0.5)


def test_three_arc_dmax_matches_grid(three_arc):
    o = distances(three_arc)
    grid = max(point_distance(o, Point(arc=a.id, offset=k / 1000)) for a in three_arc.arcs for k in range(1, 1000))
    assert max(grid, o.from_root("B")) == pytest.approx(1.0, abs=1e-12)
    assert o.d_max == 1.0
    assert o.witness == Point(node="B")


def test_point_distance_examples(triangle):
    pend = make_network("O", ["O", "x"], [("p", "O", "x", 2.0)])
    assert point_distance(distances(pend), Point(arc="p", offset=1.0)) == 1.0
    ot = distances(triangle)
    assert point_distance(ot, Point(node="O")) == 0
    assert point_distance(ot, Point(arc="e2", offset=0.5)) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        point_distance(ot, Point(arc="e2", offset=3.0))


def _subdivided(net, spacing):
    """networkx graph with every arc cut into pieces no longer than ``spacing``."""
    g = nx.Graph()
    g.add_node(net.root)
    names = {}
    for arc in net.arcs:
        k = max(1, math.ceil(arc.length / spacing))
        chain = [arc.u] + [f"{arc.id}#{i}" for i in range(1, k)] + [arc.v]
        for i in range(1, k):
            names[(arc.id, i)] = (chain[i], arc.length * i / k)
        for a, b in zip(chain, chain[1:]):
            w = arc.length / k
            if a == b:
                continue
            if g.has_edge(a, b):
                w = min(w, g[a][b]["weight"])
            g.add_edge(a, b, weight=w)
    return g, names


@settings(max_examples=40, deadline=None)
@given(kinds, seeds)
def test_point_distance_matches_subdivided_dijkstra(kind, seed):
    net = random_network(kind, seed)
    o = distances(net)
    spacing = 0.05
    g, names = _subdivided(net, spacing)
    dist = nx.single_source_dijkstra_path_length(g, net.root)
    for (arc_id, _), (node, x) in names.items():
        assert abs(point_distance(o, Point(arc=arc_id, offset=x)) - dist[node]) <= 1e-9
    assert max(dist.values()) <= o.d_max + 1e-9
    assert o.d_max <= max(dist.values()) + spacing


@settings(max_examples=40, deadline=None)
@given(kinds, seeds)
def test_distance_invariants(kind, seed):
    net = random_network(kind, seed)
    o = distances(net)
    d = o.node_dist[net.root]
    assert d[net.root] == 0
    for arc in net.arcs:
        assert abs(d[arc.u] - d[arc.v]) <= arc.length + 1e-9
    for a in net.nodes:
        for b in net.nodes:
            for c in net.nodes:
                assert o.between(a, c) <= o.between(a, b) + o.between(b, c) + 1e-9
    assert o.d_max == pytest.approx(max((d[a.u] + d[a.v] + a.length) / 2 for a in net.arcs))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["tree", "general"]), seeds, st.floats(0.1, 0.9))
def test_subdivision_preserves_length_and_distances(kind, seed, frac):
    net = random_network(kind, seed)
    target = net.arcs[0]
    split = target.length * frac
    arcs = [a for a in net.arcs if a.id != target.id]
    arcs += [Arc("s1", target.u, "mid", split), Arc("s2", "mid", target.v, target.length - split)]
    sub = Network(net.root, net.nodes + ("mid",), tuple(arcs))
    assert sub.total_length == pytest.approx(net.total_length)
    o1, o2 = distances(net), distances(sub)
    assert o2.d_max == pytest.approx(o1.d_max)
    for n in net.nodes:
        assert o2.from_root(n) == pytest.approx(o1.from_root(n))


def test_tree_witness_is_leaf():
    for seed in range(30):
        net = random_network("tree", seed)
        w = distances(net).witness
        assert w.node is not None and net.degree(w.node) == 1


def test_network_json_schema(data_dir, three_arc):
    import jsonschema

    schema = json.loads((data_dir.parent / "src/rcptsearch/schemas/network.schema.json").read_text())
    jsonschema.validate(json.loads(dump_network(three_arc)), schema)
