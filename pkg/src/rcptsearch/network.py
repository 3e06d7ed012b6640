"""Rooted networks: arcs with lengths, points on arcs, and shortest-path distances.

A network is a connected multigraph whose arcs are line segments of positive
length.  Hiding places are points anywhere on an arc, so besides node-to-node
distances we need the distance of an arbitrary point from the root and the
farthest such point.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

TOL = 1e-9


class NetworkError(ValueError):
    """Raised for malformed or invalid network documents."""


@dataclass(frozen=True)
class Arc:
    id: str
    u: str
    v: str
    length: float

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise KeyError(f"node {node!r} is not an endpoint of arc {self.id!r}")


@dataclass(frozen=True)
class Point:
    """A point of the network.

    Canonical form: a node is ``Point(node=n)``; an interior point of an arc is
    ``Point(arc=a, offset=x)`` with ``0 < x < length`` measured from ``a.u``.
    Use :meth:`Network.point` to build canonical points from (arc, offset).
    """

    node: str | None = None
    arc: str | None = None
    offset: float = 0.0

    @classmethod
    def at(cls, node: str) -> Point:
        return cls(node=node)

    @property
    def is_node(self) -> bool:
        return self.node is not None

    def __str__(self) -> str:
        if self.node is not None:
            return self.node
        return f"{self.arc}@{self.offset:.12g}"


@dataclass(frozen=True)
class Network:
    root: str
    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...]
    _by_id: Mapping[str, Arc] = field(init=False, repr=False, compare=False)
    _incident: Mapping[str, tuple[Arc, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        arcs = tuple(self.arcs)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", arcs)
        if len(set(nodes)) != len(nodes):
            raise NetworkError("duplicate node id")
        if self.root not in nodes:
            raise NetworkError(f"root {self.root!r} is not a node")
        known = set(nodes)
        by_id: dict[str, Arc] = {}
        incident: dict[str, list[Arc]] = {n: [] for n in nodes}
        for arc in arcs:
            if arc.id in by_id:
                raise NetworkError(f"duplicate arc id {arc.id!r}")
            for end in (arc.u, arc.v):
                if end not in known:
                    raise NetworkError(f"arc {arc.id!r} has unknown endpoint {end!r}")
            if not (isinstance(arc.length, (int, float)) and math.isfinite(arc.length)) or arc.length <= 0:
                raise NetworkError(f"arc {arc.id!r} has nonpositive length {arc.length!r}")
            by_id[arc.id] = arc
            incident[arc.u].append(arc)
            if not arc.is_loop:
                incident[arc.v].append(arc)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_incident", {n: tuple(a) for n, a in incident.items()})
        if not self._connected():
            raise NetworkError("network is disconnected")

    def _connected(self) -> bool:
        seen = {self.root}
        stack = [self.root]
        while stack:
            n = stack.pop()
            for arc in self._incident[n]:
                m = arc.other(n)
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == len(self.nodes)

    @property
    def total_length(self) -> float:
        return math.fsum(a.length for a in self.arcs)

    def arc(self, arc_id: str) -> Arc:
        try:
            return self._by_id[arc_id]
        except KeyError:
            raise KeyError(f"unknown arc {arc_id!r}") from None

    def incident(self, node: str) -> tuple[Arc, ...]:
        return self._incident[node]

    def degree(self, node: str) -> int:
        return sum(2 if a.is_loop else 1 for a in self._incident[node])

    def odd_nodes(self) -> list[str]:
        return [n for n in self.nodes if self.degree(n) % 2]

    def point(self, arc_id: str, offset: float) -> Point:
        """Canonical point at ``offset`` from the u-end of ``arc_id``."""
        arc = self.arc(arc_id)
        if offset < -TOL or offset > arc.length + TOL:
            raise ValueError(f"offset {offset} outside arc {arc_id!r} of length {arc.length}")
        if offset <= TOL:
            return Point(node=arc.u)
        if offset >= arc.length - TOL:
            return Point(node=arc.v)
        return Point(arc=arc_id, offset=float(offset))

    def measure(self, arc_ids: Iterable[str]) -> float:
        return math.fsum(self.arc(a).length for a in arc_ids)


def make_network(root: str, nodes: Iterable[str], arcs: Iterable[tuple[str, str, str, float]]) -> Network:
    return Network(root, tuple(nodes), tuple(Arc(i, u, v, float(l)) for i, u, v, l in arcs))


# --- file format ---------------------------------------------------------------

_TOP_KEYS = {"root", "nodes", "arcs"}
_ARC_KEYS = {"id", "u", "v", "length"}


def network_from_dict(doc: object) -> Network:
    if not isinstance(doc, dict):
        raise NetworkError("network document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise NetworkError(f"unknown keys: {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise NetworkError(f"missing keys: {sorted(missing)}")
    root, nodes, arcs = doc["root"], doc["nodes"], doc["arcs"]
    if not isinstance(root, str):
        raise NetworkError("root must be a string node id")
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise NetworkError("nodes must be a list of string ids")
    if not isinstance(arcs, list):
        raise NetworkError("arcs must be a list")
    parsed = []
    for entry in arcs:
        if not isinstance(entry, dict):
            raise NetworkError("each arc must be an object")
        if set(entry) != _ARC_KEYS:
            extra = set(entry) - _ARC_KEYS
            raise NetworkError(f"unknown arc keys: {sorted(extra)}" if extra else f"arc missing keys: {sorted(_ARC_KEYS - set(entry))}")
        length = entry["length"]
        if isinstance(length, bool) or not isinstance(length, (int, float)):
            raise NetworkError(f"arc {entry['id']!r}: length must be a number")
        if not all(isinstance(entry[k], str) for k in ("id", "u", "v")):
            raise NetworkError("arc id and endpoints must be strings")
        parsed.append(Arc(entry["id"], entry["u"], entry["v"], float(length)))
    return Network(root, tuple(nodes), tuple(parsed))


def parse_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"malformed JSON: {exc}") from None
    return network_from_dict(doc)


def load_network(path: str | Path) -> Network:
    return parse_network(Path(path).read_text(encoding="utf-8"))


def network_to_dict(net: Network) -> dict:
    return {
        "root": net.root,
        "nodes": list(net.nodes),
        "arcs": [{"id": a.id, "u": a.u, "v": a.v, "length": a.length} for a in net.arcs],
    }


def dump_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2)


# --- distances -----------------------------------------------------------------

def shortest_paths(net: Network, source: str) -> tuple[dict[str, float], dict[str, tuple[str, str] | None]]:
    """Dijkstra from ``source``.

    Returns distances and, per node, the (arc id, previous node) used to reach it.
    Ties are broken towards the smaller arc id so paths are reproducible.
    """
    dist = {n: math.inf for n in net.nodes}
    pred: dict[str, tuple[str, str] | None] = {source: None}
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, n = heapq.heappop(heap)
        if d > dist[n]:
            continue
        for arc in sorted(net.incident(n), key=lambda a: a.id):
            if arc.is_loop:
                continue
            m = arc.other(n)
            nd = d + arc.length
            if nd < dist[m] - 1e-15:
                dist[m] = nd
                pred[m] = (arc.id, n)
                heapq.heappush(heap, (nd, m))
    return dist, pred


@dataclass(frozen=True)
class DistanceOracle:
    network: Network
    node_dist: Mapping[str, Mapping[str, float]]
    d_max: float
    witness: Point

    def from_root(self, node: str) -> float:
        return self.node_dist[self.network.root][node]

    def between(self, a: str, b: str) -> float:
        return self.node_dist[a][b]


def distances(net: Network) -> DistanceOracle:
    table = {n: shortest_paths(net, n)[0] for n in net.nodes}
    d = table[net.root]
    best = 0.0
    witness = Point(node=net.root)
    for arc in net.arcs:
        peak = (d[arc.u] + d[arc.v] + arc.length) / 2
        if peak > best + TOL:
            best = peak
            x = min(max((d[arc.v] + arc.length - d[arc.u]) / 2, 0.0), arc.length)
            witness = net.point(arc.id, x)
    return DistanceOracle(net, table, best, witness)


def point_distance(oracle: DistanceOracle, p: Point) -> float:
    """Shortest distance from the root to ``p``."""
    net = oracle.network
    if p.node is not None:
        return oracle.from_root(p.node)
    arc = net.arc(p.arc)
    if p.offset < -TOL or p.offset > arc.length + TOL:
        raise ValueError(f"offset {p.offset} outside arc {arc.id!r} of length {arc.length}")
    return min(oracle.from_root(arc.u) + p.offset, oracle.from_root(arc.v) + arc.length - p.offset)

