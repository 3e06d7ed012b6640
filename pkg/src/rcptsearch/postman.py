"""Chinese Postman Tours and first-visit (search) times of closed walks.

A tour is a closed walk from the root made of full-arc traversals.  The
optimal tour duplicates shortest paths between odd-degree nodes chosen by a
minimum-weight perfect matching and then walks an Eulerian circuit of the
augmented multigraph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .network import TOL, Network, Point, shortest_paths

MAX_ODD_NODES = 20


class CoverageError(ValueError):
    """A tour misses at least one arc, so some points are never found."""

    def __init__(self, missing: Sequence[str]):
        self.missing = tuple(missing)
        super().__init__(f"tour never traverses arcs: {', '.join(self.missing)}")


@dataclass(frozen=True)
class Step:
    """One full traversal of an arc; ``forward`` means from ``u`` to ``v``."""

    arc: str
    forward: bool

    def flipped(self) -> Step:
        return Step(self.arc, not self.forward)

    @property
    def token(self) -> str:
        return f"{self.arc}:{'+' if self.forward else '-'}"

    @classmethod
    def parse(cls, token: str) -> Step:
        arc, _, sign = token.rpartition(":")
        if not arc or sign not in "+-" or not sign:
            raise ValueError(f"bad step token {token!r}")
        return cls(arc, sign == "+")


@dataclass(frozen=True)
class Tour:
    network: Network = field(repr=False)
    start: str
    steps: tuple[Step, ...]
    times: tuple[float, ...] = field(init=False)
    length: float = field(init=False)

    def __post_init__(self) -> None:
        net = self.network
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        node = self.start
        times = []
        t = 0.0
        for step in steps:
            arc = net.arc(step.arc)
            tail, head = (arc.u, arc.v) if step.forward else (arc.v, arc.u)
            if tail != node:
                raise ValueError(f"step {step.token} does not start at {node!r}")
            times.append(t)
            t += arc.length
            node = head
        if node != self.start:
            raise ValueError("tour is not closed")
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "length", t)

    @classmethod
    def from_tokens(cls, net: Network, tokens: Iterable[str], start: str | None = None) -> Tour:
        return cls(net, net.root if start is None else start, tuple(Step.parse(t) for t in tokens))

    @property
    def tokens(self) -> list[str]:
        return [s.token for s in self.steps]

    def __str__(self) -> str:
        return " ".join(self.tokens)

    def covers(self) -> bool:
        return {s.arc for s in self.steps} == {a.id for a in self.network.arcs}

    def missing_arcs(self) -> list[str]:
        used = {s.arc for s in self.steps}
        return [a.id for a in self.network.arcs if a.id not in used]


def reverse_tour(t: Tour) -> Tour:
    return Tour(t.network, t.start, tuple(s.flipped() for s in reversed(t.steps)))


# --- visit profiles --------------------------------------------------------------

@dataclass(frozen=True)
class ArcProfile:
    """First-visit time along one arc.

    Interior points at offset ``x`` are first reached at
    ``min(fwd + x, bwd + length - x)`` where ``fwd``/``bwd`` are the earliest
    entry times of a forward/backward traversal (``inf`` when absent).  The
    endpoints themselves take their node's first-visit time, which may be
    smaller than the interior limit.
    """

    arc: str
    length: float
    fwd: float
    bwd: float
    start_time: float
    end_time: float

    def interior(self, x: float) -> float:
        return min(self.fwd + x, self.bwd + self.length - x)

    def at(self, x: float) -> float:
        if x <= TOL:
            return self.start_time
        if x >= self.length - TOL:
            return self.end_time
        return self.interior(x)

    @property
    def peak_offset(self) -> float:
        """Offset where the forward and backward lines cross, clipped to the arc."""
        if math.isinf(self.bwd):
            return self.length
        if math.isinf(self.fwd):
            return 0.0
        return min(max((self.bwd + self.length - self.fwd) / 2, 0.0), self.length)

    def breakpoints(self) -> list[tuple[float, float]]:
        """(offset, time) vertices of the interior function on the closed arc."""
        xs = sorted({0.0, self.peak_offset, self.length})
        return [(x, self.interior(x)) for x in xs]


@dataclass(frozen=True)
class VisitProfile:
    tour: Tour = field(repr=False)
    node_times: dict[str, float]
    arcs: dict[str, ArcProfile]

    def time(self, p: Point) -> float:
        if p.node is not None:
            return self.node_times[p.node]
        return self.arcs[p.arc].at(p.offset)

    def rows(self) -> Iterator[tuple[str, float, float]]:
        for arc in self.tour.network.arcs:
            for x, t in self.arcs[arc.id].breakpoints():
                yield arc.id, x, t


def visit_profile(t: Tour) -> VisitProfile:
    net = t.network
    missing = t.missing_arcs()
    if missing:
        raise CoverageError(missing)
    node_times = {t.start: 0.0}
    fwd = {a.id: math.inf for a in net.arcs}
    bwd = dict(fwd)
    for step, entry in zip(t.steps, t.times):
        arc = net.arc(step.arc)
        head = arc.v if step.forward else arc.u
        if step.forward:
            fwd[arc.id] = min(fwd[arc.id], entry)
        else:
            bwd[arc.id] = min(bwd[arc.id], entry)
        node_times.setdefault(head, entry + arc.length)
    arcs = {
        a.id: ArcProfile(a.id, a.length, fwd[a.id], bwd[a.id], node_times[a.u], node_times[a.v])
        for a in net.arcs
    }
    return VisitProfile(t, node_times, arcs)


# --- Eulerian circuits -----------------------------------------------------------

def euler_circuit(net: Network, multiplicity: dict[str, int], start: str) -> list[Step]:
    """Hierholzer's algorithm on ``net`` with arc ``a`` repeated ``multiplicity[a]`` times.

    At each node the unused copy with the smallest (copy index, arc id) is
    taken, so original arcs are walked before their duplicates.
    """
    total = sum(multiplicity.values())
    if total == 0:
        return []
    # per node: sorted (copy index, arc id) keys of incident copies
    incident: dict[str, list[tuple[int, str]]] = {n: [] for n in net.nodes}
    for arc in net.arcs:
        for k in range(multiplicity.get(arc.id, 0)):
            incident[arc.u].append((k, arc.id))
            if not arc.is_loop:
                incident[arc.v].append((k, arc.id))
    for n in incident:
        incident[n].sort()
    pos = {n: 0 for n in net.nodes}
    used: set[tuple[int, str]] = set()
    stack: list[tuple[str, Step | None]] = [(start, None)]
    out: list[Step] = []
    while stack:
        node, via = stack[-1]
        keys = incident[node]
        while pos[node] < len(keys) and keys[pos[node]] in used:
            pos[node] += 1
        if pos[node] == len(keys):
            stack.pop()
            if via is not None:
                out.append(via)
            continue
        key = keys[pos[node]]
        used.add(key)
        arc = net.arc(key[1])
        forward = arc.u == node
        stack.append((arc.v if forward else arc.u, Step(arc.id, forward)))
    if len(used) != total:
        raise ValueError("augmented multigraph is not connected")
    out.reverse()
    return out


def _check_even(net: Network, multiplicity: dict[str, int]) -> None:
    deg = {n: 0 for n in net.nodes}
    for arc in net.arcs:
        k = multiplicity.get(arc.id, 0)
        deg[arc.u] += k
        deg[arc.v] += k
    odd = [n for n, d in deg.items() if d % 2]
    if odd:
        raise ValueError(f"augmented multigraph has odd nodes {odd}")


# --- matching --------------------------------------------------------------------

def min_weight_perfect_matching(nodes: Sequence[str], dist) -> tuple[float, list[tuple[str, str]]]:
    """Exact minimum-weight perfect matching by dynamic programming over subsets.

    ``dist(a, b)`` gives the pair cost.  The lowest unmatched node is always
    paired first, so each subset is solved once: O(2^k k) states-times-choices.
    """
    k = len(nodes)
    if k % 2:
        raise ValueError("perfect matching needs an even number of nodes")
    if k > MAX_ODD_NODES:
        raise ValueError(f"{k} odd nodes exceeds the exact matching limit of {MAX_ODD_NODES}")
    w = [[dist(a, b) if i < j else 0.0 for j, b in enumerate(nodes)] for i, a in enumerate(nodes)]
    full = (1 << k) - 1

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[float, int]:
        # mask: already-matched nodes; returns (cost, partner of lowest free node)
        if mask == full:
            return 0.0, -1
        i = (~mask & (mask + 1)).bit_length() - 1
        rest = mask | (1 << i)
        choice = (math.inf, -1)
        for j in range(i + 1, k):
            if rest >> j & 1:
                continue
            cost = w[i][j] + best(rest | (1 << j))[0]
            if cost < choice[0] - 1e-15:
                choice = (cost, j)
        return choice

    pairs = []
    mask = 0
    total = best(0)[0]
    while mask != full:
        i = (~mask & (mask + 1)).bit_length() - 1
        j = best(mask)[1]
        pairs.append((nodes[i], nodes[j]))
        mask |= (1 << i) | (1 << j)
    best.cache_clear()
    return total, pairs


def _path_arcs(pred: dict, target: str) -> list[str]:
    arcs = []
    node = target
    while pred[node] is not None:
        arc_id, prev = pred[node]
        arcs.append(arc_id)
        node = prev
    return arcs


def postman_augmentation(net: Network) -> dict[str, int]:
    """Arc multiplicities of the cheapest Eulerian supergraph."""
    odd = net.odd_nodes()
    paths = {n: shortest_paths(net, n) for n in odd}
    _, pairs = min_weight_perfect_matching(odd, lambda a, b: paths[a][0][b])
    mult = {a.id: 1 for a in net.arcs}
    for a, b in pairs:
        for arc_id in _path_arcs(paths[a][1], b):
            mult[arc_id] += 1
    # pairs of duplicates cancel without changing parity
    return {a: 1 + (k - 1) % 2 for a, k in mult.items()}


def chinese_postman(net: Network) -> Tour:
    mult = postman_augmentation(net)
    _check_even(net, mult)
    return Tour(net, net.root, tuple(euler_circuit(net, mult, net.root)))


def doubled_tour(net: Network) -> Tour:
    """A covering tour of length exactly twice the total length."""
    mult = {a.id: 2 for a in net.arcs}
    return Tour(net, net.root, tuple(euler_circuit(net, mult, net.root)))
