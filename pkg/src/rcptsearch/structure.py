"""Bridges, blocks and the bridge-block tree.

Two nodes are in the same block when they are joined by two arc-disjoint
paths.  Bridges are the arcs whose removal disconnects the network; removing
them leaves the blocks as connected components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .network import Arc, Network

TREE = "tree"
EULERIAN = "eulerian"
WEAKLY_EULERIAN = "weakly_eulerian"
GENERAL = "general"


@dataclass(frozen=True)
class Block:
    id: int
    nodes: frozenset[str]
    arcs: tuple[str, ...]
    length: float

    @property
    def trivial(self) -> bool:
        return not self.arcs


@dataclass(frozen=True)
class StructureReport:
    bridges: frozenset[str]
    blocks: tuple[Block, ...]
    block_of: dict[str, int]
    mu1: float
    mu2: float
    is_eulerian: bool
    is_weakly_eulerian: bool
    # (block, block, bridge arc id) edges of the bridge-block tree
    bridge_block_tree: tuple[tuple[int, int, str], ...]

    @property
    def mu(self) -> float:
        return self.mu1 + self.mu2

    @property
    def two_arc_connected(self) -> bool:
        return not self.bridges


def find_bridges(net: Network) -> set[str]:
    """Arc ids of all bridges, by one depth-first search with low-link values.

    The search skips only the arc it arrived by (not every arc to the parent
    node), so parallel arcs correctly count as a cycle.
    """
    order: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[str] = set()
    counter = 0
    for start in net.nodes:
        if start in order:
            continue
        order[start] = low[start] = counter
        counter += 1
        # frame: node, arc id used to enter, iterator over incident arcs
        stack = [(start, None, iter(sorted(net.incident(start), key=lambda a: a.id)))]
        while stack:
            node, via, arcs = stack[-1]
            advanced = False
            for arc in arcs:
                if arc.id == via or arc.is_loop:
                    continue
                nxt = arc.other(node)
                if nxt in order:
                    low[node] = min(low[node], order[nxt])
                else:
                    order[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append((nxt, arc.id, iter(sorted(net.incident(nxt), key=lambda a: a.id))))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[node])
                if low[node] > order[parent]:
                    bridges.add(via)
    return bridges


def _block_degree_even(net: Network, nodes: Iterable[str], arc_ids: set[str]) -> bool:
    for n in nodes:
        deg = 0
        for arc in net.incident(n):
            if arc.id in arc_ids:
                deg += 2 if arc.is_loop else 1
        if deg % 2:
            return False
    return True


def decompose(net: Network) -> StructureReport:
    bridges = find_bridges(net)
    block_of: dict[str, int] = {}
    blocks: list[Block] = []
    for start in net.nodes:
        if start in block_of:
            continue
        bid = len(blocks)
        members = {start}
        block_of[start] = bid
        stack = [start]
        arc_ids: set[str] = set()
        while stack:
            n = stack.pop()
            for arc in net.incident(n):
                if arc.id in bridges:
                    continue
                arc_ids.add(arc.id)
                m = arc.other(n)
                if m not in block_of:
                    block_of[m] = bid
                    members.add(m)
                    stack.append(m)
        ordered = tuple(a.id for a in net.arcs if a.id in arc_ids)
        blocks.append(Block(bid, frozenset(members), ordered, net.measure(ordered)))

    tree_edges = tuple(
        (block_of[a.u], block_of[a.v], a.id) for a in net.arcs if a.id in bridges
    )
    mu1 = net.measure(a.id for a in net.arcs if a.id in bridges)
    mu2 = math.fsum(b.length for b in blocks)
    eulerian = all(net.degree(n) % 2 == 0 for n in net.nodes)
    weakly = all(_block_degree_even(net, b.nodes, set(b.arcs)) for b in blocks)
    return StructureReport(
        bridges=frozenset(bridges),
        blocks=tuple(blocks),
        block_of=block_of,
        mu1=mu1,
        mu2=mu2,
        is_eulerian=eulerian,
        is_weakly_eulerian=weakly,
        bridge_block_tree=tree_edges,
    )


def classify(report: StructureReport) -> str:
    """Most specific of ``tree``, ``eulerian``, ``weakly_eulerian``, ``general``."""
    if all(b.trivial for b in report.blocks):
        return TREE
    if report.is_eulerian:
        return EULERIAN
    if report.is_weakly_eulerian:
        return WEAKLY_EULERIAN
    return GENERAL


def is_tree(net: Network) -> bool:
    return len(net.arcs) == len(net.nodes) - 1


def identify_nodes(net: Network, group: Iterable[str], name: str | None = None) -> Network:
    """Merge the nodes in ``group`` into a single node.

    Arcs with both ends in the group become self-loops of the merged node, so
    the total length is unchanged.  The merged node takes the root's name if
    the root is in the group, else ``name`` or the group's first node.
    """
    group = set(group)
    if not group <= set(net.nodes):
        raise KeyError(f"unknown nodes {sorted(group - set(net.nodes))}")
    if net.root in group:
        merged = net.root
    else:
        merged = name if name is not None else next(n for n in net.nodes if n in group)
    nodes: list[str] = []
    for n in net.nodes:
        m = merged if n in group else n
        if m not in nodes:
            nodes.append(m)
    arcs = [
        Arc(a.id, merged if a.u in group else a.u, merged if a.v in group else a.v, a.length)
        for a in net.arcs
    ]
    root = merged if net.root in group else net.root
    return Network(root, tuple(nodes), tuple(arcs))


def contract_blocks(net: Network, report: StructureReport | None = None) -> Network:
    """The weakly Eulerian surrogate: every block shrunk to a single node."""
    if report is None:
        report = decompose(net)
    out = net
    for block in report.blocks:
        if len(block.nodes) > 1:
            out = identify_nodes(out, block.nodes)
    return out
