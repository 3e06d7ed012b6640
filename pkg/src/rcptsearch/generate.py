"""Seeded random networks for property tests and batch experiments.

Arc lengths are uniform on [0.1, 2].  Every generator is a pure function of
its seed.
"""

from __future__ import annotations

import random

from .network import Arc, Network

KINDS = ("tree", "eulerian", "weakly_eulerian", "general", "bridgeless")
LENGTH_RANGE = (0.1, 2.0)


class _Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.nodes = ["n0"]
        self.arcs: list[Arc] = []

    def node(self) -> str:
        name = f"n{len(self.nodes)}"
        self.nodes.append(name)
        return name

    def arc(self, u: str, v: str) -> None:
        self.arcs.append(Arc(f"a{len(self.arcs)}", u, v, round(self.rng.uniform(*LENGTH_RANGE), 6)))

    def cycle(self, through: list[str]) -> None:
        for a, b in zip(through, through[1:] + through[:1]):
            self.arc(a, b)

    def network(self) -> Network:
        return Network("n0", tuple(self.nodes), tuple(self.arcs))


def random_tree(seed: int, n_nodes: int | None = None) -> Network:
    rng = random.Random(seed)
    n = n_nodes if n_nodes is not None else rng.randint(2, 10)
    b = _Builder(rng)
    for _ in range(n - 1):
        parent = rng.choice(b.nodes)
        b.arc(parent, b.node())
    return b.network()


def random_eulerian(seed: int, n_cycles: int | None = None) -> Network:
    """Union of arc-disjoint cycles, each sharing a node with the earlier ones."""
    rng = random.Random(seed)
    b = _Builder(rng)
    k = n_cycles if n_cycles is not None else rng.randint(1, 4)
    for i in range(k):
        anchor = b.nodes[0] if i == 0 else rng.choice(b.nodes)
        size = rng.randint(1, 4)
        through = [anchor]
        for _ in range(size - 1):
            if rng.random() < 0.3 and len(b.nodes) > 1:
                cand = rng.choice(b.nodes)
                if cand not in through:
                    through.append(cand)
                    continue
            through.append(b.node())
        b.cycle(through)
    return b.network()


def random_weakly_eulerian(seed: int) -> Network:
    """A random tree with cycles hung on some of its nodes."""
    rng = random.Random(seed)
    b = _Builder(rng)
    for _ in range(rng.randint(0, 6)):
        b.arc(rng.choice(b.nodes), b.node())
    for _ in range(rng.randint(1, 3)):
        anchor = rng.choice(b.nodes)
        through = [anchor] + [b.node() for _ in range(rng.randint(0, 3))]
        b.cycle(through)
        if rng.random() < 0.5:
            b.arc(rng.choice(through), b.node())
    return b.network()


def random_general(seed: int, n_nodes: int | None = None, n_chords: int | None = None) -> Network:
    """A random tree plus chords (which may be parallel arcs or self-loops)."""
    rng = random.Random(seed)
    n = n_nodes if n_nodes is not None else rng.randint(2, 9)
    b = _Builder(rng)
    for _ in range(n - 1):
        b.arc(rng.choice(b.nodes), b.node())
    for _ in range(n_chords if n_chords is not None else rng.randint(1, 4)):
        b.arc(rng.choice(b.nodes), rng.choice(b.nodes))
    return b.network()


def random_bridgeless(seed: int) -> Network:
    """A cycle grown by ears, hence 2-arc-connected."""
    rng = random.Random(seed)
    b = _Builder(rng)
    b.cycle([b.nodes[0]] + [b.node() for _ in range(rng.randint(0, 4))])
    for _ in range(rng.randint(0, 4)):
        u, v = rng.choice(b.nodes), rng.choice(b.nodes)
        inner = [b.node() for _ in range(rng.randint(0, 2))]
        chain = [u] + inner + [v]
        for a, c in zip(chain, chain[1:]):
            b.arc(a, c)
    return b.network()


def random_network(kind: str, seed: int) -> Network:
    if kind == "tree":
        return random_tree(seed)
    if kind == "eulerian":
        return random_eulerian(seed)
    if kind == "weakly_eulerian":
        return random_weakly_eulerian(seed)
    if kind == "general":
        return random_general(seed)
    if kind == "bridgeless":
        return random_bridgeless(seed)
    raise ValueError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def mixed_instances(count: int, seed: int = 0, kinds=KINDS) -> list[tuple[str, int, Network]]:
    """``count`` networks cycling through ``kinds``, seeds derived from ``seed``."""
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        s = seed * 1_000_003 + i
        out.append((kind, s, random_network(kind, s)))
    return out
