"""Find-and-fetch search: the Searcher must carry the Hider back at speed ``rho``.

Payoff is search time plus ``d(H) / rho``.  For trees the Hider's Equal
Branch Density distribution gives a lower bound on the value; pruning
branches towards the root lowers its mean leaf distance in a controlled way,
which is what bounds the Random Chinese Postman Tour's ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classic import BoundViolation, rcpt_profiles, worst_point
from .network import TOL, Arc, Network, Point, distances
from .postman import chinese_postman
from .structure import EULERIAN, TREE, classify, decompose, is_tree

ALPHA_TREE_BREAK = 1.0 / 3.0


class NotATreeError(ValueError):
    pass


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not rho > 0 or math.isnan(rho):
        raise ValueError(f"return speed must be positive, got {rho}")
    return rho


# --- rooted trees ----------------------------------------------------------------

@dataclass(frozen=True)
class RootedTree:
    network: Network
    parent_arc: dict[str, str | None]
    children: dict[str, tuple[str, ...]]  # node -> arc ids leading away from the root
    depth: dict[str, float]
    above: dict[str, float]  # arc id -> length of the arc plus everything above it
    order: tuple[str, ...]  # nodes, root first, parents before children

    @classmethod
    def of(cls, net: Network) -> RootedTree:
        if not is_tree(net):
            raise NotATreeError("network is not a tree")
        parent_arc: dict[str, str | None] = {net.root: None}
        children: dict[str, list[str]] = {n: [] for n in net.nodes}
        depth = {net.root: 0.0}
        order = [net.root]
        i = 0
        while i < len(order):
            n = order[i]
            i += 1
            for arc in sorted(net.incident(n), key=lambda a: a.id):
                if arc.id == parent_arc[n]:
                    continue
                m = arc.other(n)
                parent_arc[m] = arc.id
                children[n].append(arc.id)
                depth[m] = depth[n] + arc.length
                order.append(m)
        above: dict[str, float] = {}
        for n in reversed(order):
            a = parent_arc[n]
            if a is not None:
                above[a] = net.arc(a).length + math.fsum(above[c] for c in children[n])
        return cls(net, parent_arc, {n: tuple(c) for n, c in children.items()}, depth, above, tuple(order))

    def child(self, arc_id: str) -> str:
        """Endpoint of ``arc_id`` farther from the root."""
        arc = self.network.arc(arc_id)
        return arc.v if self.parent_arc.get(arc.v) == arc_id else arc.u

    def parent(self, arc_id: str) -> str:
        return self.network.arc(arc_id).other(self.child(arc_id))

    def branch_length(self, node: str) -> float:
        """Length of everything above ``node``."""
        return math.fsum(self.above[a] for a in self.children[node])

    def is_branch_node(self, node: str) -> bool:
        return len(self.children[node]) >= 2

    @property
    def branch_nodes(self) -> list[str]:
        return [n for n in self.order if self.is_branch_node(n)]

    @property
    def leaves(self) -> list[str]:
        return [n for n in self.order if n != self.network.root and not self.children[n]]

    def path_to(self, node: str) -> list[str]:
        """Arc ids on the path from the root to ``node``, root end first."""
        arcs = []
        while self.parent_arc[node] is not None:
            a = self.parent_arc[node]
            arcs.append(a)
            node = self.parent(a)
        return arcs[::-1]

    def leaf_distribution(self, node: str) -> dict[str, float]:
        """EBD distribution of the subtree above ``node``, rooted at ``node``."""
        probs: dict[str, float] = {}
        stack = [(node, 1.0)]
        while stack:
            n, mass = stack.pop()
            kids = self.children[n]
            if not kids:
                probs[n] = probs.get(n, 0.0) + mass
                continue
            total = self.branch_length(n)
            for a in kids:
                stack.append((self.child(a), mass * self.above[a] / total))
        return probs


# --- EBD -------------------------------------------------------------------------

@dataclass(frozen=True)
class EbdResult:
    probabilities: dict[str, float]
    D: float
    tree: RootedTree = field(repr=False)

    @property
    def branch_nodes(self) -> list[str]:
        return self.tree.branch_nodes

    def branch_length(self, arc_id: str) -> float:
        """Length of the branch starting with ``arc_id``."""
        return self.tree.above[arc_id]

    def subtree_length(self, node: str) -> float:
        """Length of the union of all branches at ``node``."""
        return self.tree.branch_length(node)

    def mass_above(self, node: str) -> float:
        """Probability that the Hider is above ``node`` (at a leaf of its subtree)."""
        return math.fsum(self.probabilities[l] for l in self.tree.leaf_distribution(node))

    def as_dict(self) -> dict:
        return {
            "D": self.D,
            "probabilities": dict(sorted(self.probabilities.items())),
            "branch_nodes": self.branch_nodes,
        }


def ebd(net: Network) -> EbdResult:
    tree = RootedTree.of(net)
    if not net.arcs:
        return EbdResult({net.root: 1.0}, 0.0, tree)
    probs = tree.leaf_distribution(net.root)
    D = math.fsum(p * tree.depth[l] for l, p in probs.items())
    return EbdResult(probs, D, tree)


def mean_leaf_distance(net: Network) -> float:
    return ebd(net).D


# --- pruning ---------------------------------------------------------------------

def prune(net: Network, branch_arc: str) -> Network:
    """Detach the branch starting with ``branch_arc`` and reattach it at the root."""
    tree = RootedTree.of(net)
    if branch_arc not in tree.above:
        raise KeyError(f"unknown arc {branch_arc!r}")
    u = tree.parent(branch_arc)
    if not tree.is_branch_node(u):
        raise ValueError(f"arc {branch_arc!r} is not a branch arc: {u!r} is not a branch node")
    if u == net.root:
        raise ValueError(f"arc {branch_arc!r} is a branch arc at the root; pruning needs a branch node other than the root")
    arcs = []
    for arc in net.arcs:
        if arc.id == branch_arc:
            arc = Arc(arc.id, net.root if arc.u == u else arc.u, net.root if arc.v == u else arc.v, arc.length)
        arcs.append(arc)
    return Network(net.root, net.nodes, tuple(arcs))


def legal_prunes(net: Network) -> list[str]:
    """Branch arcs at non-root branch nodes with no branch node strictly between them and the root."""
    tree = RootedTree.of(net)
    out = []
    for u in tree.branch_nodes:
        if u == net.root:
            continue
        between = [tree.parent(a) for a in tree.path_to(u)][1:]
        if any(tree.is_branch_node(n) for n in between):
            continue
        out.extend(sorted(tree.children[u]))
    return out


def pruning_gain(net: Network, branch_arc: str) -> float:
    """Closed-form decrease ``D(Q) - D(Q[a])`` for a legal prune.

    With ``Y`` the other branches at the branch node ``u``, ``D_a`` and
    ``D_Y`` their EBD mean depths measured from ``u`` and ``e_u`` the EBD mass
    above ``u``::

        e_u * m_a * d_u / ((m_a + m_Y) * (m_a + m_Y + d_u)) * (D_a + m_a + m_Y - D_Y)
    """
    tree = RootedTree.of(net)
    u = tree.parent(branch_arc)
    e = ebd(net)
    d_u = tree.depth[u]
    m_a = tree.above[branch_arc]
    others = [a for a in tree.children[u] if a != branch_arc]
    m_y = math.fsum(tree.above[a] for a in others)

    def mean_depth(arc_ids: list[str]) -> float:
        total = math.fsum(tree.above[a] for a in arc_ids)
        acc = 0.0
        for a in arc_ids:
            for leaf, p in tree.leaf_distribution(tree.child(a)).items():
                acc += tree.above[a] / total * p * (tree.depth[leaf] - d_u)
        return acc

    d_a = mean_depth([branch_arc])
    d_y = mean_depth(others)
    return e.mass_above(u) * m_a * d_u / ((m_a + m_y) * (m_a + m_y + d_u)) * (d_a + m_a + m_y - d_y)


def farthest_leaf(net: Network) -> str:
    tree = RootedTree.of(net)
    best, far = -1.0, net.root
    for n in tree.order:
        if tree.depth[n] > best + TOL:
            best, far = tree.depth[n], n
    return far


def prune_to_path(net: Network) -> Network:
    """Prune every off-path branch along the root path to a farthest leaf.

    The branch node nearest the root is handled first, its off-path branch
    arcs in ascending id order, which keeps every single prune legal.
    """
    target = farthest_leaf(net)
    out = net
    while True:
        tree = RootedTree.of(out)
        path = tree.path_to(target)
        on_path = set(path)
        todo = None
        for a in path[1:]:
            v = tree.parent(a)
            if tree.is_branch_node(v):
                todo = min(c for c in tree.children[v] if c not in on_path)
                break
        if todo is None:
            return out
        out = prune(out, todo)


# --- approximation ratios ----------------------------------------------------------

def tree_ratio_vs_ebd(z: float, rho: float) -> float:
    """Ratio bound against the EBD lower bound, with ``D`` replaced by ``z^2 mu``."""
    return (rho + z) / (rho + z * z)


def tree_ratio_vs_farthest(z: float, rho: float) -> float:
    """Ratio bound against the Hider who sits at a farthest point."""
    return (rho + z) / ((rho + 1) * z)


def eulerian_ratio_vs_uniform(z: float, rho: float) -> float:
    return (rho / 2 + z) / (rho / 2 + z * z)


def eulerian_ratio_vs_farthest(z: float, rho: float) -> float:
    return (rho / 2 + z) / (z * (1 + rho))


@dataclass(frozen=True)
class TreeAlpha:
    rho: float
    alpha: float
    z0: float  # maximizer of the EBD-bound curve
    case: str  # "low_speed" (rho <= 1/3) or "high_speed"


@dataclass(frozen=True)
class EulerianAlpha:
    rho: float
    alpha: float
    z1: float  # maximizer of the uniform-Hider curve
    z_cross: float  # first crossing of the two curves, where their minimum peaks


def tree_alpha(rho: float) -> TreeAlpha:
    rho = _check_rho(rho)
    if math.isinf(rho):
        return TreeAlpha(rho, 1.0, 0.5, "high_speed")
    # sqrt(rho^2 + rho) - rho, written to avoid cancellation at large rho
    z0 = 1.0 / (1.0 + math.sqrt(1.0 + 1.0 / rho))
    if rho <= ALPHA_TREE_BREAK:
        return TreeAlpha(rho, 2.0 / (1.0 + rho), z0, "low_speed")
    return TreeAlpha(rho, (1.0 + math.sqrt(1.0 + 1.0 / rho)) / 2.0, z0, "high_speed")


def alpha_tree(rho: float) -> float:
    return tree_alpha(rho).alpha


def eulerian_alpha(rho: float) -> EulerianAlpha:
    rho = _check_rho(rho)
    if math.isinf(rho):
        return EulerianAlpha(rho, 1.0, 0.5, 0.5)
    z1 = 1.0 / (1.0 + math.sqrt(1.0 + 2.0 / rho))
    # (1 + rho - sqrt(1 + rho^2)) / 2, cancellation-free
    z_cross = rho / (1.0 + rho + math.sqrt(1.0 + rho * rho))
    alpha = (3.0 + rho + math.sqrt(rho * rho + 1.0)) / (2.0 + 2.0 * rho)
    return EulerianAlpha(rho, alpha, z1, z_cross)


def alpha_eulerian(rho: float) -> float:
    return eulerian_alpha(rho).alpha


def crude_alpha(rho: float) -> float:
    rho = _check_rho(rho)
    return 2.0 * (1.0 + 1.0 / rho)


# --- report ------------------------------------------------------------------------

@dataclass(frozen=True)
class FindFetchReport:
    model: str  # "tree", "eulerian" or "general"
    rho: float
    mu: float
    d_max: float
    z: float
    r_rcpt: float
    r_rcpt_exact: float  # from the exact visit profiles, agrees with r_rcpt on trees and Eulerian networks
    v_lower: float
    lower_bounds: dict[str, float]
    ratio: float
    alpha: float
    details: dict[str, float | str]
    witness: Point

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "rho": self.rho,
            "mu": self.mu,
            "d_max": self.d_max,
            "z": self.z,
            "r_rcpt": self.r_rcpt,
            "r_rcpt_exact": self.r_rcpt_exact,
            "v_lower": self.v_lower,
            "lower_bounds": dict(sorted(self.lower_bounds.items())),
            "ratio": self.ratio,
            "alpha": self.alpha,
            "details": dict(sorted(self.details.items())),
            "witness": str(self.witness),
        }


def rcpt_fetch_worst_case(net: Network, rho: float):
    """Exact sup over points of the RCPT's expected search time plus ``d(H)/rho``."""
    rho = _check_rho(rho)
    tour = chinese_postman(net)
    oracle = distances(net)
    return worst_point(rcpt_profiles(tour), oracle, 0.0 if math.isinf(rho) else 1.0 / rho)


def findfetch_report(net: Network, rho: float) -> FindFetchReport:
    rho = _check_rho(rho)
    inv = 0.0 if math.isinf(rho) else 1.0 / rho
    structure = decompose(net)
    kind = classify(structure)
    oracle = distances(net)
    mu = net.total_length
    d_max = oracle.d_max
    z = d_max / mu if mu > 0 else 0.0
    exact = rcpt_fetch_worst_case(net, rho)
    farthest = d_max * (1.0 + inv)
    details: dict[str, float | str] = {}

    if kind == TREE:
        model = TREE
        D = ebd(net).D
        r = mu + d_max * inv
        bounds = {"ebd": mu + D * inv, "farthest_point": farthest}
        info = tree_alpha(rho)
        alpha = info.alpha
        details = {"D": D, "z0": info.z0, "case": info.case}
    elif kind == EULERIAN:
        model = EULERIAN
        r = mu / 2 + d_max * inv
        uniform = mu / 2 + (d_max * d_max * inv / mu if mu > 0 else 0.0)
        bounds = {"uniform": uniform, "farthest_point": farthest}
        info = eulerian_alpha(rho)
        alpha = info.alpha
        details = {"z1": info.z1, "z_cross": info.z_cross}
    else:
        model = "general"
        r = exact.time
        bounds = {"block": structure.mu1 + structure.mu2 / 2, "half_length": mu / 2, "farthest_point": farthest}
        alpha = crude_alpha(rho) if not math.isinf(rho) else 2.0

    v_lower = max(bounds.values())
    ratio = r / v_lower if v_lower > 0 else 1.0
    if abs(r - exact.time) > TOL * max(1.0, r):
        raise BoundViolation(f"closed-form RCPT payoff {r} != profile maximum {exact.time}")
    if ratio > alpha + TOL:
        raise BoundViolation(f"ratio {ratio} exceeds guarantee {alpha} for {model} model")
    return FindFetchReport(
        model=model,
        rho=rho,
        mu=mu,
        d_max=d_max,
        z=z,
        r_rcpt=r,
        r_rcpt_exact=exact.time,
        v_lower=v_lower,
        lower_bounds=bounds,
        ratio=ratio,
        alpha=alpha,
        details=details,
        witness=exact.witness,
    )
