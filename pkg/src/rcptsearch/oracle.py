"""Independent checks on small instances.

Everything here recomputes search times by walking tours step by step rather
than through :mod:`rcptsearch.postman` visit profiles, so agreement between
the two is meaningful.  Game values are sandwiched between the analytic
lower bound and the exact best response of the Hider against a Searcher
mixture found by fictitious play over enumerated tours.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classic import WorstCase, rcpt_profiles
from .network import TOL, Network, Point, shortest_paths
from .postman import Step, Tour, chinese_postman, reverse_tour
from .structure import decompose

DRAWS_PER_SAMPLE = 4  # one Philox counter block; keeps shards aligned with the serial stream


# --- Hider distributions ----------------------------------------------------------

@dataclass(frozen=True)
class HiderDistribution:
    """Uniform over length (``support is None``) or finitely many weighted points."""

    support: tuple[tuple[Point, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.support is None:
            return
        if not self.support:
            raise ValueError("empty Hider support")
        probs = [p for _, p in self.support]
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise ValueError("Hider probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > 1e-9:
            raise ValueError(f"Hider probabilities sum to {math.fsum(probs)}, not 1")

    @classmethod
    def uniform(cls) -> HiderDistribution:
        return cls(None)

    @classmethod
    def points(cls, weighted: Sequence[tuple[Point, float]]) -> HiderDistribution:
        return cls(tuple((p, float(w)) for p, w in weighted))

    @classmethod
    def point(cls, p: Point) -> HiderDistribution:
        return cls(((p, 1.0),))

    @property
    def is_uniform(self) -> bool:
        return self.support is None


# --- walking tours ------------------------------------------------------------------

def _first_traversal(tour: Tour, arc_id: str) -> tuple[float, bool]:
    for step, entry in zip(tour.steps, tour.times):
        if step.arc == arc_id:
            return entry, step.forward
    raise ValueError(f"tour never traverses arc {arc_id!r}")


def _along(tour: Tour, arc_id: str, x: float) -> float:
    """Time the tour's first pass over ``arc_id`` reaches offset ``x``."""
    entry, forward = _first_traversal(tour, arc_id)
    length = tour.network.arc(arc_id).length
    return entry + (x if forward else length - x)


def first_visit_time(tour: Tour, p: Point) -> float:
    """First time the walk is at ``p``, found by stepping through the walk."""
    net = tour.network
    if p.node is not None:
        if p.node == tour.start:
            return 0.0
        for step, entry in zip(tour.steps, tour.times):
            arc = net.arc(step.arc)
            if (arc.v if step.forward else arc.u) == p.node:
                return entry + arc.length
        raise ValueError(f"tour never reaches node {p.node!r}")
    return _along(tour, p.arc, p.offset)


# --- simulation ---------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationResult:
    mean: float
    stderr: float
    samples: int
    times: np.ndarray = field(repr=False, compare=False)


def _draws(seed: int, start: int, stop: int) -> np.ndarray:
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start)
    return np.random.Generator(bitgen).random((stop - start, DRAWS_PER_SAMPLE))


def _sample_times(tours: tuple[Tour, Tour], h: HiderDistribution, u: np.ndarray) -> np.ndarray:
    net = tours[0].network
    pick_reverse = u[:, 0] >= 0.5
    if h.is_uniform:
        lengths = np.array([a.length for a in net.arcs])
        if lengths.size == 0:
            raise ValueError("uniform Hider needs a network of positive length")
        cum = np.cumsum(lengths)
        which = np.minimum(np.searchsorted(cum, u[:, 1] * cum[-1], side="right"), len(lengths) - 1)
        x = u[:, 2] * lengths[which]
        out = np.empty(len(u))
        for k, arc in enumerate(net.arcs):
            for flag, tour in ((False, tours[0]), (True, tours[1])):
                sel = (which == k) & (pick_reverse == flag)
                entry, forward = _first_traversal(tour, arc.id)
                out[sel] = entry + (x[sel] if forward else arc.length - x[sel])
        return out
    weights = np.array([w for _, w in h.support])
    cum = np.cumsum(weights)
    which = np.minimum(np.searchsorted(cum, u[:, 1] * cum[-1], side="right"), len(weights) - 1)
    table = np.array([[first_visit_time(t, p) for t in tours] for p, _ in h.support])
    return table[which, pick_reverse.astype(int)]


def simulate_rcpt(
    net: Network,
    h: HiderDistribution,
    samples: int,
    seed: int,
    shards: int = 1,
    workers: int | None = None,
    tour: Tour | None = None,
) -> SimulationResult:
    """Monte-Carlo estimate of the RCPT's expected search time against ``h``.

    Sample ``i`` always consumes counter block ``i`` of a Philox stream keyed
    by ``seed``, so any sharding reproduces the serial run exactly.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if shards < 1:
        raise ValueError("need at least one shard")
    tour = chinese_postman(net) if tour is None else tour
    tours = (tour, reverse_tour(tour))
    bounds = np.linspace(0, samples, shards + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]

    def run(job: tuple[int, int]) -> np.ndarray:
        return _sample_times(tours, h, _draws(seed, *job))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    times = np.concatenate(parts)
    mean = float(times.mean())
    stderr = float(times.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return SimulationResult(mean, stderr, samples, times)


def rcpt_expected_time(net: Network, h: HiderDistribution, tour: Tour | None = None) -> float:
    """Exact expected RCPT search time against ``h`` from the averaged visit profiles."""
    tour = chinese_postman(net) if tour is None else tour
    profiles = rcpt_profiles(tour)
    if not h.is_uniform:
        return math.fsum(w * math.fsum(q * prof.time(p) for prof, q in profiles) for p, w in h.support)
    mu = net.total_length
    if mu <= 0:
        raise ValueError("uniform Hider needs a network of positive length")
    total = 0.0
    for arc in net.arcs:
        for prof, q in profiles:
            pts = prof.arcs[arc.id].breakpoints()
            # piecewise linear: trapezoids between breakpoints are exact
            total += q * math.fsum((x1 - x0) * (t0 + t1) / 2 for (x0, t0), (x1, t1) in zip(pts, pts[1:]))
    return total / mu


# --- brute-force tours -------------------------------------------------------------

def brute_force_cpt_length(net: Network) -> float:
    """Shortest closed covering walk by Dijkstra over (node, covered arcs) states."""
    index = {a.id: i for i, a in enumerate(net.arcs)}
    full = (1 << len(net.arcs)) - 1
    start = (net.root, 0)
    best = {start: 0.0}
    heap = [(0.0, net.root, 0)]
    while heap:
        d, node, mask = heapq.heappop(heap)
        if d > best[(node, mask)]:
            continue
        if node == net.root and mask == full:
            return d
        for arc in net.incident(node):
            nxt = (arc.other(node), mask | (1 << index[arc.id]))
            nd = d + arc.length
            if nd < best.get(nxt, math.inf) - 1e-15:
                best[nxt] = nd
                heapq.heappush(heap, (nd, *nxt))
    raise ValueError("no covering walk")


def enumerate_tours(net: Network, length_budget: float, limit: int = 200_000) -> list[Tour]:
    """All closed covering walks from the root with length at most ``length_budget``.

    Walks that differ only by where they pass through the root are kept as
    distinct tours, as are reversals.  Raises if more than ``limit`` walks
    would be produced.
    """
    if len(net.arcs) > 12:
        raise ValueError("tour enumeration is limited to small networks")
    dist_root = shortest_paths(net, net.root)[0]
    index = {a.id: i for i, a in enumerate(net.arcs)}
    full = (1 << len(net.arcs)) - 1
    lengths = [a.length for a in net.arcs]
    budget = length_budget + TOL
    out: list[Tour] = []
    steps: list[Step] = []

    def uncovered(mask: int) -> float:
        return math.fsum(lengths[i] for i in range(len(lengths)) if not mask >> i & 1)

    def walk(node: str, mask: int, used: float) -> None:
        if node == net.root and mask == full and steps:
            out.append(Tour(net, net.root, tuple(steps)))
            if len(out) > limit:
                raise ValueError(f"more than {limit} tours within budget {length_budget}")
        for arc in sorted(net.incident(node), key=lambda a: a.id):
            nxt = arc.other(node)
            m = mask | (1 << index[arc.id])
            total = used + arc.length
            if total + max(uncovered(m), dist_root[nxt]) > budget:
                continue
            steps.append(Step(arc.id, arc.u == node))
            walk(nxt, m, total)
            steps.pop()

    if not net.arcs:
        return [Tour(net, net.root, ())]
    walk(net.root, 0, 0.0)
    return out


# --- Hider best response -------------------------------------------------------------

def hider_best_response(net: Network, mixed: Sequence[tuple[Tour, float]]) -> WorstCase:
    """Exact supremum over the continuum of the mixture's expected search time.

    Each tour reaches the points of an arc during its first pass over that
    arc, so along an arc the expected time is linear and its supremum is one
    of the two endpoint limits; nodes are checked on their own.
    """
    if not mixed:
        raise ValueError("empty mixture")
    if abs(math.fsum(w for _, w in mixed) - 1.0) > 1e-9 or any(w < 0 for _, w in mixed):
        raise ValueError("mixture weights must form a distribution")
    for t, _ in mixed:
        if not t.covers():
            raise ValueError(f"tour {t} does not cover every arc")
    best = WorstCase(-math.inf, Point(node=net.root))

    def value(p: Point) -> float:
        return math.fsum(w * first_visit_time(t, p) for t, w in mixed)

    for n in net.nodes:
        v = value(Point(node=n))
        if v > best.time + TOL:
            best = WorstCase(v, Point(node=n), True)
    for arc in net.arcs:
        ends = [math.fsum(w * _along(t, arc.id, x) for t, w in mixed) for x in (0.0, arc.length)]
        if max(ends) <= best.time + TOL:
            continue
        if abs(ends[0] - ends[1]) <= TOL:
            # constant along the arc: attained at every interior point
            best = WorstCase(max(ends), Point(arc=arc.id, offset=arc.length / 2), True)
            continue
        k = 0 if ends[0] > ends[1] else 1
        end = (arc.u, arc.v)[k]
        if value(Point(node=end)) >= ends[k] - TOL:
            best = WorstCase(ends[k], Point(node=end), True)
        else:
            best = WorstCase(ends[k], Point(arc=arc.id, offset=(0.0, arc.length)[k]), False)
    return best


# --- matrix games ---------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixGame:
    """Zero-sum game; rows minimize (Searcher), columns maximize (Hider)."""

    payoff: np.ndarray
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    row_strategy: np.ndarray | None = None
    col_strategy: np.ndarray | None = None
    iterations: int = 0
    converged: bool = False

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def solve_matrix(game: MatrixGame | np.ndarray, tolerance: float = 1e-3, max_iter: int = 1_000_000) -> MatrixGame:
    """Fictitious play with a certified duality gap.

    Each round both players best-respond to the other's empirical mixture.
    ``max_j (xA)_j`` over the row mixtures seen is an upper bound on the
    value and ``min_i (Ay)_i`` a lower bound; the strategies returned are the
    ones that achieved the best bounds.  ``converged`` is False when
    ``max_iter`` ran out first, with the bracket still valid.
    """
    A = np.asarray(game.payoff if isinstance(game, MatrixGame) else game, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("payoff must be a nonempty 2-d matrix")
    AT = np.ascontiguousarray(A.T)
    m, n = A.shape
    row_sum = np.zeros(n)  # sum of A[i_t, :]
    col_sum = np.zeros(m)  # sum of A[:, j_t]
    rows: list[int] = []
    cols: list[int] = []
    i, j = 0, int(np.argmax(A[0]))
    upper, lower = math.inf, -math.inf
    best_row_t = best_col_t = 0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        rows.append(i)
        cols.append(j)
        row_sum += A[i]
        col_sum += AT[j]
        j = int(row_sum.argmax())
        i = int(col_sum.argmin())
        hi = row_sum[j] / it
        lo = col_sum[i] / it
        if hi < upper:
            upper, best_row_t = hi, it
        if lo > lower:
            lower, best_col_t = lo, it
        if upper - lower <= tolerance:
            converged = True
            break
    best_x = np.bincount(rows[:best_row_t], minlength=m) / best_row_t
    best_y = np.bincount(cols[:best_col_t], minlength=n) / best_col_t
    return MatrixGame(
        payoff=A,
        value=(upper + lower) / 2,
        lower=lower,
        upper=upper,
        row_strategy=best_x,
        col_strategy=best_y,
        iterations=it,
        converged=converged,
    )


def hider_grid(net: Network, delta: float | None = None) -> list[Point]:
    """Nodes plus interior points of every arc at spacing close to ``delta``."""
    if delta is None:
        delta = 0.05 * net.total_length / max(len(net.arcs), 1)
    if delta <= 0:
        raise ValueError("grid spacing must be positive")
    pts = [Point(node=n) for n in net.nodes]
    for arc in net.arcs:
        k = max(int(math.ceil(arc.length / delta - 1e-9)), 1)
        pts.extend(Point(arc=arc.id, offset=arc.length * i / k) for i in range(1, k))
    return pts


def search_game_matrix(tours: Sequence[Tour], points: Sequence[Point]) -> np.ndarray:
    return np.array([[first_visit_time(t, p) for p in points] for t in tours])


@dataclass(frozen=True)
class Sandwich:
    lower: float
    upper: float
    grid_value: float
    tours: int
    hider_points: int
    converged: bool
    witness: Point

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "grid_value": self.grid_value,
            "tours": self.tours,
            "hider_points": self.hider_points,
            "converged": self.converged,
            "witness": str(self.witness),
        }


def value_sandwich(
    net: Network,
    budget: float | None = None,
    delta: float | None = None,
    tolerance: float = 1e-2,
    max_iter: int = 1_000_000,
) -> Sandwich:
    """Bracket the value of Gal's game on a small network.

    The lower end is the block bound; the upper end is the Hider's exact
    best response to the grid game's Searcher mixture, or to the RCPT when
    that is better.  Tours may turn back only at nodes, so the upper end
    can be loose where optimal play needs mid-arc turns.
    """
    report = decompose(net)
    lower = max(net.total_length / 2, report.mu1 + report.mu2 / 2)
    cpt = chinese_postman(net)
    if budget is None:
        budget = cpt.length
    if budget < cpt.length - TOL:
        raise ValueError(f"budget {budget} is below the postman tour length {cpt.length}")
    tours = enumerate_tours(net, budget)
    if not net.arcs:
        return Sandwich(0.0, 0.0, 0.0, len(tours), 1, True, Point(node=net.root))
    points = hider_grid(net, delta)
    solved = solve_matrix(search_game_matrix(tours, points), tolerance, max_iter)
    mixture = [(t, float(w)) for t, w in zip(tours, solved.row_strategy) if w > 0]
    total = math.fsum(w for _, w in mixture)
    mixture = [(t, w / total) for t, w in mixture]
    best = hider_best_response(net, mixture)
    rcpt = hider_best_response(net, [(cpt, 0.5), (reverse_tour(cpt), 0.5)])
    if rcpt.time < best.time:
        best = rcpt
    return Sandwich(lower, best.time, float(solved.value), len(tours), len(points), solved.converged, best.witness)
