"""Gal's search game: exact worst case of the Random Chinese Postman Tour and value bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .network import TOL, DistanceOracle, Network, Point, distances
from .postman import Tour, VisitProfile, chinese_postman, reverse_tour, visit_profile
from .structure import classify, decompose

FOUR_THIRDS = 4.0 / 3.0


class BoundViolation(AssertionError):
    """A proven inequality failed numerically; indicates a bug, not bad input."""


class WorstCase(NamedTuple):
    time: float
    witness: Point
    # False when the supremum is only approached along the arc towards an
    # endpoint whose own (node) time is smaller
    attained: bool = True


def worst_point(
    profiles: Sequence[tuple[VisitProfile, float]],
    oracle: DistanceOracle | None = None,
    fetch_weight: float = 0.0,
) -> WorstCase:
    """Supremum over all points of ``sum(w * T(H)) + fetch_weight * d(H)``.

    Each term is concave along the interior of an arc (a minimum of two
    lines), so per arc the maximum sits at an endpoint limit or at one of the
    line crossings.  Nodes are evaluated separately because their own times
    can be strictly below the interior limit.
    """
    if not profiles:
        raise ValueError("empty mixture")
    net = profiles[0][0].tour.network
    if fetch_weight and oracle is None:
        oracle = distances(net)
    d = oracle.node_dist[net.root] if oracle is not None else None

    def node_value(n: str) -> float:
        v = math.fsum(w * p.node_times[n] for p, w in profiles)
        return v + fetch_weight * d[n] if fetch_weight else v

    best = WorstCase(-math.inf, Point(node=net.root))

    def consider(cand: WorstCase) -> None:
        nonlocal best
        # ties go to points where the value is actually attained
        if cand.time > best.time + TOL or (
            cand.attained and not best.attained and cand.time > best.time - TOL
        ):
            best = cand

    for n in net.nodes:
        consider(WorstCase(node_value(n), Point(node=n), True))

    for arc in net.arcs:
        cands = {0.0, arc.length / 2, arc.length}
        for p, _ in profiles:
            cands.add(p.arcs[arc.id].peak_offset)
        if fetch_weight:
            cands.add(min(max((d[arc.v] + arc.length - d[arc.u]) / 2, 0.0), arc.length))
        for x in sorted(cands):
            v = math.fsum(w * p.arcs[arc.id].interior(x) for p, w in profiles)
            if fetch_weight:
                v += fetch_weight * min(d[arc.u] + x, d[arc.v] + arc.length - x)
            if TOL < x < arc.length - TOL:
                consider(WorstCase(v, Point(arc=arc.id, offset=x), True))
            else:
                # limit along the arc towards an endpoint; reported on the arc when
                # the endpoint's own value is smaller
                end = arc.u if x <= TOL else arc.v
                if node_value(end) >= v - TOL:
                    consider(WorstCase(v, Point(node=end), True))
                else:
                    consider(WorstCase(v, Point(arc=arc.id, offset=x), False))
    return best


def rcpt_profiles(t: Tour) -> list[tuple[VisitProfile, float]]:
    return [(visit_profile(t), 0.5), (visit_profile(reverse_tour(t)), 0.5)]


def rcpt_worst_case(t: Tour) -> WorstCase:
    """Largest expected search time of the tour-or-reverse coin flip over all points."""
    return worst_point(rcpt_profiles(t))


@dataclass(frozen=True)
class ClassicReport:
    network_class: str
    mu: float
    mu_bar: float
    mu1: float
    mu2: float
    t_rcpt: float
    witness: Point
    witness_attained: bool
    half_mu: float
    block_bound: float
    v_lower: float
    v_upper: float
    ratio_bound: float
    exact_value: float | None
    tour: Tour

    @property
    def ratio_label(self) -> str:
        return "ratio" if self.exact_value is not None else "bound"

    def as_dict(self) -> dict:
        return {
            "class": self.network_class,
            "mu": self.mu,
            "mu_bar": self.mu_bar,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "t_rcpt": self.t_rcpt,
            "witness": str(self.witness),
            "witness_attained": self.witness_attained,
            "half_mu": self.half_mu,
            "block_bound": self.block_bound,
            "v_lower": self.v_lower,
            "v_upper": self.v_upper,
            "ratio_bound": self.ratio_bound,
            "ratio_kind": self.ratio_label,
            "exact_value": self.exact_value,
            "tour": self.tour.tokens,
        }


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise BoundViolation(message)


def classic_bounds(net: Network) -> ClassicReport:
    report = decompose(net)
    mu = net.total_length
    tour = chinese_postman(net)
    mu_bar = tour.length
    worst = rcpt_worst_case(tour)
    block_bound = report.mu1 + report.mu2 / 2
    v_lower = max(mu / 2, block_bound)
    v_upper = mu_bar / 2
    ratio = worst.time / v_lower if v_lower > 0 else 1.0
    exact = v_upper if report.is_weakly_eulerian else None

    _check(mu / 2 <= v_lower + TOL and v_lower <= v_upper + TOL and v_upper <= mu + TOL,
           f"value chain broken: {mu / 2} <= {v_lower} <= {v_upper} <= {mu}")
    _check(worst.time <= v_upper + TOL, f"RCPT time {worst.time} exceeds half tour length {v_upper}")
    _check(mu_bar <= 2 * report.mu1 + FOUR_THIRDS * report.mu2 + TOL,
           f"tour length {mu_bar} exceeds 2*mu1 + 4/3*mu2")
    if report.two_arc_connected:
        _check(mu_bar <= FOUR_THIRDS * mu + TOL, f"bridgeless tour length {mu_bar} exceeds 4/3*mu")
    _check(ratio <= FOUR_THIRDS + TOL, f"ratio bound {ratio} exceeds 4/3")
    if exact is not None:
        _check(abs(exact - v_lower) <= TOL, f"weakly Eulerian value {exact} != {v_lower}")

    return ClassicReport(
        network_class=classify(report),
        mu=mu,
        mu_bar=mu_bar,
        mu1=report.mu1,
        mu2=report.mu2,
        t_rcpt=worst.time,
        witness=worst.witness,
        witness_attained=worst.attained,
        half_mu=mu / 2,
        block_bound=block_bound,
        v_lower=v_lower,
        v_upper=v_upper,
        ratio_bound=ratio,
        exact_value=exact,
        tour=tour,
    )
