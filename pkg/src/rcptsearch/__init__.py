"""Random Chinese Postman Tour analysis for search games on networks."""

from .classic import ClassicReport, WorstCase, classic_bounds, rcpt_worst_case
from .findfetch import (
    alpha_eulerian,
    alpha_tree,
    ebd,
    findfetch_report,
    prune,
    prune_to_path,
)
from .network import Network, NetworkError, Point, distances, load_network, parse_network, point_distance
from .postman import Tour, chinese_postman, doubled_tour, reverse_tour, visit_profile
from .structure import classify, contract_blocks, decompose

__all__ = [
    "ClassicReport",
    "Network",
    "NetworkError",
    "Point",
    "Tour",
    "WorstCase",
    "alpha_eulerian",
    "alpha_tree",
    "chinese_postman",
    "classic_bounds",
    "classify",
    "contract_blocks",
    "decompose",
    "distances",
    "doubled_tour",
    "ebd",
    "findfetch_report",
    "load_network",
    "parse_network",
    "point_distance",
    "prune",
    "prune_to_path",
    "rcpt_worst_case",
    "reverse_tour",
    "visit_profile",
]
