"""Command-line front end.

Every command writes one JSON or CSV document to stdout.  Floats are printed
with 12 significant digits and JSON keys are sorted, so repeated runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import classic, findfetch, generate, oracle
from .network import NetworkError, Point, load_network, network_to_dict
from .postman import chinese_postman, reverse_tour, visit_profile

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    fmt: str = "json"
    options: dict = field(default_factory=dict)


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _clean(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return fmt_float(obj)
        return float(fmt_float(obj))
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(doc) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rcptsearch", description="Chinese Postman Tour search strategies on networks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="classic game: RCPT worst case and value bounds")
    a.add_argument("files", nargs="+")
    a.add_argument("--format", choices=("json", "csv"), default="json", help="csv: one row per network")

    c = sub.add_parser("cpt", help="print a Chinese Postman Tour")
    c.add_argument("file")
    c.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv prints the tour's visit profile breakpoints")

    e = sub.add_parser("ebd", help="Equal Branch Density distribution of a tree")
    e.add_argument("file")

    pr = sub.add_parser("prune", help="prune a tree at a branch arc, or all the way to a path")
    pr.add_argument("file")
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("--arc")
    g.add_argument("--to-path", action="store_true")

    f = sub.add_parser("findfetch", help="find-and-fetch game report")
    f.add_argument("file")
    f.add_argument("--rho", type=_positive(float), required=True)

    al = sub.add_parser("alpha", help="approximation ratio over a geometric grid of return speeds")
    al.add_argument("--model", choices=("tree", "eulerian"), required=True)
    al.add_argument("--rho-min", type=_positive(float), required=True)
    al.add_argument("--rho-max", type=_positive(float), required=True)
    al.add_argument("--steps", type=_positive(int), required=True, help="grid has steps + 1 points")

    s = sub.add_parser("simulate", help="Monte-Carlo RCPT search time")
    s.add_argument("file")
    s.add_argument("--samples", type=_positive(int), default=100_000)
    s.add_argument("--seed", type=int, default=0)
    h = s.add_mutually_exclusive_group()
    h.add_argument("--point", metavar="ARC:OFFSET", help="hide at a point (or a node id)")
    h.add_argument("--uniform", action="store_true", help="hide uniformly over length (default)")

    sw = sub.add_parser("sandwich", help="bracket the classic game value on a small network")
    sw.add_argument("file")
    sw.add_argument("--budget", type=_positive(float))
    sw.add_argument("--delta", type=_positive(float))
    sw.add_argument("--tolerance", type=_positive(float), default=1e-2, help="fictitious play duality gap")

    gn = sub.add_parser("gen", help="random network")
    gn.add_argument("--kind", choices=("tree", "eulerian", "general"), required=True)
    gn.add_argument("--seed", type=int, required=True)
    return p


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "file", "files")}
    inputs = ns.files if hasattr(ns, "files") else ([ns.file] if hasattr(ns, "file") else [])
    fmt = "csv" if ns.command == "alpha" else opts.get("format", "json")
    if ns.command == "alpha" and ns.rho_min > ns.rho_max:
        raise UsageError("--rho-min must not exceed --rho-max")
    return RunConfig(ns.command, inputs, fmt, opts)


def _parse_point(net, text: str) -> Point:
    if ":" not in text:
        if text not in net.nodes:
            raise UsageError(f"unknown node {text!r}")
        return Point(node=text)
    arc, _, off = text.rpartition(":")
    try:
        offset = float(off)
    except ValueError:
        raise UsageError(f"bad offset in --point {text!r}") from None
    return net.point(arc, offset)


_ANALYZE_COLUMNS = ["file", "class", "mu", "mu_bar", "mu1", "mu2", "t_rcpt", "v_lower", "v_upper", "ratio_bound", "ratio_kind", "exact_value"]


def _run(cfg: RunConfig) -> str:
    o = cfg.options
    cmd = cfg.command
    if cmd == "alpha":
        n = o["steps"]
        lo, hi = o["rho_min"], o["rho_max"]
        span = math.log(hi) - math.log(lo)
        rhos = [math.exp(math.log(lo) + span * k / n) for k in range(n)] + [hi]
        fn = findfetch.alpha_tree if o["model"] == "tree" else findfetch.alpha_eulerian
        return dump_csv(["rho", "alpha"], ((r, fn(r)) for r in rhos))
    if cmd == "gen":
        return dump_json(network_to_dict(generate.random_network(o["kind"], o["seed"])))

    nets = [load_network(path) for path in cfg.inputs]
    net = nets[0]
    if cmd == "analyze":
        reports = [classic.classic_bounds(n).as_dict() for n in nets]
        if cfg.fmt == "csv":
            rows = ([path] + [r[c] if r[c] is not None else "" for c in _ANALYZE_COLUMNS[1:]]
                    for path, r in zip(cfg.inputs, reports))
            return dump_csv(_ANALYZE_COLUMNS, rows)
        return dump_json(reports[0] if len(reports) == 1 else reports)
    if cmd == "cpt":
        tour = chinese_postman(net)
        if cfg.fmt == "csv":
            return dump_csv(["arc", "offset", "time"], visit_profile(tour).rows())
        return dump_json({"start": tour.start, "length": tour.length, "tour": tour.tokens,
                          "reverse": reverse_tour(tour).tokens})
    if cmd == "ebd":
        return dump_json(findfetch.ebd(net).as_dict())
    if cmd == "prune":
        out = findfetch.prune_to_path(net) if o["to_path"] else findfetch.prune(net, o["arc"])
        doc = network_to_dict(out)
        return dump_json(doc)
    if cmd == "findfetch":
        return dump_json(findfetch.findfetch_report(net, o["rho"]).as_dict())
    if cmd == "simulate":
        if o["point"]:
            h = oracle.HiderDistribution.point(_parse_point(net, o["point"]))
        else:
            h = oracle.HiderDistribution.uniform()
        tour = chinese_postman(net)
        res = oracle.simulate_rcpt(net, h, o["samples"], o["seed"], tour=tour)
        exact = oracle.rcpt_expected_time(net, h, tour)
        return dump_json({
            "mean": res.mean,
            "stderr": res.stderr,
            "samples": res.samples,
            "seed": o["seed"],
            "hider": o["point"] or "uniform",
            "analytic": exact,
        })
    if cmd == "sandwich":
        res = oracle.value_sandwich(net, o["budget"], o["delta"], o["tolerance"])
        return dump_json(res.as_dict())
    raise UsageError(f"unknown command {cmd!r}")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        text = _run(cfg)
    except AssertionError as exc:
        print(f"rcptsearch: internal check failed: {exc}", file=stderr)
        return EXIT_INTERNAL
    except (UsageError, NetworkError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rcptsearch: error: {msg}", file=stderr)
        return EXIT_INVALID
    stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
