"""Command-line front end.

Exit codes: 0 ok, 2 input or validation error, 3 no explanation,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

from . import oracle
from .errors import AgendaExhausted, GibError
from .model import Network, load_network
from .search import Explanation, gib_map_search
from .semantics import DEFAULT_EPS, TABLE_CAP

EXIT_OK, EXIT_INPUT, EXIT_NONE, EXIT_MISMATCH = 0, 2, 3, 4


@dataclass
class QueryConfig:
    network_path: str
    evidence: dict = field(default_factory=dict)
    delta: float = 0.0
    eps: float = DEFAULT_EPS
    k: int = 1
    output_format: str = "text"
    refine_target: bool = True
    max_table: int = TABLE_CAP
    max_candidates: int = oracle.CANDIDATE_CAP

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("--delta must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("-k must be at least 1")
        if self.eps < 0:
            raise ValueError("--eps must be non-negative")


class InputError(Exception):
    pass


def fmt_p(p: float) -> str:
    return f"{p:.12g}"


def _parse_evidence(pairs: list[str] | None, path: str | None) -> dict:
    ev: dict = {}
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read evidence file {path}: {e}") from None
        if not isinstance(loaded, dict) or not all(isinstance(x, str) for x in loaded.values()):
            raise InputError("evidence file must be a JSON object mapping names to values")
        ev.update(loaded)
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep or not name or not value:
            raise InputError(f"evidence must look like name=value, got {pair!r}")
        if name in ev and ev[name] != value:
            raise InputError(f"conflicting evidence for {name}: {ev[name]!r} vs {value!r}")
        ev[name] = value
    return ev


def render_explanations(net: Network, exps: list[Explanation], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"explanations": [e.to_dict(net) for e in exps]}, indent=2)
    blocks = []
    for e in exps:
        lines = [f"p={fmt_p(e.probability)}"]
        if e.bounds is not None:
            lines.append(f"p_bounds=[{fmt_p(e.bounds.lo)},{fmt_p(e.bounds.hi)}] (experimental)")
        lines.extend(e.lines(net))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _config(args) -> QueryConfig:
    return QueryConfig(
        network_path=args.network,
        evidence=_parse_evidence(args.evidence, args.evidence_file),
        delta=getattr(args, "delta", 0.0),
        eps=args.eps,
        k=getattr(args, "k", 1),
        output_format=args.format,
        refine_target=not getattr(args, "pin_target", False),
        max_table=args.max_table,
        max_candidates=getattr(args, "max_candidates", oracle.CANDIDATE_CAP),
    )


def _warn(net: Network) -> None:
    for w in net.warnings:
        print(f"warning: {w}", file=sys.stderr)


def cmd_validate(args) -> int:
    net = load_network(args.network)
    print("index: " + " ".join(net.variables[v].name for v in net.order))
    for w in net.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def cmd_explain(args) -> int:
    cfg = _config(args)
    net = load_network(cfg.network_path)
    _warn(net)
    trace: list | None = [] if args.trace else None
    try:
        exps = gib_map_search(net, cfg.evidence, cfg.delta, cfg.k, eps=cfg.eps,
                              refine_target=cfg.refine_target, trace=trace)
    except AgendaExhausted as e:
        print(f"no explanation: {e}", file=sys.stderr)
        return EXIT_NONE
    finally:
        if trace:
            for ev in trace:
                extra = f" node={ev['node']}" if "node" in ev else ""
                print(f"trace: {ev['event']}{extra} score={fmt_p(ev['score'])} "
                      f"[{ev['assignment'].replace(chr(10), ', ')}]", file=sys.stderr)
    print(render_explanations(net, exps, cfg.output_format))
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _config(args)
    net = load_network(cfg.network_path)
    _warn(net)
    try:
        truth = oracle.gib_map_bruteforce(net, cfg.evidence, cfg.max_candidates, cfg.max_table)
    except AgendaExhausted as e:
        print(f"no explanation: {e}", file=sys.stderr)
        return EXIT_NONE
    print(render_explanations(net, [truth], cfg.output_format))
    if args.diff:
        found = gib_map_search(net, cfg.evidence, eps=cfg.eps, refine_target=cfg.refine_target)[0]
        if found.assignment != truth.assignment or abs(found.probability - truth.probability) > 1e-12:
            print("mismatch: search returned", file=sys.stderr)
            print(render_explanations(net, [found], "text"), file=sys.stderr)
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_check(args) -> int:
    spec = oracle.RandomNetSpec(
        node_count=args.nodes,
        max_parents=args.max_parents,
        domain_sizes=(args.domain_min, args.domain_max),
        concept_density=args.concept_density,
        independence_plant_rate=args.plant_rate,
        seed=args.seed,
    )
    report = oracle.check_theorems(spec, args.trials)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(report.render_text())
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _query_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True, help="network file, or a bundled name: chain, dep, vee, tracks")
    p.add_argument("--evidence", action="append", metavar="NAME=VALUE", help="observed value (repeatable)")
    p.add_argument("--evidence-file", help="JSON object mapping variable names to observed values")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="relative tolerance for min == max")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--pin-target", action="store_true",
                   help="never narrow a node's own value set when expanding it")
    p.add_argument("--max-table", type=int, default=TABLE_CAP, help="joint-table size cap for enumeration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file and print its node index")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("explain", help="best-first GIB-MAP search")
    _query_flags(p)
    p.add_argument("--delta", type=float, default=0.0, help="approximate-independence slack in [0, 1]")
    p.add_argument("-k", type=int, default=1, help="number of explanations")
    p.add_argument("--trace", action="store_true", help="log agenda pops and expansions to stderr")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("oracle", help="brute-force GIB-MAP by enumeration")
    _query_flags(p)
    p.add_argument("--max-candidates", type=int, default=oracle.CANDIDATE_CAP)
    p.add_argument("--diff", action="store_true", help="also run the search; exit 4 if they differ")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="randomized checks of the locality theorems and search optimality")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--nodes", type=int, default=5)
    p.add_argument("--max-parents", type=int, default=2)
    p.add_argument("--domain-min", type=int, default=2)
    p.add_argument("--domain-max", type=int, default=3)
    p.add_argument("--concept-density", type=float, default=0.5)
    p.add_argument("--plant-rate", type=float, default=0.7)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="warning: %(message)s", level=logging.WARNING)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GibError, InputError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
