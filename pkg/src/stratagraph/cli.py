"""Command-line front end.

One binary, seven subcommands (validate, graph, chains, potential, defend,
risk, simulate). Every subcommand reads a scenario file and writes either a
human table (--format text, the default) or canonical JSON (--format json)
to stdout. JSON output has sorted keys and 6-significant-digit floats, so
identical inputs always produce identical bytes.

Exit codes: 0 success, 1 usage/flag error, 2 invalid scenario, 3 infeasible
defense plan, 4 internal error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import canon
from .chains import (
    ChainObjective,
    chain_from_edges,
    enumerate_chains,
    generate_potential_chains,
    search_chain,
)
from .config import DEFAULT_CONFIG, load_config
from .defense import plan_budgeted, plan_coverage, plan_cut, risk_assess
from .game import GameConfig, run_batch, summarize
from .graphs import build_attack_graph, build_base_graph, graphs_to_dict, graphs_to_dot
from .model import (
    ConfigError,
    EmptyEntryGrantsError,
    InfeasibleCutError,
    InvalidScenarioError,
    ParseError,
    ScenarioError,
    UnknownIdError,
)
from .scenario import SCHEMA_VERSION, load_scenario, validate_scenario

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fmt(x) -> str:
    if isinstance(x, float):
        return canon.format_float(x)
    if x is None:
        return "-"
    return str(x)


def _table(headers, rows) -> str:
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        sys.stdout.write(canon.dumps(payload) + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load(args):
    doc = load_scenario(args.scenario)
    config = load_config(args.config) if args.config else DEFAULT_CONFIG
    overrides = {}
    if getattr(args, "semantics", None):
        overrides["semantics"] = args.semantics
    if getattr(args, "max_len", None):
        overrides["max_len"] = args.max_len
    if overrides:
        config = replace(config, **overrides).check()
    return doc, config


def _graphs(doc):
    base = build_base_graph(doc)
    return base, build_attack_graph(doc, base)


def _chain_rows(chains):
    return [["->".join(c.edges), c.total_cost, c.total_threat] for c in chains]


# --- subcommands ---------------------------------------------------------

def cmd_validate(args) -> int:
    doc = load_scenario(args.scenario)
    report = validate_scenario(doc)
    errors = [v for v in report if v.severity == "error"]
    payload = {"valid": not errors, "violations": [v.as_dict() for v in report]}
    if not report:
        text = "valid"
    else:
        head = "valid" if not errors else "invalid"
        lines = [f"{head} ({len(errors)} errors, {len(report) - len(errors)} warnings)"]
        lines += [f"  {v.severity.upper()} {v.record_class} {v.record_id}: {v.message}" for v in report]
        text = "\n".join(lines)
    _emit(args, payload, text)
    return EXIT_OK if not errors else EXIT_INVALID


def cmd_graph(args) -> int:
    doc, _ = _load(args)
    base, graph = _graphs(doc)
    if args.dot:
        sys.stdout.write(graphs_to_dot(doc, base, graph))
        return EXIT_OK
    payload = graphs_to_dict(doc, base, graph)
    text = "\n".join(
        [
            f"objects: {len(doc.objects)}",
            f"intra edges: {len(base.intra_edges)}",
            f"vertical edges: {len(base.vertical_edges)}",
            f"attack edges: {len(graph.edges)}",
            "",
            _table(
                ["edge", "from", "to", "permission", "cost", "severity"],
                [[e.edge_id, e.from_id, e.to_id, e.permission, e.cost, e.severity] for e in graph.edges],
            ),
        ]
    )
    _emit(args, payload, text)
    return EXIT_OK


def cmd_chains(args) -> int:
    doc, config = _load(args)
    _, graph = _graphs(doc)
    target = args.target
    if args.objective == "enumerate":
        if args.unrestricted:
            found = enumerate_chains(doc, graph, config=config)
        elif target:
            found = enumerate_chains(doc, graph, target=target, config=config)
        else:
            found = enumerate_chains(doc, graph, targets=doc.targets or None, config=config)
    else:
        objective = ChainObjective(kind=args.objective, max_len=config.max_len, target=target)
        best = search_chain(doc, graph, objective, config=config)
        found = (best,) if best else ()
    payload = {"count": len(found), "chains": [c.as_dict() for c in found]}
    text = _table(["edges", "cost", "threat"], _chain_rows(found)) if found else "no chains"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_potential(args) -> int:
    doc, config = _load(args)
    base, graph = _graphs(doc)
    found = generate_potential_chains(doc, base, graph, args.from_id, args.to_id, config=config)
    payload = {"count": len(found), "potential_chains": [p.as_dict() for p in found]}
    rows = []
    for p in found:
        gaps = "; ".join(f"{f}->{t}" for f, t in p.missing_hops)
        sugg = "; ".join(",".join(s) if s else "-" for s in p.suggestions)
        rows.append(["->".join(p.path), gaps, sugg])
    text = _table(["path", "missing hops", "suggestions"], rows) if found else "no potential chains"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_defend(args) -> int:
    doc, config = _load(args)
    _, graph = _graphs(doc)
    if args.mode == "coverage":
        if args.chain:
            chain = chain_from_edges(doc, graph, tuple(args.chain.split(",")), config=config)
        else:
            chain = search_chain(doc, graph, ChainObjective("min_cost", max_len=config.max_len), config=config)
            if chain is None:
                raise ValueError("no valid chain reaches the targets; pass --chain to cover an explicit chain")
        plan = plan_coverage(doc, graph, chain, config=config)
    elif args.mode == "budget":
        if args.budget is None:
            raise ConfigError("--mode budget requires --budget")
        chains = enumerate_chains(doc, graph, targets=doc.targets or None, config=config)
        plan = plan_budgeted(doc, graph, chains, args.budget, config=config)
    else:
        plan = plan_cut(doc, graph, config=config)
    payload = plan.as_dict()
    lines = [
        f"chosen: {', '.join(plan.chosen) if plan.chosen else '(none)'}",
        f"total cost: {canon.format_float(plan.total_cost)}",
        f"neutralized edges: {len(plan.neutralized_edges)}",
        f"surviving chains: {plan.surviving_count}",
        f"optimal: {'yes' if plan.optimal else 'no'}",
    ]
    if plan.uncovered_attacks:
        lines.append(f"uncovered attacks: {', '.join(plan.uncovered_attacks)}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_risk(args) -> int:
    doc, config = _load(args)
    _, graph = _graphs(doc)
    rows = risk_assess(doc, graph, config=config)
    payload = {"rows": [r.as_dict() for r in rows]}
    text = _table(
        ["object", "chains", "max threat", "min cost"],
        [[r.object, r.chain_count, r.max_chain_threat, r.min_chain_cost] for r in rows],
    )
    _emit(args, payload, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc, config = _load(args)
    _, graph = _graphs(doc)
    game = GameConfig(
        max_turns=args.max_turns,
        attacker_policy=args.attacker,
        defender_policy=args.defender,
        defender_budget_per_turn=args.budget_per_turn,
        rng_seed=args.seed,
        semantics=args.semantics or config.semantics,
        compromise_permissions=tuple(args.compromise_permission) if args.compromise_permission else None,
    )
    traces = run_batch(doc, graph, game, args.runs, config=config)
    summary = summarize(traces)
    payload = {
        "config": game.as_dict(),
        "summary": summary.as_dict(),
        "traces": [t.as_dict() for t in traces],
    }
    rows = [
        [game.rng_seed + i, t.outcome, t.turns_elapsed, t.attacker_cost, t.defender_cost]
        for i, t in enumerate(traces)
    ]
    text = "\n".join(
        [
            _table(["seed", "outcome", "turns", "attacker cost", "defender cost"], rows),
            "",
            "outcomes: " + ", ".join(f"{k}={v}" for k, v in sorted(summary.outcomes.items())),
            f"mean turns: {canon.format_float(summary.mean_turns)}",
            f"mean attacker cost: {canon.format_float(summary.mean_attacker_cost)}",
            f"mean defender cost: {canon.format_float(summary.mean_defender_cost)}",
        ]
    )
    _emit(args, payload, text)
    return EXIT_OK


# --- wiring ---------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="stratagraph", description="Layered attack-graph modeling and defense planning.")
    parser.add_argument(
        "--version", action="version", version=f"stratagraph {__version__} (scenario schema {SCHEMA_VERSION})"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p):
        p.add_argument("--scenario", required=True, help="path to the scenario JSON file")
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--config", default=None, help="engine config JSON (file values override defaults)")

    p = sub.add_parser("validate", help="check a scenario against the schema invariants")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="export the layered base graph and attack graph")
    common(p)
    p.add_argument("--dot", action="store_true", help="emit DOT text instead of json/text")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("chains", help="enumerate or search valid attack chains")
    common(p)
    p.add_argument("--target", default=None, help="goal object (default: scenario targets)")
    p.add_argument("--unrestricted", action="store_true", help="list chains to any object, not only targets")
    p.add_argument("--objective", choices=("enumerate", "min_cost", "max_threat"), default="enumerate")
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--semantics", choices=("accumulated", "strict"), default=None)
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("potential", help="find base-graph paths the attack catalog cannot cover yet")
    common(p)
    p.add_argument("--from", dest="from_id", required=True, help="path start object")
    p.add_argument("--to", dest="to_id", required=True, help="path end object")
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("defend", help="plan defenses (coverage | budget | cut)")
    common(p)
    p.add_argument("--mode", choices=("coverage", "budget", "cut"), default="cut")
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--chain", default=None, help="comma-separated edge ids (coverage mode)")
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--semantics", choices=("accumulated", "strict"), default=None)
    p.set_defaults(func=cmd_defend)

    p = sub.add_parser("risk", help="per-object risk table from chain exposure")
    common(p)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--semantics", choices=("accumulated", "strict"), default=None)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("simulate", help="run the turn-based attacker/defender game")
    common(p)
    p.add_argument("--max-turns", dest="max_turns", type=int, default=12)
    p.add_argument("--attacker", choices=("greedy_cheapest", "max_threat", "random"), default="greedy_cheapest")
    p.add_argument("--defender", choices=("none", "reactive_cut"), default="none")
    p.add_argument("--budget-per-turn", dest="budget_per_turn", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--semantics", choices=("accumulated", "strict"), default=None)
    p.add_argument(
        "--compromise-permission",
        action="append",
        default=None,
        help="restrict the win condition to these permissions (repeatable)",
    )
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, InvalidScenarioError, EmptyEntryGrantsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleCutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, UnknownIdError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
