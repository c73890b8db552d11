"""Command-line interface.

Subcommands: eval, explain, generate, oracle, inverse, counterfactual,
experiment. Machine-readable output (JSON or CSV) goes to stdout; human
summaries go to stderr. Exit codes: 0 success, 1 no explanation/solution
found, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import QbagError
from .explanation import (
    ExplanationQuery,
    change_from_json,
    ordering_from_json,
    ordering_from_spec,
)
from .generators import GenSpec, generate_batch, structure
from .graph import parse_qbag, serialize_qbag
from .metrics import ExperimentConfig, run_experiment
from .oracle import GridSpec, brute_force_search, certify_epsilon
from .reductions import (
    CounterfactualProblem,
    make_inverse_problem,
    solve_counterfactual,
    solve_inverse,
)
from .search import SearchConfig, heuristic_search, search_config_from_json
from .semantics import builtin_semantics, final_strengths, semantics_from_config

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_USAGE = 2


def _load_semantics(token: str):
    if token.strip().startswith("{"):
        return semantics_from_config(json.loads(token))
    return builtin_semantics(token)


def _load_graph(path: str):
    return parse_qbag(Path(path).read_bytes())


def _load_ordering(value: str):
    path = Path(value)
    if value.endswith(".json") or path.is_file():
        return ordering_from_json(path.read_bytes())
    return ordering_from_spec(value)


def _load_search_config(value: str | None) -> SearchConfig:
    if value is None:
        return SearchConfig()
    path = Path(value)
    data = path.read_text() if path.is_file() else value
    return search_config_from_json(data)


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def _cmd_eval(args) -> int:
    g = _load_graph(args.graph)
    spec = _load_semantics(args.semantics)
    sigma = final_strengths(g, spec)
    if args.format == "csv":
        sys.stdout.write("argument,strength\n")
        for a in g.arguments:
            value = sigma[a]
            sys.stdout.write(f"{a},{'' if value is None else repr(value)}\n")
    else:
        _emit({"strengths": sigma})
    return EXIT_OK


def _cmd_explain(args) -> int:
    g = _load_graph(args.graph)
    spec = _load_semantics(args.semantics)
    ordering = _load_ordering(args.ordering)
    mutable = frozenset(x.strip() for x in args.mutable.split(",") if x.strip())
    cfg = _load_search_config(args.search_config)
    query = ExplanationQuery(g, spec, mutable, ordering)
    outcome = heuristic_search(query, cfg)
    sys.stdout.write(outcome.to_json() + "\n")
    if args.trajectory and outcome.trajectory is not None:
        with open(args.trajectory, "w") as handle:
            handle.write("iteration,cost\n")
            for i, c in enumerate(outcome.trajectory, start=1):
                handle.write(f"{i},{c!r}\n")
    if outcome.found:
        print(f"explanation found after {outcome.iterations_used} iterations", file=sys.stderr)
        return EXIT_OK
    print(f"no explanation found within {outcome.iterations_used} iterations", file=sys.stderr)
    return EXIT_NOT_FOUND


def _cmd_generate(args) -> int:
    sizes = structure(int(s) for s in args.structure.split(","))
    spec = GenSpec(sizes, args.family, args.seed, target=args.target,
                   semantics=builtin_semantics(args.semantics))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, instance in enumerate(generate_batch(spec, args.count)):
        graph_path = out / f"graph_{i:03d}.json"
        sidecar_path = out / f"graph_{i:03d}.sidecar.json"
        graph_path.write_bytes(serialize_qbag(instance.graph))
        sidecar_path.write_text(instance.sidecar_json())
        paths.append(str(graph_path))
    _emit({"graphs": paths})
    print(f"wrote {len(paths)} instance(s) to {out}", file=sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    g = _load_graph(args.graph)
    spec = _load_semantics(args.semantics)
    ordering = _load_ordering(args.ordering)
    mutable = frozenset(x.strip() for x in args.mutable.split(",") if x.strip())
    grid = GridSpec(step=args.grid_step, lower=args.lower, upper=args.upper, max_mutable=args.max_mutable)
    query = ExplanationQuery(g, spec, mutable, ordering)
    if args.certify is not None:
        change = change_from_json(Path(args.certify).read_bytes())
        verdict = certify_epsilon(query, change, args.epsilon, grid, args.mode)
        _emit({"verdict": verdict, "epsilon": args.epsilon})
        return EXIT_OK
    result = brute_force_search(query, grid, args.mode)
    _emit(
        {
            "best": dict(result.best.sorted_items()) if result.best is not None else None,
            "best_norm": result.best_norm if result.best is not None else None,
            "exhaustive": result.exhaustive,
        }
    )
    return EXIT_OK if result.best is not None else EXIT_NOT_FOUND


def _cmd_inverse(args) -> int:
    doc = json.loads(Path(args.problem).read_bytes())
    problem = make_inverse_problem(
        doc["arguments"], doc.get("attacks", []), doc.get("supports", []), doc["ordering"]["tiers"]
    )
    spec = _load_semantics(args.semantics)
    cfg = _load_search_config(args.search_config) if args.search_config else None
    solution = solve_inverse(problem, spec, cfg)
    _emit({"solution": solution})
    if solution is None:
        print("no base-score assignment found", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def _cmd_counterfactual(args) -> int:
    g = _load_graph(args.graph)
    spec = _load_semantics(args.semantics)
    problem = CounterfactualProblem(g, args.topic, args.target_strength, spec)
    cfg = _load_search_config(args.search_config) if args.search_config else None
    solution, outcome = solve_counterfactual(problem, cfg)
    _emit({"solution": solution, "residual_cost": outcome.final_cost})
    if solution is None:
        print("no assignment reaches the target strength", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def _cmd_experiment(args) -> int:
    doc = json.loads(Path(args.config).read_bytes())
    try:
        search = SearchConfig(**doc.get("search", {}))
    except TypeError as exc:
        raise ValueError(f"bad search config: {exc}") from exc
    cfg = ExperimentConfig(
        structures=tuple(structure(s) for s in doc["structures"]),
        cells=tuple((c[0], c[1]) for c in doc["cells"]),
        semantics=tuple(doc.get("semantics", ["dfquad"])),
        n_graphs=int(doc.get("n_graphs", 100)),
        seed=int(doc.get("seed", 0)),
        search=search,
        target=doc.get("target", "permuted"),
        bs_diff_per=doc.get("bs_diff_per", "mutable"),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "summary.csv"
    per_graph = out / "per_graph.csv"
    records = run_experiment(cfg, jobs=args.jobs, summary_path=summary, per_graph_path=per_graph)
    _emit({"summary": str(summary), "per_graph": str(per_graph), "cells": len(records)})
    print(f"ran {len(records)} cell(s); summary at {summary}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbagx",
        description="Gradual semantics and strength change explanations for argumentation graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="compute final strengths")
    p.add_argument("--graph", required=True)
    p.add_argument("--semantics", required=True, help="dfquad | eb | qe | naive | custom JSON")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("explain", help="search for a strength change explanation")
    p.add_argument("--graph", required=True)
    p.add_argument("--semantics", required=True)
    p.add_argument("--ordering", required=True, help="JSON file or strongest-first spec like 'c>b'")
    p.add_argument("--mutable", required=True, help="comma-separated argument ids")
    p.add_argument("--search-config", default=None, help="JSON file or inline JSON")
    p.add_argument("--trajectory", default=None, help="write per-iteration cost CSV here")
    p.set_defaults(fn=_cmd_explain)

    p = sub.add_parser("generate", help="generate layered benchmark graphs")
    p.add_argument("--structure", required=True, help="layer sizes, e.g. 8,32,16,3")
    p.add_argument("--family", choices=["random", "constrained"], default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--target", choices=["permuted", "literal"], default="permuted")
    p.add_argument("--semantics", default="dfquad", help="semantics for --target literal")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("oracle", help="brute-force grid search / certification")
    p.add_argument("--graph", required=True)
    p.add_argument("--semantics", required=True)
    p.add_argument("--ordering", required=True)
    p.add_argument("--mutable", required=True)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.add_argument("--max-mutable", type=int, default=4)
    p.add_argument("--mode", choices=["weak", "exact"], default="weak")
    p.add_argument("--certify", default=None, help="strength change JSON file to certify")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("inverse", help="solve a from-scratch ordering problem")
    p.add_argument("--problem", required=True, help="JSON with arguments, attacks, supports, ordering")
    p.add_argument("--semantics", required=True)
    p.add_argument("--search-config", default=None)
    p.set_defaults(fn=_cmd_inverse)

    p = sub.add_parser("counterfactual", help="drive one argument to an exact final strength")
    p.add_argument("--graph", required=True)
    p.add_argument("--topic", required=True)
    p.add_argument("--target-strength", type=float, required=True)
    p.add_argument("--semantics", required=True)
    p.add_argument("--search-config", default=None)
    p.set_defaults(fn=_cmd_counterfactual)

    p = sub.add_parser("experiment", help="run a batch experiment and write CSV reports")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(fn=_cmd_experiment)

    return parser


def _default_jobs() -> int:
    env = os.environ.get("QBAG_SX_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (QbagError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
