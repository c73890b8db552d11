"""Rank-correlation metrics and the batch experiment runner.

For every cell (structure x family/mutability x semantics) the runner
generates seeded instances, searches each one, and aggregates validity
(weak cost exactly zero), Kendall/Spearman correlation between the target
ordering and the achieved strengths (the last iterate's when the search
fails), wall time of the search call alone, and the mean base-score change
per mutable argument over valid runs only.
"""

from __future__ import annotations

import csv
import time
import warnings
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from scipy.stats import ConstantInputWarning, kendalltau, spearmanr

from .explanation import DesiredOrdering, ExplanationQuery, amount_of_change
from .generators import GenSpec, LayerStructure, generate_batch, mutable_preset
from .graph import QBAG
from .search import SearchConfig, heuristic_search
from .semantics import builtin_semantics, final_strengths


def _target_and_achieved(ordering: DesiredOrdering, strengths: Mapping[str, float]):
    rank = ordering.tier_of()
    topics = sorted(rank)
    if len(topics) < 2:
        raise ValueError("rank correlation needs at least 2 topic arguments")
    for x in topics:
        if strengths.get(x) is None:
            raise ValueError(f"strength of topic {x!r} missing or undefined")
    return [rank[x] for x in topics], [strengths[x] for x in topics]


def kendall_tau(ordering: DesiredOrdering, strengths: Mapping[str, float]) -> float:
    """Tie-corrected (tau-b) correlation between the desired ranks and the
    achieved strengths; 1 means equal order, -1 reversed. All-tied strengths
    carry no rank information and count as 0."""
    target, achieved = _target_and_achieved(ordering, strengths)
    value = float(kendalltau(target, achieved).statistic)
    return 0.0 if value != value else value


def spearman_rho(ordering: DesiredOrdering, strengths: Mapping[str, float]) -> float:
    """Spearman correlation with average ranks for ties; 0 when either side
    is constant."""
    target, achieved = _target_and_achieved(ordering, strengths)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConstantInputWarning)
        value = float(spearmanr(target, achieved).statistic)
    return 0.0 if value != value else value


@dataclass(frozen=True)
class ExperimentConfig:
    structures: tuple[LayerStructure, ...]
    cells: tuple[tuple[str, str], ...]  # (family, mutable mode)
    semantics: tuple[str, ...] = ("dfquad",)
    n_graphs: int = 100
    seed: int = 0
    search: SearchConfig = field(default_factory=SearchConfig)
    target: str = "permuted"
    bs_diff_per: str = "mutable"  # or "all": divide the change by |arguments|

    def __post_init__(self):
        if self.n_graphs < 1:
            raise ValueError("n_graphs must be >= 1")
        if self.bs_diff_per not in ("mutable", "all"):
            raise ValueError("bs_diff_per must be 'mutable' or 'all'")


@dataclass(frozen=True)
class ExperimentRecord:
    structure: str
    family: str
    mode: str
    semantics: str
    validity: float
    kendall: float
    spearman: float
    runtime_s: float
    abs_bs_diff: float | None  # None when no run was valid (reported as NA)


@dataclass(frozen=True)
class GraphRunRecord:
    structure: str
    family: str
    mode: str
    semantics: str
    graph_index: int
    seed: int
    found: bool
    kendall: float
    spearman: float
    runtime_s: float
    iterations: int
    final_cost: float
    bs_diff: float | None


def batch_seed(seed: int, structure: LayerStructure, family: str) -> int:
    """Stable per-cell base seed; the same structure+family shares graphs
    across mutability modes and semantics."""
    tag = f"{structure}|{family}".encode()
    return (seed + zlib.crc32(tag)) % (2**63)


def run_graph(
    structure: LayerStructure,
    family: str,
    mode: str,
    semantics_token: str,
    graph_seed: int,
    search: SearchConfig,
    target: str,
    bs_diff_per: str,
    index: int = 0,
) -> GraphRunRecord:
    spec = builtin_semantics(semantics_token)
    instance = generate_batch(GenSpec(structure, family, graph_seed, target, spec), 1)[0]
    mutable = mutable_preset(instance, mode)
    query = ExplanationQuery(instance.graph, spec, mutable, instance.ordering)
    started = time.perf_counter()
    outcome = heuristic_search(query, search)
    elapsed = time.perf_counter() - started

    graph_after = QBAG(
        instance.graph.arguments,
        {a: outcome.final_scores[a] for a in instance.graph.arguments},
        instance.graph.attacks,
        instance.graph.supports,
    )
    sigma = final_strengths(graph_after, spec)
    kendall = kendall_tau(instance.ordering, sigma)
    spearman = spearman_rho(instance.ordering, sigma)

    bs_diff = None
    if outcome.found:
        norm = amount_of_change(instance.graph, outcome.change)
        denominator = len(mutable) if bs_diff_per == "mutable" else len(instance.graph.arguments)
        bs_diff = norm / denominator if denominator else 0.0
    return GraphRunRecord(
        str(structure),
        family,
        mode,
        semantics_token,
        index,
        graph_seed,
        outcome.found,
        kendall,
        spearman,
        elapsed,
        outcome.iterations_used,
        outcome.final_cost,
        bs_diff,
    )


def _run_task(task) -> GraphRunRecord:
    struct, family, mode, token, graph_seed, index, search, target, bs_diff_per = task
    return run_graph(struct, family, mode, token, graph_seed, search, target, bs_diff_per, index)


def run_experiment(
    cfg: ExperimentConfig,
    jobs: int = 1,
    summary_path=None,
    per_graph_path=None,
) -> list[ExperimentRecord]:
    """Run every cell; optionally write the summary and per-graph CSVs.

    Per-graph seeds are fixed up front, so results do not depend on the
    execution schedule.
    """
    tasks = []
    for struct in cfg.structures:
        for family, mode in cfg.cells:
            for token in cfg.semantics:
                base = batch_seed(cfg.seed, struct, family)
                for i in range(cfg.n_graphs):
                    tasks.append(
                        (struct, family, mode, token, base + i, i, cfg.search, cfg.target, cfg.bs_diff_per)
                    )

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        results = [_run_task(task) for task in tasks]

    grouped: dict[tuple, list[GraphRunRecord]] = {}
    for r in results:
        grouped.setdefault((r.structure, r.family, r.mode, r.semantics), []).append(r)

    records = []
    for (struct, family, mode, token), runs in grouped.items():
        runs.sort(key=lambda r: r.graph_index)
        n = len(runs)
        valid = [r for r in runs if r.found]
        diffs = [r.bs_diff for r in valid if r.bs_diff is not None]
        records.append(
            ExperimentRecord(
                struct,
                family,
                mode,
                token,
                len(valid) / n,
                sum(r.kendall for r in runs) / n,
                sum(r.spearman for r in runs) / n,
                sum(r.runtime_s for r in runs) / n,
                (sum(diffs) / len(diffs)) if diffs else None,
            )
        )
    records.sort(key=lambda r: (r.structure, r.family, r.mode, r.semantics))

    if summary_path is not None:
        write_summary_csv(records, summary_path)
    if per_graph_path is not None:
        write_per_graph_csv(sorted(results, key=lambda r: (r.structure, r.family, r.mode, r.semantics, r.graph_index)), per_graph_path)
    return records


SUMMARY_COLUMNS = ["structure", "family", "mode", "semantics", "validity", "kendall", "spearman", "runtime_s", "abs_bs_diff"]


def write_summary_csv(records: Iterable[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.structure,
                    r.family,
                    r.mode,
                    r.semantics,
                    repr(r.validity),
                    repr(r.kendall),
                    repr(r.spearman),
                    repr(r.runtime_s),
                    "NA" if r.abs_bs_diff is None else repr(r.abs_bs_diff),
                ]
            )


def write_per_graph_csv(runs: Iterable[GraphRunRecord], path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["structure", "family", "mode", "semantics", "graph_index", "seed", "found",
             "kendall", "spearman", "runtime_s", "iterations", "final_cost", "bs_diff"]
        )
        for r in runs:
            writer.writerow(
                [r.structure, r.family, r.mode, r.semantics, r.graph_index, r.seed,
                 int(r.found), repr(r.kendall), repr(r.spearman), repr(r.runtime_s),
                 r.iterations, repr(r.final_cost), "NA" if r.bs_diff is None else repr(r.bs_diff)]
            )
