"""Iterative heuristic search for strength change explanations.

Each iteration evaluates the order-violation cost, estimates its gradient
with respect to every mutable base score by finite differences (one batched
strength evaluation covers the unperturbed point plus all perturbations),
and applies an Adam update clamped to the strength domain. Success means
the cost dropped to the configured tolerance; the winning assignment is
re-verified with a fresh evaluation before it is returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import UndefinedStrengthError
from .explanation import DesiredOrdering, ExplanationQuery, StrengthChange, satisfies
from .graph import QBAG
from .semantics import GraphPlan, SemanticsSpec, check_scores_in_domain, compile_graph, evaluate_matrix


@dataclass(frozen=True)
class SearchConfig:
    max_iterations: int = 100
    perturbation: float = 1e-4
    # 0.05 keeps Adam's near-constant steps from overshooting topic scores
    # into the domain boundary, where exact ties blunt the achieved ordering.
    alpha: float = 0.05
    alpha_decay: float = 1.0   # per-iteration step-size factor; < 1 anneals
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    cost_tolerance: float = 0.0
    rng_seed: int = 0
    restarts: int = 0          # extra seeded-jitter starts after the plain one
    restart_jitter: float = 0.5
    satisfaction: str = "weak"  # success criterion: "weak" (cost only) or "exact"
    record_trajectory: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.perturbation <= 0:
            raise ValueError("perturbation must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.alpha_decay <= 1.0:
            raise ValueError("alpha_decay must be in (0, 1]")
        if self.satisfaction not in ("weak", "exact"):
            raise ValueError(f"unknown satisfaction mode: {self.satisfaction!r}")


def search_config_from_json(data: str | bytes) -> SearchConfig:
    doc = json.loads(data)
    if not isinstance(doc, dict):
        raise ValueError("search config must be a JSON object")
    try:
        return SearchConfig(**doc)
    except TypeError as exc:
        raise ValueError(f"bad search config: {exc}") from exc


@dataclass(frozen=True)
class SearchOutcome:
    status: str  # "found" | "not_found"
    change: StrengthChange | None
    iterations_used: int
    final_cost: float
    final_scores: dict[str, float]  # base scores at termination (best restart)
    trajectory: list[float] | None = None

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_json(self) -> str:
        doc = {
            "status": self.status,
            "change": dict(self.change.sorted_items()) if self.change is not None else None,
            "iterations_used": self.iterations_used,
            "final_cost": self.final_cost,
            "final_scores": self.final_scores,
        }
        if self.trajectory is not None:
            doc["trajectory"] = self.trajectory
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def relu_cost(strengths: Mapping[str, float], ordering: DesiredOrdering) -> float:
    """Order-violation cost: for every pair with x in a strictly higher tier
    than y, max(0, sigma(y) - sigma(x)); same-tier pairs contribute their
    absolute strength difference (so single-tier orderings demand equality).
    Zero exactly when the ordering is weakly satisfied with same-tier ties.
    """
    rank = ordering.tier_of()
    topics = sorted(rank)
    for x in topics:
        if strengths.get(x) is None:
            raise UndefinedStrengthError(f"strength of topic {x!r} missing or undefined")
    cost = 0.0
    for i, x in enumerate(topics):
        for y in topics[i + 1:]:
            if rank[x] == rank[y]:
                cost += abs(strengths[x] - strengths[y])
            elif rank[x] < rank[y]:
                cost += max(0.0, strengths[x] - strengths[y])
            else:
                cost += max(0.0, strengths[y] - strengths[x])
    return cost


class _CostPairs:
    """Pair index arrays for the vectorized cost over evaluation batches."""

    def __init__(self, plan: GraphPlan, ordering: DesiredOrdering):
        rank = ordering.tier_of()
        topics = sorted(rank)
        strong, weak, tie_a, tie_b = [], [], [], []
        for i, x in enumerate(topics):
            for y in topics[i + 1:]:
                if rank[x] == rank[y]:
                    tie_a.append(plan.index[x])
                    tie_b.append(plan.index[y])
                elif rank[x] < rank[y]:
                    strong.append(plan.index[y])
                    weak.append(plan.index[x])
                else:
                    strong.append(plan.index[x])
                    weak.append(plan.index[y])
        self.strong = np.array(strong, dtype=int)
        self.weak = np.array(weak, dtype=int)
        self.tie_a = np.array(tie_a, dtype=int)
        self.tie_b = np.array(tie_b, dtype=int)

    def costs(self, sigma: np.ndarray) -> np.ndarray:
        out = np.maximum(0.0, sigma[self.weak] - sigma[self.strong]).sum(axis=0)
        if self.tie_a.size:
            out = out + np.abs(sigma[self.tie_a] - sigma[self.tie_b]).sum(axis=0)
        return out


def _batched_costs(plan, spec, pairs, theta, m_idx, eps):
    """Cost at theta plus finite-difference gradients for every mutable index.

    Perturbs forward by eps, falling back to a backward difference where a
    forward step would leave the domain.
    """
    n_m = len(m_idx)
    batch = np.repeat(theta[:, None], n_m + 1, axis=1)
    if spec.domain.bounded:
        dirs = np.where(theta[m_idx] + eps > spec.domain.upper, -1.0, 1.0)
    else:
        dirs = np.ones(n_m)
    batch[m_idx, np.arange(1, n_m + 1)] += dirs * eps
    sigma, defined = evaluate_matrix(plan, spec, batch)
    if not defined.all():
        raise UndefinedStrengthError("strength evaluation did not converge during the search")
    costs = pairs.costs(sigma)
    grads = dirs * (costs[1:] - costs[0]) / eps
    return costs[0], grads


def finite_diff_gradient(
    g,
    spec: SemanticsSpec,
    ordering: DesiredOrdering,
    mutable,
    eps: float = 1e-4,
) -> dict[str, float]:
    """Difference-quotient gradient of the cost w.r.t. each mutable base score."""
    plan = compile_graph(g)
    check_scores_in_domain(plan, spec, plan.tau[:, None])
    m_ids = sorted(mutable)
    m_idx = np.array([plan.index[a] for a in m_ids], dtype=int)
    pairs = _CostPairs(plan, ordering)
    _, grads = _batched_costs(plan, spec, pairs, plan.tau.copy(), m_idx, eps)
    return {a: float(v) for a, v in zip(m_ids, grads)}


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_step(
    state: AdamState,
    gradients: np.ndarray,
    alpha: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[AdamState, np.ndarray]:
    """One Adam update; returns the new state and the additive parameter step."""
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * gradients
    v = beta2 * state.v + (1.0 - beta2) * gradients**2
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    step = -alpha * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(m, v, t), step


def _clamp(domain, values: np.ndarray) -> np.ndarray:
    if domain.bounded:
        return np.clip(values, domain.lower, domain.upper)
    return values


def heuristic_search(query: ExplanationQuery, cfg: SearchConfig | None = None) -> SearchOutcome:
    """Run the gradient-guided local search for an explanation.

    Deterministic for fixed inputs and config. Restart 0 starts from the
    graph's own base scores; restarts 1..cfg.restarts re-seed the mutable
    scores with uniform jitter around the originals.
    """
    cfg = cfg or SearchConfig()
    g = query.graph
    spec = query.semantics
    plan = compile_graph(g)
    check_scores_in_domain(plan, spec, plan.tau[:, None])
    pairs = _CostPairs(plan, query.ordering)
    m_ids = sorted(query.mutable)
    m_idx = np.array([plan.index[a] for a in m_ids], dtype=int)
    trajectory: list[float] | None = [] if cfg.record_trajectory else None

    def canonical_cost(theta: np.ndarray) -> tuple[float, dict[str, float]]:
        sigma, defined = evaluate_matrix(plan, spec, theta[:, None])
        if not defined.all():
            raise UndefinedStrengthError("strength evaluation did not converge during the search")
        strengths = {a: float(sigma[plan.index[a], 0]) for a in query.ordering.topic_set}
        return relu_cost(strengths, query.ordering), strengths

    def with_scores(theta: np.ndarray):
        return QBAG(
            g.arguments,
            {a: float(theta[plan.index[a]]) for a in g.arguments},
            g.attacks,
            g.supports,
        )

    def accept(theta: np.ndarray) -> bool:
        cost, _ = canonical_cost(theta)
        if cost > cfg.cost_tolerance:
            return False
        if cfg.satisfaction == "exact":
            return satisfies(with_scores(theta), spec, query.ordering, mode="exact")
        return True

    def finish_found(theta: np.ndarray, iterations: int) -> SearchOutcome:
        entries = {
            a: float(theta[plan.index[a]])
            for a in m_ids
            if theta[plan.index[a]] != plan.tau[plan.index[a]]
        }
        cost, _ = canonical_cost(theta)
        return SearchOutcome(
            "found",
            StrengthChange(entries),
            iterations,
            cost,
            {a: float(theta[plan.index[a]]) for a in plan.ids},
            trajectory,
        )

    if not m_ids:
        ok = accept(plan.tau.copy())
        cost, _ = canonical_cost(plan.tau)
        scores = {a: g.base_scores[a] for a in plan.ids}
        if ok:
            return SearchOutcome("found", StrengthChange({}), 1, cost, scores, trajectory)
        return SearchOutcome("not_found", None, 1, cost, scores, trajectory)

    total_iterations = 0
    best_cost = float("inf")
    best_theta = plan.tau.copy()
    for restart in range(cfg.restarts + 1):
        theta = plan.tau.copy()
        if restart > 0:
            rng = np.random.default_rng(cfg.rng_seed + restart)
            jitter = rng.uniform(-cfg.restart_jitter, cfg.restart_jitter, size=len(m_idx))
            theta[m_idx] = _clamp(spec.domain, plan.tau[m_idx] + jitter)
        adam = AdamState(np.zeros(len(m_idx)), np.zeros(len(m_idx)))
        alpha = cfg.alpha
        for _ in range(cfg.max_iterations):
            total_iterations += 1
            cost0, grads = _batched_costs(plan, spec, pairs, theta, m_idx, cfg.perturbation)
            if trajectory is not None:
                trajectory.append(float(cost0))
            if cost0 <= cfg.cost_tolerance:
                if accept(theta):
                    return finish_found(theta, total_iterations)
                if not np.any(grads):
                    break  # flat spot that fails the exact check: restart
            adam, step = adam_step(adam, grads, alpha, cfg.beta1, cfg.beta2, cfg.adam_eps)
            theta[m_idx] = _clamp(spec.domain, theta[m_idx] + step)
            alpha *= cfg.alpha_decay
        cost_end, _ = canonical_cost(theta)
        if cost_end < best_cost:
            best_cost = cost_end
            best_theta = theta.copy()

    return SearchOutcome(
        "not_found",
        None,
        total_iterations,
        best_cost,
        {a: float(best_theta[plan.index[a]]) for a in plan.ids},
        trajectory,
    )
