"""Shared fixtures: the running-example graphs and random instance factories."""

from __future__ import annotations

import numpy as np

import qbagx as q

FIG_EDGES = {
    "attacks": [("a", "b"), ("d", "e")],
    "supports": [("a", "c"), ("e", "c"), ("d", "a")],
}

# (base scores, expected final strengths) for the four running-example graphs
FIG_CASES = {
    "g": ({"a": 1, "b": 8, "c": 1, "d": 1, "e": 2}, {"a": 2, "b": 6, "c": 4, "d": 1, "e": 1}),
    "g_prime": ({"a": 2, "b": 8, "c": 1, "d": 1, "e": 3}, {"a": 3, "b": 5, "c": 6, "d": 1, "e": 2}),
    "g_dblprime": ({"a": 3, "b": 8, "c": 1, "d": 1, "e": 2}, {"a": 4, "b": 4, "c": 6, "d": 1, "e": 1}),
    "g_star": ({"a": 2, "b": 8, "c": 1, "d": 1, "e": 4}, {"a": 3, "b": 5, "c": 7, "d": 1, "e": 3}),
}


def fig_graph(name: str = "g") -> q.QBAG:
    scores, _ = FIG_CASES[name]
    return q.make_qbag(scores, FIG_EDGES["attacks"], FIG_EDGES["supports"])


def fig_query(mutable=("a", "e")) -> q.ExplanationQuery:
    """The running-example query: make c strictly stronger than b."""
    return q.ExplanationQuery(
        fig_graph("g"),
        q.NAIVE,
        frozenset(mutable),
        q.ordering_from_tiers([["b"], ["c"]]),
    )


def random_dag(seed: int, n_lo: int = 3, n_hi: int = 7, edge_p: float = 0.45):
    """Small random acyclic graph with unit-interval base scores."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi))
    ids = [f"x{i}" for i in range(n)]
    perm = list(rng.permutation(n))
    attacks, supports = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_p:
                a, b = ids[perm[i]], ids[perm[j]]
                (attacks if rng.random() < 0.5 else supports).append((a, b))
    scores = {a: float(v) for a, v in zip(ids, rng.random(n))}
    return q.make_qbag(scores, attacks, supports), ids, rng


def random_tiny_query(seed: int, semantics=None, max_mutable: int = 3) -> q.ExplanationQuery:
    """Random query over a tiny graph: 2-3 singleton-tier topics, <= 3 mutables."""
    g, ids, rng = random_dag(seed)
    n = len(ids)
    k = int(rng.integers(2, min(4, n + 1)))
    topics = [ids[i] for i in rng.choice(n, size=k, replace=False)]
    ordering = q.ordering_from_tiers([[t] for t in topics])
    m = int(rng.integers(1, max_mutable + 1))
    mutable = frozenset(ids[i] for i in rng.choice(n, size=m, replace=False))
    return q.ExplanationQuery(g, semantics or q.DFQUAD, mutable, ordering)
