"""Gradual semantics: aggregation/influence functions and strength evaluation.

A modular semantics combines an aggregation function (folds the parents'
final strengths into one number, supporters positive / attackers negative)
with an influence function (moves the base score by the aggregate):

    Sum         agg = sum(supporters) - sum(attackers)
    Product     agg = prod(1 - s_att) - prod(1 - s_supp), empty products = 1

    Linear(k)      i(w, s) = w - w/k * max(0, -s) + (1-w)/k * max(0, s)
    EulerBased     i(w, s) = 1 - (1 - w^2) / (1 + w * e^s)
    pMax(p, k)     i(w, s) = w - w*h(-s/k) + (1-w)*h(s/k),
                   h(x) = max(0, x)^p / (1 + max(0, x)^p)
    Additive       i(w, s) = w + s        (running-example semantics)

Built-ins: dfquad = (product, linear(1)), eb = (sum, euler_based),
qe = (sum, 2-max(1)), all over [0, 1]; naive = (sum, additive) over the
reals, defined for acyclic graphs only.

Acyclic graphs are evaluated by a single forward pass over topological
levels (exact); cyclic graphs by synchronous fixed-point iteration from the
base scores, with non-convergent arguments reported as undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import CyclicGraphError, DomainError
from .graph import QBAG, parents_map, reachable_from, restrict, topological_levels

# Absolute tolerance for float comparisons in principle checks.
CHECK_TOL = 1e-12

# Floor for 1 - s before taking logs in the product aggregation; keeps the
# fast exp(mask @ log(...)) path finite when some strength equals 1.
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class StrengthDomain:
    kind: str  # "unit_interval" | "all_reals"
    lower: float
    upper: float

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper

    def clamp(self, v: float) -> float:
        return min(self.upper, max(self.lower, v))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)


UNIT_INTERVAL = StrengthDomain("unit_interval", 0.0, 1.0)
ALL_REALS = StrengthDomain("all_reals", float("-inf"), float("inf"))


@dataclass(frozen=True)
class Influence:
    kind: str  # "linear" | "euler_based" | "p_max" | "additive"
    k: float = 1.0
    p: int = 2

    def __post_init__(self):
        if self.kind not in ("linear", "euler_based", "p_max", "additive"):
            raise ValueError(f"unknown influence kind: {self.kind!r}")
        if self.k <= 0:
            raise ValueError("influence parameter k must be positive")
        if self.kind == "p_max" and (self.p < 1 or int(self.p) != self.p):
            raise ValueError("p_max needs a positive integer p")


@dataclass(frozen=True)
class SemanticsSpec:
    aggregation: str  # "sum" | "product"
    influence: Influence
    domain: StrengthDomain = UNIT_INTERVAL
    epsilon: float = 1e-9  # fixed-point convergence threshold
    max_sweeps: int = 10_000
    acyclic_only: bool = False
    name: str = "custom"

    def __post_init__(self):
        if self.aggregation not in ("sum", "product"):
            raise ValueError(f"unknown aggregation: {self.aggregation!r}")


DFQUAD = SemanticsSpec("product", Influence("linear", k=1.0), UNIT_INTERVAL, name="dfquad")
EULER_BASED = SemanticsSpec("sum", Influence("euler_based"), UNIT_INTERVAL, name="eb")
QUADRATIC_ENERGY = SemanticsSpec("sum", Influence("p_max", k=1.0, p=2), UNIT_INTERVAL, name="qe")
NAIVE = SemanticsSpec("sum", Influence("additive"), ALL_REALS, acyclic_only=True, name="naive")

_BUILTINS = {
    "dfquad": DFQUAD,
    "eb": EULER_BASED,
    "qe": QUADRATIC_ENERGY,
    "naive": NAIVE,
}


def builtin_semantics(token: str) -> SemanticsSpec:
    """Look up a semantics by its string token: dfquad | eb | qe | naive."""
    try:
        return _BUILTINS[token]
    except KeyError:
        raise ValueError(f"unknown semantics token: {token!r} (expected one of {sorted(_BUILTINS)})")


def semantics_from_config(config: str | Mapping) -> SemanticsSpec:
    """Build a semantics from a token or a custom {"aggregation", "influence"} object."""
    if isinstance(config, str):
        return builtin_semantics(config)
    unknown = set(config) - {"aggregation", "influence"}
    if unknown:
        raise ValueError(f"unknown keys in semantics config: {sorted(unknown)}")
    agg = config.get("aggregation")
    inf = config.get("influence")
    if not isinstance(inf, Mapping) or "kind" not in inf:
        raise ValueError('custom semantics need an influence object with a "kind"')
    if set(inf) - {"kind", "k", "p"}:
        raise ValueError(f"unknown keys in influence config: {sorted(set(inf) - {'kind', 'k', 'p'})}")
    kind = inf["kind"]
    if kind == "linear":
        influence = Influence("linear", k=float(inf.get("k", 1.0)))
    elif kind == "euler_based":
        influence = Influence("euler_based")
    elif kind == "p_max":
        influence = Influence("p_max", k=float(inf.get("k", 1.0)), p=int(inf.get("p", 2)))
    else:
        raise ValueError(f"unknown influence kind: {kind!r}")
    return SemanticsSpec(str(agg), influence, UNIT_INTERVAL)


def aggregate(kind: str, attacker_strengths: Iterable[float], supporter_strengths: Iterable[float]) -> float:
    """Scalar aggregation, the reference for the vectorized engine.

    sum: supporters minus attackers; product: prod(1-s) over attackers
    minus prod(1-s) over supporters, with empty products equal to 1 (so no
    parents always aggregates to 0).
    """
    att = list(attacker_strengths)
    supp = list(supporter_strengths)
    if kind == "sum":
        return sum(supp) - sum(att)
    if kind == "product":
        return math.prod(1.0 - s for s in att) - math.prod(1.0 - s for s in supp)
    raise ValueError(f"unknown aggregation: {kind!r}")


def _apply_influence(inf: Influence, w, s):
    """Influence formulas, vectorized over numpy arrays (or floats)."""
    if inf.kind == "linear":
        return w - (w / inf.k) * np.maximum(0.0, -s) + ((1.0 - w) / inf.k) * np.maximum(0.0, s)
    if inf.kind == "euler_based":
        return 1.0 - (1.0 - w * w) / (1.0 + w * np.exp(s))
    if inf.kind == "p_max":
        hneg = np.maximum(0.0, -s / inf.k) ** inf.p
        hpos = np.maximum(0.0, s / inf.k) ** inf.p
        return w - w * (hneg / (1.0 + hneg)) + (1.0 - w) * (hpos / (1.0 + hpos))
    # additive
    return w + s


def influence_value(inf: Influence, w: float, s: float) -> float:
    return float(_apply_influence(inf, float(w), float(s)))


class GraphPlan:
    """Index-based evaluation plan compiled once per graph.

    Holds dense parent matrices and, for acyclic graphs, per-level slices so
    a whole batch of base-score columns evaluates with a handful of numpy
    calls per level.
    """

    def __init__(self, g: QBAG):
        self.graph = g
        self.ids = list(g.arguments)
        self.index = {a: i for i, a in enumerate(self.ids)}
        n = len(self.ids)
        self.n = n
        self.tau = np.array([g.base_scores[a] for a in self.ids], dtype=float)
        self.att = np.zeros((n, n), dtype=bool)  # att[i, j]: j attacks i
        self.supp = np.zeros((n, n), dtype=bool)
        for a, b in g.attacks:
            self.att[self.index[b], self.index[a]] = True
        for a, b in g.supports:
            self.supp[self.index[b], self.index[a]] = True
        self.w_full = self.supp.astype(float) - self.att.astype(float)
        self.att_f = self.att.astype(float)
        self.supp_f = self.supp.astype(float)

        levels = topological_levels(g)
        self.levels: list[tuple] | None = None
        if levels is not None:
            self.levels = []
            for members in levels:
                rows = np.array([self.index[a] for a in members], dtype=int)
                par = self.att[rows] | self.supp[rows]
                cols = np.flatnonzero(par.any(axis=0))
                self.levels.append(
                    (
                        rows,
                        cols,
                        self.att[np.ix_(rows, cols)],
                        self.supp[np.ix_(rows, cols)],
                        self.att_f[np.ix_(rows, cols)],
                        self.supp_f[np.ix_(rows, cols)],
                        self.w_full[np.ix_(rows, cols)],
                    )
                )

    @property
    def acyclic(self) -> bool:
        return self.levels is not None


def compile_graph(g: QBAG) -> GraphPlan:
    return GraphPlan(g)


def _products(att_mask, att_f, factors):
    """prod over masked entries of `factors`, batched: (rows, cols) x (cols, B)."""
    if factors.size and factors.min() >= 0.0:
        return np.exp(att_f @ np.log(np.maximum(factors, _LOG_FLOOR)))
    # negative factors (out-of-domain strengths): exact masked product
    return np.where(att_mask[:, :, None], factors[None, :, :], 1.0).prod(axis=1)


def _forward(plan: GraphPlan, spec: SemanticsSpec, tau: np.ndarray) -> np.ndarray:
    """One exact pass over topological levels; tau has shape (n, B)."""
    sigma = np.empty_like(tau)
    for rows, cols, att_m, supp_m, att_f, supp_f, w_sub in plan.levels:
        w = tau[rows]
        if cols.size == 0:
            agg = np.zeros(w.shape)
        elif spec.aggregation == "sum":
            agg = w_sub @ sigma[cols]
        else:
            factors = 1.0 - sigma[cols]
            agg = _products(att_m, att_f, factors) - _products(supp_m, supp_f, factors)
        sigma[rows] = _apply_influence(spec.influence, w, agg)
    return sigma


def _sweep(plan: GraphPlan, spec: SemanticsSpec, tau: np.ndarray, current: np.ndarray) -> np.ndarray:
    if spec.aggregation == "sum":
        agg = plan.w_full @ current
    else:
        factors = 1.0 - current
        agg = _products(plan.att, plan.att_f, factors) - _products(plan.supp, plan.supp_f, factors)
    return _apply_influence(spec.influence, tau, agg)


def _fixed_point(plan: GraphPlan, spec: SemanticsSpec, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Synchronous (Jacobi) iteration from tau. Returns (sigma, defined mask).

    On non-convergence, every argument that is still moving, plus everything
    reachable from one, is marked undefined; stabilized parts keep their values.
    """
    current = tau.copy()
    delta = np.zeros(tau.shape)
    for _ in range(spec.max_sweeps):
        nxt = _sweep(plan, spec, tau, current)
        delta = np.abs(nxt - current)
        current = nxt
        if delta.max(initial=0.0) < spec.epsilon:
            return current, np.ones(tau.shape, dtype=bool)
    defined = np.ones(tau.shape, dtype=bool)
    g = plan.graph
    for b in range(tau.shape[1]):
        unstable = {plan.ids[i] for i in np.flatnonzero(delta[:, b] >= spec.epsilon)}
        tainted = unstable | reachable_from(g, unstable)
        for a in tainted:
            defined[plan.index[a], b] = False
    return current, defined


def evaluate_matrix(
    plan: GraphPlan, spec: SemanticsSpec, tau: np.ndarray, method: str = "auto"
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a batch of base-score columns; returns (sigma, defined).

    method: "auto" picks the forward pass for acyclic graphs, "iterative"
    forces fixed-point iteration (used to cross-check the two evaluators).
    """
    if tau.ndim != 2 or tau.shape[0] != plan.n:
        raise ValueError("tau must have shape (n_arguments, batch)")
    if not plan.acyclic:
        if spec.acyclic_only:
            raise CyclicGraphError(f"semantics {spec.name!r} is defined for acyclic graphs only")
        return _fixed_point(plan, spec, tau)
    if method == "iterative":
        return _fixed_point(plan, spec, tau)
    return _forward(plan, spec, tau), np.ones(tau.shape, dtype=bool)


def check_scores_in_domain(plan: GraphPlan, spec: SemanticsSpec, tau: np.ndarray) -> None:
    if spec.domain.bounded and tau.size:
        out = (tau < spec.domain.lower) | (tau > spec.domain.upper)
        if out.any():
            bad = plan.ids[int(np.nonzero(out.any(axis=1))[0][0])]
            raise DomainError(
                f"base score of {bad!r} outside domain [{spec.domain.lower}, {spec.domain.upper}]"
            )


def final_strengths(g: QBAG, spec: SemanticsSpec, method: str = "auto") -> dict[str, float | None]:
    """Final strength of every argument; None marks a strength left undefined
    by a non-convergent fixed-point iteration."""
    plan = compile_graph(g)
    tau = plan.tau.reshape(-1, 1)
    check_scores_in_domain(plan, spec, tau)
    sigma, defined = evaluate_matrix(plan, spec, tau, method=method)
    return {
        a: (float(sigma[i, 0]) if defined[i, 0] else None)
        for i, a in enumerate(plan.ids)
    }


def _strengths_or_raise(g: QBAG, spec: SemanticsSpec) -> dict[str, float]:
    out = final_strengths(g, spec)
    if any(v is None for v in out.values()):
        raise CyclicGraphError("fixed-point iteration did not converge")
    return out  # type: ignore[return-value]


PRINCIPLES = (
    "directionality",
    "strong_directionality",
    "stability",
    "balance",
    "weak_monotonicity",
)


def check_principle(g: QBAG, spec: SemanticsSpec, principle: str, rng_seed: int = 0) -> dict | None:
    """Check one semantics principle on a concrete acyclic graph.

    Returns None when the principle holds (within CHECK_TOL) and a witness
    dict describing the first violation otherwise. Strong directionality is
    checked against the maximal removable set per argument plus a few seeded
    random subsets; the other principles are checked exhaustively.
    """
    if topological_levels(g) is None:
        raise CyclicGraphError("principle checks need an acyclic graph")
    if principle not in PRINCIPLES:
        raise ValueError(f"unknown principle: {principle!r}")
    sigma = _strengths_or_raise(g, spec)

    if principle == "stability":
        for x in g.arguments:
            if not g.attackers(x) and not g.supporters(x):
                if abs(sigma[x] - g.base_scores[x]) > CHECK_TOL:
                    return {"principle": principle, "argument": x, "sigma": sigma[x], "tau": g.base_scores[x]}
        return None

    if principle == "balance":
        for x in g.arguments:
            att = sorted(sigma[y] for y in g.attackers(x))
            supp = sorted(sigma[y] for y in g.supporters(x))
            if len(att) == len(supp) and all(abs(a - s) <= CHECK_TOL for a, s in zip(att, supp)):
                if abs(sigma[x] - g.base_scores[x]) > CHECK_TOL:
                    return {"principle": principle, "argument": x, "sigma": sigma[x], "tau": g.base_scores[x]}
        return None

    if principle == "directionality":
        for edge in sorted(g.edges()):
            y, z = edge
            reach = reachable_from(g, {z}) | {z}
            attacks = g.attacks - {edge}
            supports = g.supports - {edge}
            smaller = QBAG(g.arguments, g.base_scores, frozenset(attacks), frozenset(supports))
            sigma2 = _strengths_or_raise(smaller, spec)
            for x in g.arguments:
                if x in reach:
                    continue
                if abs(sigma[x] - sigma2[x]) > CHECK_TOL:
                    return {"principle": principle, "edge": edge, "argument": x,
                            "with_edge": sigma[x], "without_edge": sigma2[x]}
        return None

    if principle == "strong_directionality":
        rng = np.random.default_rng(rng_seed)
        par = parents_map(g)
        for x in g.arguments:
            ancestors: set[str] = set()
            frontier = set(par[x])
            while frontier:
                ancestors |= frontier
                frontier = {p for a in frontier for p in par[a]} - ancestors
            removable = sorted(set(g.arguments) - ancestors - {x})
            if not removable:
                continue
            candidates = [removable]
            for _ in range(3):
                take = [a for a in removable if rng.random() < 0.5]
                if take:
                    candidates.append(take)
            for sub in candidates:
                kept = set(g.arguments) - set(sub)
                sigma2 = _strengths_or_raise(restrict(g, kept), spec)
                if abs(sigma[x] - sigma2[x]) > CHECK_TOL:
                    return {"principle": principle, "argument": x, "removed": sub,
                            "full": sigma[x], "restricted": sigma2[x]}
        return None

    # weak_monotonicity
    for x in g.arguments:
        ax, sx = g.attackers(x), g.supporters(x)
        for y in g.arguments:
            if x == y:
                continue
            if not (ax >= g.attackers(y) and sx <= g.supporters(y)):
                continue
            if g.base_scores[x] <= g.base_scores[y] and sigma[x] > sigma[y] + CHECK_TOL:
                return {"principle": principle, "condition": 1, "x": x, "y": y,
                        "sigma_x": sigma[x], "sigma_y": sigma[y]}
            if sigma[y] < sigma[x] - CHECK_TOL and not g.base_scores[y] < g.base_scores[x]:
                return {"principle": principle, "condition": 2, "x": x, "y": y,
                        "sigma_x": sigma[x], "sigma_y": sigma[y]}
    return None
