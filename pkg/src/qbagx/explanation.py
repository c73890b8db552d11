"""Desired orderings, strength changes, and explanation checks.

A desired ordering is a total preorder over a set of topic arguments,
represented as tiers listed weakest first. A strength change is a partial
reassignment of base scores (each entry must differ from the current
score); it explains the ordering when, restricted to the mutable set, its
application makes the graph's final strengths realize the ordering.

Two satisfaction modes exist. "exact" demands that the induced
final-strength preorder on the topic set equals the tier preorder (strict
inequality across tiers, equality within a tier). "weak" demands only that
no argument in a lower tier ends up strictly stronger than one in a higher
tier, which is the zero-of-the-ReLU-cost criterion the search targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    BudgetError,
    GraphFormatError,
    InvalidChangeError,
    UndefinedStrengthError,
    UnknownArgumentError,
)
from .graph import QBAG
from .semantics import SemanticsSpec, final_strengths


@dataclass(frozen=True)
class DesiredOrdering:
    """Tiers of argument ids, weakest tier first."""

    tiers: tuple[frozenset[str], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for tier in self.tiers:
            if not tier:
                raise GraphFormatError("ordering tiers must be non-empty")
            if seen & tier:
                raise GraphFormatError(f"argument(s) in multiple tiers: {sorted(seen & tier)}")
            seen |= tier

    @property
    def topic_set(self) -> frozenset[str]:
        return frozenset(x for tier in self.tiers for x in tier)

    def tier_of(self) -> dict[str, int]:
        return {x: i for i, tier in enumerate(self.tiers) for x in tier}

    def as_pairs(self) -> set[tuple[str, str]]:
        """The preorder: (x, y) iff tier(x) <= tier(y)."""
        rank = self.tier_of()
        topics = sorted(self.topic_set)
        return {(x, y) for x in topics for y in topics if rank[x] <= rank[y]}

    def to_json(self) -> str:
        return json.dumps({"tiers": [sorted(t) for t in self.tiers]}, separators=(",", ":"))


def ordering_from_tiers(tiers) -> DesiredOrdering:
    return DesiredOrdering(tuple(frozenset(map(str, tier)) for tier in tiers))


def ordering_from_json(data: str | bytes) -> DesiredOrdering:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid ordering JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"tiers"} or not isinstance(doc["tiers"], list):
        raise GraphFormatError('ordering document must be {"tiers": [[...], ...]}')
    return ordering_from_tiers(doc["tiers"])


def ordering_from_spec(text: str) -> DesiredOrdering:
    """Parse strongest-first command-line notation, e.g. "c>b" or "a=b>c"."""
    tiers_strongest_first = []
    for part in text.split(">"):
        tier = [x.strip() for x in part.split("=")]
        if any(not x for x in tier):
            raise GraphFormatError(f"bad ordering spec: {text!r}")
        tiers_strongest_first.append(tier)
    return ordering_from_tiers(reversed(tiers_strongest_first))


def ordering_to_spec(ordering: DesiredOrdering) -> str:
    return ">".join("=".join(sorted(t)) for t in reversed(ordering.tiers))


@dataclass(frozen=True)
class StrengthChange:
    """Partial map argument id -> new base score."""

    entries: dict[str, float] = field(default_factory=dict)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self.entries)

    def sorted_items(self) -> list[tuple[str, float]]:
        return sorted(self.entries.items())

    def __bool__(self) -> bool:
        return bool(self.entries)

    def to_json(self) -> str:
        return json.dumps({"changes": dict(self.sorted_items())}, separators=(",", ":"))


EMPTY_CHANGE = StrengthChange({})


def change_from_json(data: str | bytes) -> StrengthChange:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid strength change JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"changes"} or not isinstance(doc["changes"], dict):
        raise GraphFormatError('strength change document must be {"changes": {...}}')
    return StrengthChange({str(k): float(v) for k, v in doc["changes"].items()})


@dataclass(frozen=True)
class ExplanationQuery:
    """A graph, a semantics, the mutable argument set, and a target ordering."""

    graph: QBAG
    semantics: SemanticsSpec
    mutable: frozenset[str]
    ordering: DesiredOrdering

    def __post_init__(self):
        object.__setattr__(self, "mutable", frozenset(self.mutable))
        missing = (self.mutable | self.ordering.topic_set) - set(self.graph.arguments)
        if missing:
            raise UnknownArgumentError(f"query names unknown arguments: {sorted(missing)}")


def _topic_strengths(g: QBAG, spec: SemanticsSpec, topics) -> dict[str, float]:
    sigma = final_strengths(g, spec)
    out = {}
    for x in topics:
        if x not in sigma:
            raise UnknownArgumentError(f"unknown argument id: {x!r}")
        if sigma[x] is None:
            raise UndefinedStrengthError(f"final strength of {x!r} is undefined")
        out[x] = sigma[x]
    return out


def induced_ordering(g: QBAG, spec: SemanticsSpec, topics) -> set[tuple[str, str]]:
    """The final-strength preorder on `topics`: all (x, y) with sigma(x) <= sigma(y)."""
    topics = sorted(set(topics))
    sigma = _topic_strengths(g, spec, topics)
    return {(x, y) for x in topics for y in topics if sigma[x] <= sigma[y]}


def satisfies(
    g: QBAG,
    spec: SemanticsSpec,
    ordering: DesiredOrdering,
    mode: str = "exact",
    tolerance: float = 0.0,
) -> bool:
    """Does the graph's final-strength ordering realize the desired one?

    exact: the induced preorder on the topic set equals the tier preorder
    (tolerance widens what counts as a tie; the default 0.0 compares the
    computed strengths directly). weak: ties across tiers are allowed.
    """
    sigma = _topic_strengths(g, spec, ordering.topic_set)
    rank = ordering.tier_of()
    topics = sorted(sigma)
    if mode == "weak":
        return all(
            sigma[x] <= sigma[y]
            for x in topics
            for y in topics
            if rank[x] < rank[y]
        )
    if mode != "exact":
        raise ValueError(f"unknown satisfaction mode: {mode!r}")
    for x in topics:
        for y in topics:
            holds = sigma[x] <= sigma[y] + tolerance
            if (rank[x] <= rank[y]) != holds:
                return False
    return True


def validate_change(g: QBAG, change: StrengthChange, domain=None) -> None:
    for x, v in change.sorted_items():
        if x not in g.base_scores:
            raise UnknownArgumentError(f"strength change names unknown argument: {x!r}")
        if v == g.base_scores[x]:
            raise InvalidChangeError(f"entry for {x!r} equals its current base score ({v})")
        if domain is not None and not domain.contains(v):
            raise InvalidChangeError(f"entry for {x!r} ({v}) outside [{domain.lower}, {domain.upper}]")


def apply_change(g: QBAG, change: StrengthChange, domain=None) -> QBAG:
    """New graph with base scores replaced on the change's domain.

    Entries equal to the current score are rejected rather than dropped;
    callers that synthesize changes filter such entries out first.
    """
    validate_change(g, change, domain)
    scores = dict(g.base_scores)
    scores.update(change.entries)
    return QBAG(g.arguments, {a: scores[a] for a in g.arguments}, g.attacks, g.supports)


def amount_of_change(g: QBAG, change: StrengthChange) -> float:
    """L1 distance between old and new base scores over the changed arguments."""
    return sum(abs(v - g.base_scores[x]) for x, v in change.sorted_items())


def is_explanation(
    query: ExplanationQuery,
    change: StrengthChange,
    mode: str = "exact",
    tolerance: float = 0.0,
) -> bool:
    """True iff the change stays within the mutable set and its application
    satisfies the desired ordering."""
    if not change.domain <= query.mutable:
        return False
    updated = apply_change(query.graph, change, query.semantics.domain)
    return satisfies(updated, query.semantics, query.ordering, mode, tolerance)


def is_epsilon_approximate(
    query: ExplanationQuery,
    change: StrengthChange,
    epsilon: float,
    grid=None,
    mode: str = "weak",
) -> str:
    """Can any explanation beat this one by more than epsilon?

    Returns "no" when the brute-force oracle finds a strictly better
    witness, "yes" when it can certify none exists, and "unknown" when its
    budget or grid resolution cannot settle the question.
    """
    from .oracle import GridSpec, certify_epsilon  # local import breaks the module cycle

    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not is_explanation(query, change, mode):
        raise InvalidChangeError("change is not an explanation for the query")
    if grid is None:
        grid = GridSpec()
    try:
        return certify_epsilon(query, change, epsilon, grid, mode)
    except BudgetError:
        return "unknown"
