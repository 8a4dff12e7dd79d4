"""Markov-chain recommendation graphs.

States are analysis-step identifiers; an edge (i, j) carries the number of
times j directly followed i in the source sequences, and the transition
probability P(j|i) = count(i, j) / total outgoing count of i. Roots are the
first steps of the sequences, weighted by how often each opened one, and
seed the very first recommendation panel.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus, SchemaViolation, UnknownState
from .mining import BlockSequence

GRAPH_FILE_SUFFIX = ".recograph.json"


@dataclass(frozen=True)
class RecommendationGraph:
    advisor_id: str
    states: tuple[str, ...]
    counts: dict[tuple[str, str], int] = field(default_factory=dict)
    transitions: dict[tuple[str, str], float] = field(default_factory=dict)
    roots: tuple[tuple[str, float], ...] = ()

    def successors(self, state: str) -> list[tuple[str, float]]:
        return [(dst, p) for (src, dst), p in self.transitions.items() if src == state]

    def incoming_count(self, state: str) -> int:
        return sum(c for (_, dst), c in self.counts.items() if dst == state)

    def out_degree(self, state: str) -> int:
        """Number of distinct successors of a state."""
        return sum(1 for (src, _) in self.counts if src == state)


def build_graph(
    sequences: list[BlockSequence],
    advisor_id: str,
    out_degree_norm: str = "total",
) -> RecommendationGraph:
    """Count adjacent step pairs across sequences into a stochastic matrix.

    The default normalization divides each edge count by the state's total
    outgoing observations, which makes every non-absorbing row sum to 1.
    ``out_degree_norm="distinct"`` divides by the number of distinct
    successors instead; it is provided for comparison only and does not
    generally produce a stochastic matrix.
    """
    if not sequences:
        raise EmptyCorpus("cannot build a graph from zero sequences")
    if out_degree_norm not in ("total", "distinct"):
        raise ValueError(f"unknown normalization {out_degree_norm!r}")

    counts: Counter[tuple[str, str]] = Counter()
    root_counts: Counter[str] = Counter()
    states: set[str] = set()
    for seq in sequences:
        if not seq.steps:
            raise ValueError(f"sequence {seq.source_id!r} is empty")
        root_counts[seq.steps[0]] += 1
        states.update(seq.steps)
        for src, dst in zip(seq.steps, seq.steps[1:]):
            counts[(src, dst)] += 1

    row_totals: Counter[str] = Counter()
    for (src, _), c in counts.items():
        row_totals[src] += c
    distinct: Counter[str] = Counter(src for (src, _) in counts)

    transitions = {}
    for (src, dst), c in counts.items():
        denom = row_totals[src] if out_degree_norm == "total" else distinct[src]
        transitions[(src, dst)] = c / denom

    total_roots = sum(root_counts.values())
    roots = tuple(
        (state, n / total_roots) for state, n in sorted(root_counts.items())
    )
    return RecommendationGraph(
        advisor_id=advisor_id,
        states=tuple(sorted(states)),
        counts=dict(counts),
        transitions=transitions,
        roots=roots,
    )


def _ranked(items: list[tuple[str, float]], k: int) -> list[tuple[str, float]]:
    # highest probability first; equal probabilities in lexicographic order
    return sorted(items, key=lambda item: (-item[1], item[0]))[:k]


def top_k(graph: RecommendationGraph, state: str, k: int) -> list[tuple[str, float]]:
    """The k most probable successors of a state, best first.

    Absorbing states return an empty list; fewer than k entries come back
    when the state has fewer successors.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if state not in graph.states:
        raise UnknownState(f"{state!r} is not a state of advisor {graph.advisor_id!r}")
    return _ranked(graph.successors(state), k)


def bootstrap(graph: RecommendationGraph, k: int) -> list[tuple[str, float]]:
    """Top-k sequence-opening states, for the panel shown before any step."""
    if k <= 0:
        raise ValueError("k must be positive")
    return _ranked(list(graph.roots), k)


def serialize(graph: RecommendationGraph) -> bytes:
    edges = [
        [src, dst, graph.counts[(src, dst)], graph.transitions[(src, dst)]]
        for (src, dst) in sorted(graph.counts)
    ]
    doc = {
        "advisor_id": graph.advisor_id,
        "states": list(graph.states),
        "roots": [[state, weight] for state, weight in graph.roots],
        "edges": edges,
    }
    return json.dumps(doc, indent=1, sort_keys=True).encode("utf-8")


def deserialize(raw: bytes | str) -> RecommendationGraph:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"graph file is not JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("graph document must be a JSON object")
    for key in ("advisor_id", "states", "roots", "edges"):
        if key not in doc:
            raise SchemaViolation(f"graph document missing {key!r}")
    if not isinstance(doc["states"], list) or not all(
        isinstance(s, str) for s in doc["states"]
    ):
        raise SchemaViolation("states must be a list of strings")
    state_set = set(doc["states"])

    counts: dict[tuple[str, str], int] = {}
    transitions: dict[tuple[str, str], float] = {}
    for edge in doc["edges"]:
        if not (isinstance(edge, list) and len(edge) == 4):
            raise SchemaViolation(f"bad edge entry: {edge!r}")
        src, dst, count, prob = edge
        if src not in state_set or dst not in state_set:
            raise SchemaViolation(f"edge references unknown state: {edge!r}")
        if not isinstance(count, int) or count <= 0:
            raise SchemaViolation(f"edge count must be a positive integer: {edge!r}")
        if not isinstance(prob, (int, float)) or not 0.0 < prob <= 1.0:
            raise SchemaViolation(f"edge probability out of range: {edge!r}")
        counts[(src, dst)] = count
        transitions[(src, dst)] = float(prob)

    roots = []
    for entry in doc["roots"]:
        if not (isinstance(entry, list) and len(entry) == 2):
            raise SchemaViolation(f"bad root entry: {entry!r}")
        state, weight = entry
        if state not in state_set:
            raise SchemaViolation(f"root references unknown state: {state!r}")
        roots.append((state, float(weight)))

    return RecommendationGraph(
        advisor_id=str(doc["advisor_id"]),
        states=tuple(doc["states"]),
        counts=counts,
        transitions=transitions,
        roots=tuple(roots),
    )


def save_graph(graph: RecommendationGraph, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(graph))


def load_graph(path) -> RecommendationGraph:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
