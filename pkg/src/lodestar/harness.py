"""Mining, replay-evaluation, and serving workflows behind the CLI.

``mine`` turns a directory of notebook files into a mining report and a
recommendation-graph file. ``replay`` measures top-k hit rate: for every
adjacent step pair in the evaluation sequences, a hit means the actual next
step appeared among the k recommendations for the current step. The
reported random baseline is the hit rate a uniform guess over each queried
state's successors would achieve: the average of min(1, k / out-degree). A
held-out split happens at notebook granularity so no sequence straddles
train and test.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .cluster import cluster_blocks
from .errors import EmptyCorpus, SchemaViolation
from .graph import RecommendationGraph, build_graph, load_graph, save_graph, top_k
from .mining import (
    BlockSequence,
    MiningConfig,
    MiningResult,
    held_out_sequences,
    mine_corpus,
)
from .notebooks import read_corpus_dir


def load_mining_config(path: str | Path | None, **overrides) -> MiningConfig:
    doc = {}
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    merged = {
        "libraries": frozenset(doc.get("libraries", MiningConfig().libraries)),
        "k": doc.get("k", MiningConfig().k),
        "seed": doc.get("seed", MiningConfig().seed),
        "min_cells": doc.get("min_cells", MiningConfig().min_cells),
    }
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return MiningConfig(**merged)


@dataclass
class MineOutcome:
    result: MiningResult
    report: dict
    graph: RecommendationGraph
    held_out: list[BlockSequence]


def run_mine(
    corpus_dir: str | Path,
    config: MiningConfig,
    advisor_id: str = "crowd",
    k_scan: list[int] | None = None,
    holdout: float = 0.0,
) -> MineOutcome:
    """Mine a corpus directory into a report plus a recommendation graph.

    ``holdout`` reserves that fraction of notebooks (at least one, never
    all) for evaluation: their cells are labeled by nearest trained
    centroid and their sequences land in the report instead of the graph.
    """
    docs, skipped = read_corpus_dir(corpus_dir)
    if not docs:
        raise EmptyCorpus(f"no readable notebooks under {corpus_dir}")

    held_docs = []
    if holdout > 0.0:
        shuffled = sorted(docs, key=lambda d: d.source_id)
        random.Random(config.seed).shuffle(shuffled)
        n_held = max(1, min(len(shuffled) - 1, round(holdout * len(shuffled))))
        held_docs, docs = shuffled[:n_held], shuffled[n_held:]

    result = mine_corpus(docs, config, skipped=skipped, k_scan=k_scan)
    graph = build_graph(result.sequences, advisor_id=advisor_id)
    held_out = (
        held_out_sequences(held_docs, result.vocab, result.assignment) if held_docs else []
    )

    report = result.report()
    report["advisor_id"] = advisor_id
    if held_docs:
        report["held_out_sequences"] = [
            {"source_id": s.source_id, "steps": list(s.steps)} for s in held_out
        ]
    return MineOutcome(result=result, report=report, graph=graph, held_out=held_out)


def sequences_from_json(doc: dict, key: str = "sequences") -> list[BlockSequence]:
    entries = doc.get(key)
    if not isinstance(entries, list):
        raise SchemaViolation(f"sequences document has no {key!r} list")
    sequences = []
    for i, entry in enumerate(entries):
        if isinstance(entry, dict):
            source_id = str(entry.get("source_id", f"seq-{i}"))
            steps = entry.get("steps")
        else:
            source_id, steps = f"seq-{i}", entry
        if not isinstance(steps, list) or not steps:
            raise SchemaViolation(f"sequence {source_id!r} has no steps")
        sequences.append(BlockSequence(source_id=source_id, steps=tuple(str(s) for s in steps)))
    return sequences


def load_sequences_file(path: str | Path, key: str = "sequences") -> list[BlockSequence]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return sequences_from_json(doc, key=key)


def replay(
    graph: RecommendationGraph,
    sequences: list[BlockSequence],
    k: int,
    in_sample: bool = False,
) -> dict:
    """Top-k hit rate of a graph over evaluation sequences.

    Pairs whose current state is unknown to the graph count as misses and
    are reported separately; they contribute zero to the baseline as well.
    """
    pairs = hits = unknown = 0
    baseline_total = 0.0
    for seq in sequences:
        for src, dst in zip(seq.steps, seq.steps[1:]):
            pairs += 1
            if src not in graph.states:
                unknown += 1
                continue
            out_degree = graph.out_degree(src)
            if out_degree and k > 0:
                baseline_total += min(1.0, k / out_degree)
                recommended = {state for state, _ in top_k(graph, src, k)}
                if dst in recommended:
                    hits += 1
    return {
        "advisor_id": graph.advisor_id,
        "k": k,
        "sequences": len(sequences),
        "pairs": pairs,
        "hits": hits,
        "misses": pairs - hits,
        "unknown_state_pairs": unknown,
        "hit_rate": hits / pairs if pairs else 0.0,
        "random_baseline": baseline_total / pairs if pairs else 0.0,
        "in_sample": in_sample,
    }


def max_out_degree(graph: RecommendationGraph) -> int:
    return max((graph.out_degree(state) for state in graph.states), default=0)


def write_report(report: dict, path: str | Path | None) -> bytes:
    raw = (json.dumps(report, indent=1, sort_keys=True) + "\n").encode("utf-8")
    if path is not None:
        Path(path).write_bytes(raw)
    return raw


def load_graph_file(path: str | Path) -> RecommendationGraph:
    if not Path(path).is_file():
        raise SchemaViolation(f"graph file {path} does not exist")
    return load_graph(path)


__all__ = [
    "MineOutcome",
    "load_mining_config",
    "run_mine",
    "replay",
    "max_out_degree",
    "sequences_from_json",
    "load_sequences_file",
    "write_report",
    "load_graph_file",
    "save_graph",
    "build_graph",
    "cluster_blocks",
]
