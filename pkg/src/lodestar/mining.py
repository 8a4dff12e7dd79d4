"""Mine a notebook corpus into clustered blocks and block sequences.

Pipeline: keep documents that use the configured data-science libraries,
extract one block per code cell (API calls resolved with a document-wide
alias context), vectorize, cluster, pick a representative block per
cluster, and read each document back off as an ordered sequence of cluster
states. The sequences feed the recommendation-graph builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .apicalls import AliasContext, extract_api_calls, imported_roots, root_module
from .cluster import ClusterAssignment, assign_to_nearest, cluster_blocks
from .errors import EmptyCorpus, InsufficientBlocks
from .notebooks import NotebookDocument
from .vectors import ApiCallVocab, TermVector, vectors_from_call_lists

DEFAULT_LIBRARIES = frozenset(
    {
        "pandas",
        "numpy",
        "sklearn",
        "scipy",
        "matplotlib",
        "seaborn",
        "statsmodels",
        "tensorflow",
        "torch",
    }
)


@dataclass(frozen=True)
class MiningConfig:
    libraries: frozenset[str] = DEFAULT_LIBRARIES
    k: int = 200
    seed: int = 0
    min_cells: int = 1


@dataclass(frozen=True)
class BlockSequence:
    """Ordered steps observed in one source notebook.

    Steps are cluster state ids for mined corpora and catalog block ids for
    hand-authored advisor sequences.
    """

    source_id: str
    steps: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.steps)


def block_id_for(doc: NotebookDocument, cell_index: int) -> str:
    return f"{doc.source_id}:{cell_index:04d}"


def cluster_state_id(label: int) -> str:
    return f"cluster-{label:03d}"


def count_code_lines(text: str) -> int:
    return sum(1 for line in text.splitlines() if line.strip())


def _doc_call_lists(doc: NotebookDocument) -> list[list[str]]:
    """Per-cell API calls, resolving aliases accumulated across the document."""
    ctx = AliasContext()
    return [extract_api_calls(cell.source, context=ctx) for cell in doc.cells]


def filter_corpus(
    docs: list[NotebookDocument], libraries: frozenset[str] | set[str] = DEFAULT_LIBRARIES
) -> list[NotebookDocument]:
    """Keep documents that import a listed library and call into one."""
    if not libraries:
        raise ValueError("libraries must be non-empty")
    kept = []
    for doc in docs:
        roots: set[str] = set()
        for cell in doc.cells:
            roots |= imported_roots(cell.source)
        if not roots & libraries:
            continue
        call_roots = {
            root_module(call)
            for calls in _doc_call_lists(doc)
            for call in calls
        }
        if call_roots & libraries:
            kept.append(doc)
    return kept


def select_representative(cluster_members: list[tuple[str, int, str]]) -> str:
    """The member whose line count is the (lower) median of its cluster.

    Ties on line count fall back to lexicographic block id, so the choice
    is deterministic.
    """
    if not cluster_members:
        raise ValueError("cluster must be non-empty")
    ordered = sorted(cluster_members, key=lambda m: (m[1], m[0]))
    return ordered[(len(ordered) - 1) // 2][0]


def _sequences_from_labels(
    docs: list[NotebookDocument], labels: dict[str, int]
) -> list[BlockSequence]:
    sequences = []
    for doc in sorted(docs, key=lambda d: d.source_id):
        steps = tuple(
            cluster_state_id(labels[block_id_for(doc, cell.index)])
            for cell in doc.cells
            if block_id_for(doc, cell.index) in labels
        )
        if steps:
            sequences.append(BlockSequence(source_id=doc.source_id, steps=steps))
    return sequences


def extract_sequences(
    docs: list[NotebookDocument], assignment: ClusterAssignment
) -> list[BlockSequence]:
    """One sequence of cluster states per document, in cell order.

    Cells that were not clustered (no API calls) are skipped; documents
    with no clustered cells are omitted.
    """
    return _sequences_from_labels(docs, assignment.labels)


def label_held_out(
    docs: list[NotebookDocument], vocab: ApiCallVocab, assignment: ClusterAssignment
) -> dict[str, int]:
    """Nearest-centroid labels for documents outside the training set."""
    block_ids, call_lists = _collect_blocks(docs)
    _, vectors = vectors_from_call_lists(block_ids, call_lists, vocab=vocab)
    return assign_to_nearest(vectors, assignment)


def held_out_sequences(
    docs: list[NotebookDocument], vocab: ApiCallVocab, assignment: ClusterAssignment
) -> list[BlockSequence]:
    return _sequences_from_labels(docs, label_held_out(docs, vocab, assignment))


def _collect_blocks(docs: list[NotebookDocument]) -> tuple[list[str], list[list[str]]]:
    block_ids: list[str] = []
    call_lists: list[list[str]] = []
    for doc in sorted(docs, key=lambda d: d.source_id):
        doc_calls = _doc_call_lists(doc)
        for cell, calls in zip(doc.cells, doc_calls):
            block_ids.append(block_id_for(doc, cell.index))
            call_lists.append(calls)
    return block_ids, call_lists


@dataclass
class MiningResult:
    config: MiningConfig
    docs: list[NotebookDocument]
    vocab: ApiCallVocab
    vectors: list[TermVector]
    assignment: ClusterAssignment
    sequences: list[BlockSequence]
    representatives: dict[int, str]
    block_sources: dict[str, str]
    skipped: list[tuple[str, str]] = field(default_factory=list)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def report(self) -> dict:
        """Mining report: vocabulary, cluster membership, representatives,
        sequences. Deterministic for a fixed (corpus, config, seed)."""
        clusters = []
        for label in range(self.assignment.k):
            members = self.assignment.members(label)
            rep = self.representatives[label]
            clusters.append(
                {
                    "state": cluster_state_id(label),
                    "size": len(members),
                    "members": members,
                    "representative": rep,
                    "representative_lines": count_code_lines(self.block_sources[rep]),
                    "representative_code": self.block_sources[rep],
                }
            )
        zero_call = sorted(v.block_id for v in self.vectors if not v.has_calls)
        return {
            "config": {
                "libraries": sorted(self.config.libraries),
                "k": self.config.k,
                "seed": self.config.seed,
                "min_cells": self.config.min_cells,
            },
            "stats": {
                "documents": len(self.docs),
                "blocks": len(self.vectors),
                "blocks_vectorized": sum(1 for v in self.vectors if v.has_calls),
                "vocabulary_size": len(self.vocab),
                "inertia": self.assignment.inertia,
            },
            "vocabulary": list(self.vocab.terms),
            "clusters": clusters,
            "sequences": [
                {"source_id": s.source_id, "steps": list(s.steps)} for s in self.sequences
            ],
            "zero_call_blocks": zero_call,
            "skipped": [{"source_id": sid, "reason": reason} for sid, reason in self.skipped],
            "diagnostics": self.diagnostics,
        }


def mine_corpus(
    docs: list[NotebookDocument],
    config: MiningConfig | None = None,
    skipped: list[tuple[str, str]] | None = None,
    k_scan: list[int] | None = None,
) -> MiningResult:
    """Run the full mining pipeline over parsed documents.

    ``k_scan`` optionally records inertia for alternative cluster counts so
    an operator can judge k; it does not change the primary assignment.
    """
    config = config or MiningConfig()
    docs = [d for d in docs if len(d.cells) >= config.min_cells]
    docs = filter_corpus(docs, config.libraries)
    docs = sorted(docs, key=lambda d: d.source_id)
    if not docs:
        raise EmptyCorpus("no documents survived filtering")

    block_ids, call_lists = _collect_blocks(docs)
    vocab, vectors = vectors_from_call_lists(block_ids, call_lists)
    assignment = cluster_blocks(vectors, k=config.k, seed=config.seed)
    sequences = extract_sequences(docs, assignment)

    block_sources = {}
    for doc in docs:
        for cell in doc.cells:
            block_sources[block_id_for(doc, cell.index)] = cell.source

    representatives = {}
    for label in range(assignment.k):
        members = [
            (bid, count_code_lines(block_sources[bid]), block_sources[bid])
            for bid in assignment.members(label)
        ]
        representatives[label] = select_representative(members)

    diagnostics: dict[str, float] = {}
    for candidate in k_scan or []:
        try:
            diagnostics[f"inertia_k={candidate}"] = cluster_blocks(
                vectors, k=candidate, seed=config.seed
            ).inertia
        except InsufficientBlocks:
            continue

    return MiningResult(
        config=config,
        docs=docs,
        vocab=vocab,
        vectors=vectors,
        assignment=assignment,
        sequences=sequences,
        representatives=representatives,
        block_sources=block_sources,
        skipped=skipped or [],
        diagnostics=diagnostics,
    )
