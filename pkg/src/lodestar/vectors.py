"""Term vectors over API-call vocabularies.

Each block becomes a vector of relative call frequencies: entry t is
count(t in block) / total calls in block, so every vector with at least one
call sums to 1. Blocks with no calls yield zero vectors and are excluded
from clustering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .apicalls import extract_api_calls


@dataclass(frozen=True)
class ApiCallVocab:
    """Lexicographically ordered universe of canonical API identifiers."""

    terms: tuple[str, ...]

    @property
    def index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class TermVector:
    block_id: str
    weights: np.ndarray

    @property
    def has_calls(self) -> bool:
        return bool(self.weights.sum() > 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermVector):
            return NotImplemented
        return self.block_id == other.block_id and np.array_equal(self.weights, other.weights)


def build_vocab(call_lists: list[list[str]]) -> ApiCallVocab:
    terms = sorted({call for calls in call_lists for call in calls})
    return ApiCallVocab(terms=tuple(terms))


def vectors_from_call_lists(
    block_ids: list[str],
    call_lists: list[list[str]],
    vocab: ApiCallVocab | None = None,
) -> tuple[ApiCallVocab, list[TermVector]]:
    """L1-normalized frequency vectors for pre-extracted call lists.

    Passing an existing ``vocab`` projects the blocks onto that vocabulary
    (unknown calls are dropped), which is how held-out blocks are vectorized
    against a trained model.
    """
    if vocab is None:
        vocab = build_vocab(call_lists)
    index = vocab.index
    vectors = []
    for block_id, calls in zip(block_ids, call_lists):
        weights = np.zeros(len(vocab), dtype=np.float64)
        known = [c for c in calls if c in index]
        for call in known:
            weights[index[call]] += 1.0
        if known:
            weights /= len(known)
        vectors.append(TermVector(block_id=block_id, weights=weights))
    return vocab, vectors


def build_term_vectors(blocks: list[tuple[str, str]]) -> tuple[ApiCallVocab, list[TermVector]]:
    """Vocabulary and term vector for each (block_id, cell_text) pair.

    Every block is treated as self-contained: aliases are resolved from the
    block's own text. The mining pipeline instead extracts calls with a
    document-wide alias context and uses vectors_from_call_lists directly.
    """
    if not blocks:
        raise ValueError("blocks must be non-empty")
    block_ids = [block_id for block_id, _ in blocks]
    call_lists = [extract_api_calls(text) for _, text in blocks]
    return vectors_from_call_lists(block_ids, call_lists)
