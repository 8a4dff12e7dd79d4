import numpy as np
import pytest
from hypothesis import given, strategies as st

from lodestar.vectors import build_term_vectors, build_vocab, vectors_from_call_lists


def test_single_call_full_weight():
    vocab, vectors = build_term_vectors(
        [("b1", 'import pandas as pd\npd.read_csv("x")')]
    )
    assert vocab.terms == ("pandas.read_csv",)
    assert vectors[0].weights.tolist() == [1.0]


def test_frequency_normalization_two_thirds_one_third():
    vocab, vectors = vectors_from_call_lists(["b"], [["a", "a", "b"]])
    assert vocab.terms == ("a", "b")
    assert vectors[0].weights.tolist() == [2 / 3, 1 / 3]


def test_three_block_fixture_matches_hand_count():
    # counts per block: b1 {read_csv:1}, b2 {.head:2, .info:1}, b3 {.head:1}
    blocks = [
        ("b1", 'import pandas as pd\npd.read_csv("x")'),
        ("b2", "df.head()\ndf.head()\ndf.info()"),
        ("b3", "df.head()"),
    ]
    vocab, vectors = build_term_vectors(blocks)
    assert vocab.terms == (".head", ".info", "pandas.read_csv")
    expected = {
        "b1": [0.0, 0.0, 1.0],
        "b2": [2 / 3, 1 / 3, 0.0],
        "b3": [1.0, 0.0, 0.0],
    }
    for vector in vectors:
        assert vector.weights.tolist() == expected[vector.block_id]


def test_zero_call_block_flagged():
    _, vectors = build_term_vectors([("empty", "# nothing here"), ("b", "f(x)")])
    by_id = {v.block_id: v for v in vectors}
    assert not by_id["empty"].has_calls
    assert by_id["empty"].weights.sum() == 0.0
    assert by_id["b"].has_calls


def test_empty_blocks_rejected():
    with pytest.raises(ValueError):
        build_term_vectors([])


def test_vocab_is_lexicographic_union():
    vocab = build_vocab([["z", "a"], ["m", "a"]])
    assert vocab.terms == ("a", "m", "z")
    assert vocab.index == {"a": 0, "m": 1, "z": 2}


def test_projection_onto_existing_vocab_drops_unknown_terms():
    vocab = build_vocab([["a", "b"]])
    _, vectors = vectors_from_call_lists(["x"], [["a", "zzz", "a"]], vocab=vocab)
    assert vectors[0].weights.tolist() == [1.0, 0.0]


@given(
    st.lists(
        st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=12),
        min_size=1,
        max_size=8,
    )
)
def test_nonzero_vectors_sum_to_one(call_lists):
    ids = [f"b{i}" for i in range(len(call_lists))]
    _, vectors = vectors_from_call_lists(ids, call_lists)
    for vector in vectors:
        assert vector.weights.min() >= 0
        assert abs(vector.weights.sum() - 1.0) < 1e-9


def test_determinism_of_vectorization():
    blocks = [("b", "df.head()\ndf.info()"), ("c", "f(1)")]
    first = build_term_vectors(blocks)
    second = build_term_vectors(blocks)
    assert first[0] == second[0]
    assert all(np.array_equal(a.weights, b.weights) for a, b in zip(first[1], second[1]))
