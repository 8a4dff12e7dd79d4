import json

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from lodestar.cluster import ClusterAssignment, assign_to_nearest, cluster_blocks
from lodestar.errors import InsufficientBlocks
from lodestar.mining import select_representative
from lodestar.vectors import TermVector


def planted_vectors(rng, n_per_group=10, dims=9, spread=0.01):
    """Three well-separated groups; inter-centroid distance >= 10x spread."""
    centers = np.eye(3).repeat(3, axis=1)  # orthogonal unit-ish centroids
    vectors, labels = [], {}
    for group in range(3):
        for i in range(n_per_group):
            noise = rng.normal(0, spread, dims)
            block_id = f"g{group}-{i:02d}"
            vectors.append(TermVector(block_id, np.abs(centers[group] + noise)))
            labels[block_id] = group
    return vectors, labels


def test_planted_three_clusters_recovered_exactly():
    rng = np.random.default_rng(7)
    vectors, truth = planted_vectors(rng)
    assignment = cluster_blocks(vectors, k=3, seed=11)
    ids = sorted(truth)
    ari = adjusted_rand_score(
        [truth[i] for i in ids], [assignment.labels[i] for i in ids]
    )
    assert ari == 1.0


def test_rerun_is_byte_identical():
    rng = np.random.default_rng(7)
    vectors, _ = planted_vectors(rng)
    a = cluster_blocks(vectors, k=3, seed=11)
    b = cluster_blocks(vectors, k=3, seed=11)
    assert json.dumps(a.labels, sort_keys=True) == json.dumps(b.labels, sort_keys=True)
    assert np.array_equal(a.centroids, b.centroids)
    assert a.inertia == b.inertia


def test_k_equals_n_distinct_gives_singletons_and_zero_inertia():
    vectors = [
        TermVector(f"b{i}", np.array([float(i), 1.0 - i / 10])) for i in range(6)
    ]
    assignment = cluster_blocks(vectors, k=6, seed=0)
    assert sorted(assignment.labels.values()) == list(range(6))
    assert assignment.inertia == 0.0


def test_identical_vectors_single_cluster():
    vectors = [TermVector(f"b{i}", np.array([0.5, 0.5])) for i in range(10)]
    assignment = cluster_blocks(vectors, k=1, seed=3)
    assert set(assignment.labels.values()) == {0}
    assert np.allclose(assignment.centroids[0], [0.5, 0.5])
    assert assignment.inertia == 0.0


def test_no_empty_clusters_with_duplicates():
    vectors = [TermVector(f"b{i}", np.array([1.0, 0.0])) for i in range(5)]
    assignment = cluster_blocks(vectors, k=2, seed=1)
    counts = {label: 0 for label in range(2)}
    for label in assignment.labels.values():
        counts[label] += 1
    assert all(count > 0 for count in counts.values())


def test_insufficient_blocks():
    vectors = [TermVector("b0", np.array([1.0])), TermVector("z", np.zeros(1))]
    with pytest.raises(InsufficientBlocks):
        cluster_blocks(vectors, k=2, seed=0)  # only one non-zero vector


def test_zero_vectors_excluded_from_labels():
    vectors = [
        TermVector("real", np.array([1.0, 0.0])),
        TermVector("empty", np.zeros(2)),
    ]
    assignment = cluster_blocks(vectors, k=1, seed=0)
    assert "empty" not in assignment.labels
    assert assignment.labels == {"real": 0}


def test_assign_to_nearest():
    assignment = ClusterAssignment(
        k=2,
        labels={"a": 0, "b": 1},
        centroids=np.array([[1.0, 0.0], [0.0, 1.0]]),
        inertia=0.0,
    )
    new = [
        TermVector("x", np.array([0.9, 0.1])),
        TermVector("y", np.array([0.2, 0.8])),
        TermVector("z", np.zeros(2)),
    ]
    assert assign_to_nearest(new, assignment) == {"x": 0, "y": 1}


# -- representative selection --------------------------------------------


def test_singleton_cluster_representative():
    assert select_representative([("only", 4, "x")]) == "only"


def test_odd_cluster_takes_median():
    members = [("a", 3, ""), ("b", 5, ""), ("c", 9, "")]
    assert select_representative(members) == "b"


def test_even_cluster_takes_lower_median():
    members = [("a", 2, ""), ("b", 4, ""), ("c", 6, ""), ("d", 8, "")]
    assert select_representative(members) == "b"


def test_line_count_ties_break_lexicographically():
    members = [("zz", 3, ""), ("aa", 3, ""), ("mm", 3, "")]
    assert select_representative(members) == "mm"  # median of (aa, mm, zz)
