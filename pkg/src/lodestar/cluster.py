"""K-means clustering of term vectors.

Plain Lloyd iterations with k-means++ seeding, written against numpy so the
exact policy is pinned: a fixed (vectors, k, seed) triple always produces
the identical assignment, iteration stops when the total centroid shift
drops below 1e-6 or after 100 rounds, and an empty cluster is repaired by
handing it the point farthest from its current centroid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientBlocks
from .vectors import TermVector

MAX_ITER = 100
SHIFT_TOL = 1e-6


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: dict[str, int]
    centroids: np.ndarray
    inertia: float

    def members(self, label: int) -> list[str]:
        return sorted(bid for bid, lab in self.labels.items() if lab == label)


def _kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[rng.integers(n)]
    for i in range(1, k):
        dist_sq = np.min(
            ((X[:, None, :] - centroids[None, :i, :]) ** 2).sum(axis=2), axis=1
        )
        total = dist_sq.sum()
        if total <= 0.0:
            # every point already coincides with a centroid (duplicates)
            centroids[i] = X[rng.integers(n)]
        else:
            centroids[i] = X[rng.choice(n, p=dist_sq / total)]
    return centroids


def _repair_empty(labels: np.ndarray, dists: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the point farthest from its own centroid.

    Only points from clusters with at least two members may move, so the
    repair never empties another cluster.
    """
    for j in range(k):
        if np.any(labels == j):
            continue
        counts = np.bincount(labels, minlength=k)
        movable = counts[labels] >= 2
        if not movable.any():
            continue
        point_dist = dists[np.arange(len(labels)), labels]
        point_dist = np.where(movable, point_dist, -np.inf)
        labels[int(np.argmax(point_dist))] = j
    return labels


def cluster_blocks(vectors: list[TermVector], k: int, seed: int) -> ClusterAssignment:
    """Cluster the non-zero term vectors into k groups.

    Zero vectors (blocks with no API calls) are skipped; every remaining
    block gets exactly one label and no cluster ends up empty.
    """
    usable = [v for v in vectors if v.has_calls]
    if k <= 0:
        raise ValueError("k must be positive")
    if k > len(usable):
        raise InsufficientBlocks(k, len(usable))

    X = np.stack([v.weights for v in usable])
    rng = np.random.default_rng(seed)
    centroids = _kmeans_plusplus(X, k, rng)

    labels = np.zeros(len(usable), dtype=np.int64)
    for _ in range(MAX_ITER):
        dists = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(dists, axis=1)
        labels = _repair_empty(labels, dists, k)
        new_centroids = centroids.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centroids[j] = X[mask].mean(axis=0)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum()))
        centroids = new_centroids
        if shift < SHIFT_TOL:
            break

    final_dists = ((X - centroids[labels]) ** 2).sum(axis=1)
    return ClusterAssignment(
        k=k,
        labels={v.block_id: int(lab) for v, lab in zip(usable, labels)},
        centroids=centroids,
        inertia=float(final_dists.sum()),
    )


def assign_to_nearest(vectors: list[TermVector], assignment: ClusterAssignment) -> dict[str, int]:
    """Label new non-zero vectors by their nearest trained centroid."""
    labels: dict[str, int] = {}
    for vector in vectors:
        if not vector.has_calls:
            continue
        dists = ((assignment.centroids - vector.weights) ** 2).sum(axis=1)
        labels[vector.block_id] = int(np.argmin(dists))
    return labels
