"""Cluster partitions as dense assignment vectors, with repair utilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Assignment of n samples to clusters 0..n_clusters-1."""

    assign: np.ndarray
    n_clusters: int

    def __post_init__(self):
        assign = np.asarray(self.assign, dtype=np.int64)
        object.__setattr__(self, "assign", assign)
        if assign.ndim != 1:
            raise ValueError("assign must be 1-d")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if assign.size and (assign.min() < 0 or assign.max() >= self.n_clusters):
            raise ValueError(
                f"assignments must lie in [0, {self.n_clusters}), "
                f"got range [{assign.min()}, {assign.max()}]"
            )

    @property
    def n(self):
        return self.assign.shape[0]

    def sizes(self):
        return np.bincount(self.assign, minlength=self.n_clusters)

    def members(self, k):
        return np.flatnonzero(self.assign == k)

    def is_complete(self):
        """True when every cluster has at least one member."""
        return bool(self.sizes().min() > 0)

    def to_indicator(self):
        """One-hot n x n_clusters matrix with exactly one 1 per row."""
        ind = np.zeros((self.n, self.n_clusters), dtype=np.float64)
        ind[np.arange(self.n), self.assign] = 1.0
        return ind

    @staticmethod
    def from_indicator(ind):
        ind = np.asarray(ind, dtype=np.float64)
        if ind.ndim != 2:
            raise ValueError("indicator must be 2-d")
        row_sums = ind.sum(axis=1)
        if not np.all(row_sums == 1.0) or not np.all((ind == 0.0) | (ind == 1.0)):
            raise ValueError("indicator rows must be one-hot")
        return Partition(np.argmax(ind, axis=1), ind.shape[1])


def repair_empty(assign, n_clusters, points):
    """Fill empty clusters by moving, per empty cluster, the point farthest
    from its current cluster's centroid (ties broken by lowest point index;
    donor clusters always keep at least one member).

    Returns (assign, moved_count).  Deterministic.
    """
    assign = np.asarray(assign, dtype=np.int64).copy()
    points = np.asarray(points, dtype=np.float64)
    n = assign.shape[0]
    if n < n_clusters:
        raise ValueError(f"cannot fill {n_clusters} clusters with {n} points")
    moved = 0
    sizes = np.bincount(assign, minlength=n_clusters)
    while True:
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            break
        target = int(empty[0])
        centroids = np.zeros((n_clusters, points.shape[1]))
        for k in range(n_clusters):
            if sizes[k] > 0:
                centroids[k] = points[assign == k].mean(axis=0)
        dist = np.linalg.norm(points - centroids[assign], axis=1)
        dist[sizes[assign] <= 1] = -np.inf  # never empty a donor
        far = int(np.argmax(dist))
        sizes[assign[far]] -= 1
        assign[far] = target
        sizes[target] += 1
        moved += 1
    return assign, moved


def random_partition(n, n_clusters, rng, points=None):
    """Uniform random assignment; empty clusters repaired when points given."""
    assign = rng.integers(0, n_clusters, size=n)
    if points is not None:
        assign, _ = repair_empty(assign, n_clusters, points)
    return Partition(assign, n_clusters)
