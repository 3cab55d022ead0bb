"""K-means with D^2 seeding, used both standalone and on spectral embeddings."""

from __future__ import annotations

import logging

import numpy as np

from .partition import Partition
from .validation import as_float_matrix, check_cluster_count

logger = logging.getLogger(__name__)


def _sq_dists(points, centers):
    # (n, k) squared Euclidean distances, clipped so roundoff never goes negative
    d = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(d, 0.0)


def kmeanspp_seed(points, n_clusters, seed=0):
    """D^2-weighted seeding: first center uniform, the rest proportional to
    squared distance to the nearest chosen center.  When the remaining
    distance mass is zero (duplicate points), remaining centers duplicate the
    first chosen point, with a warning."""
    points = as_float_matrix(points, "points")
    n = points.shape[0]
    n_clusters = check_cluster_count(n_clusters, n, "n_clusters")
    rng = np.random.default_rng(seed)
    centers = np.empty((n_clusters, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = _sq_dists(points, centers[:1]).ravel()
    for k in range(1, n_clusters):
        total = d2.sum()
        if total <= 0.0:
            logger.warning(
                "kmeans++ ran out of distinct points at center %d/%d; duplicating",
                k,
                n_clusters,
            )
            centers[k:] = centers[0]
            break
        probs = d2 / total
        choice = int(rng.choice(n, p=probs))
        centers[k] = points[choice]
        d2 = np.minimum(d2, _sq_dists(points, centers[k : k + 1]).ravel())
    return centers


def _assign(points, centers):
    # nearest centroid, ties resolved to the lowest centroid index by argmin
    return np.argmin(_sq_dists(points, centers), axis=1)


def _objective(points, centers, assign):
    diff = points - centers[assign]
    return float(np.einsum("ij,ij->", diff, diff))


def lloyd(points, init_centers, max_iter=100, tol=1e-6, return_history=False):
    """Lloyd iterations from explicit initial centers.

    Empty clusters are re-seeded each round with the point farthest from its
    own centroid.  The within-cluster squared-distance objective is
    non-increasing across iterations (asserted).  Stops when the objective
    improvement falls below tol or after max_iter rounds.
    """
    points = as_float_matrix(points, "points")
    centers = np.array(init_centers, dtype=np.float64, copy=True)
    n_clusters = centers.shape[0]
    history = []
    assign = _assign(points, centers)
    prev_obj = np.inf
    for _ in range(max_iter):
        # re-seed empty clusters before the update step
        sizes = np.bincount(assign, minlength=n_clusters)
        if np.any(sizes == 0):
            dist = np.linalg.norm(points - centers[assign], axis=1)
            order = np.argsort(-dist, kind="stable")
            taken = set()
            for k in np.flatnonzero(sizes == 0):
                pick = next(int(i) for i in order if int(i) not in taken)
                taken.add(pick)
                centers[k] = points[pick]
            assign = _assign(points, centers)
            sizes = np.bincount(assign, minlength=n_clusters)
        for k in range(n_clusters):
            if sizes[k] > 0:
                centers[k] = points[assign == k].mean(axis=0)
        new_assign = _assign(points, centers)
        obj = _objective(points, centers, new_assign)
        history.append(obj)
        assert obj <= prev_obj + 1e-9 * max(1.0, abs(obj)), "objective increased"
        moved = prev_obj - obj
        assign = new_assign
        if moved <= tol:
            prev_obj = obj
            break
        prev_obj = obj
    part = Partition(assign, n_clusters)
    if return_history:
        return part, history
    return part


def kmeans(points, n_clusters, restarts=10, max_iter=100, tol=1e-6, seed=0):
    """Best-of-restarts K-means; returns the Partition with the lowest objective."""
    points = as_float_matrix(points, "points")
    n_clusters = check_cluster_count(n_clusters, points.shape[0], "n_clusters")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best_part = None
    best_obj = np.inf
    for r in range(restarts):
        centers = kmeanspp_seed(points, n_clusters, seed=[seed, r])
        part = lloyd(points, centers, max_iter=max_iter, tol=tol)
        obj = _partition_objective(points, part)
        if obj < best_obj:
            best_obj = obj
            best_part = part
    return best_part


def _partition_objective(points, part):
    centers = np.zeros((part.n_clusters, points.shape[1]))
    for k in range(part.n_clusters):
        members = part.members(k)
        if members.size:
            centers[k] = points[members].mean(axis=0)
    return _objective(points, centers, part.assign)
