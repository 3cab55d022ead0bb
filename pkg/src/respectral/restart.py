"""Restarted spectral clustering with K-means discretization.

Each cycle treats the current partition as a self-guide: every cluster
becomes a block, each block's compressed normalized kernel contributes its
leading eigenvector as one column of an embedding with disjoint supports,
K-means on the embedding proposes the next partition, and the loop stops
once consecutive embeddings span nearly the same subspace.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from . import metrics as _metrics
from .blocks import block_top_eigpair, build_block_factors
from .kmeans import kmeans
from .partition import Partition, random_partition, repair_empty
from .validation import as_float_matrix, check_cluster_count

logger = logging.getLogger(__name__)


def assemble_embedding(blocks, n):
    """Stack per-block leading eigenvectors into an n x c matrix.

    Column j carries block j's eigenvector on its member rows and zeros
    elsewhere, so columns have disjoint supports and the result has exactly
    orthonormal columns.  Returns (embedding, eigenvalues).
    """
    c = len(blocks)
    emb = np.zeros((n, c))
    vals = np.zeros(c)
    seen = np.zeros(n, dtype=bool)
    for j, b in enumerate(blocks):
        if np.any(seen[b.member_rows]):
            raise RuntimeError("blocks overlap: member_rows are not disjoint")
        seen[b.member_rows] = True
        val, vec = block_top_eigpair(b)
        emb[b.member_rows, j] = vec
        vals[j] = val
    return emb, vals


def subspace_distance(prev, cur):
    """Frobenius distance ||prev - cur (cur^T prev)||_F between the spans of
    two column-orthonormal matrices; 0 iff equal span, sqrt(c) when orthogonal."""
    prev = np.asarray(prev, dtype=np.float64)
    cur = np.asarray(cur, dtype=np.float64)
    return float(np.linalg.norm(prev - cur @ (cur.T @ prev)))


def reclassify(proposal, coords):
    """Adopt a proposed partition as the next self-guide, repairing empty
    clusters.  Only index views change; the sample matrix is never reordered."""
    assign, moved = repair_empty(proposal.assign, proposal.n_clusters, coords)
    return Partition(assign, proposal.n_clusters), moved


def run_restarted_kmeans(
    samples,
    n_clusters,
    params,
    *,
    init=None,
    max_cycles=30,
    tol=1e-3,
    kmeans_restarts=10,
    kmeans_iter=100,
    kmeans_tol=1e-6,
    labels=None,
):
    """Run the restarted K-means clustering loop.

    init may be a Partition or None for a uniform random start drawn from
    params.seed.  Stops when the subspace distance between consecutive
    embeddings drops below tol (skipped on the first cycle, whose reference
    embedding is arbitrary) or after max_cycles cycles.  Returns
    (Partition, history) where history holds one record per executed cycle.
    """
    samples = as_float_matrix(samples, "samples")
    n = samples.shape[0]
    n_clusters = check_cluster_count(n_clusters, n, "n_clusters")

    rng = np.random.default_rng([params.seed, 0x5EED])
    if init is None:
        part = random_partition(n, n_clusters, rng, points=samples)
    else:
        if init.n != n:
            raise ValueError(f"init has {init.n} rows, samples have {n}")
        if init.n_clusters != n_clusters:
            raise ValueError("init.n_clusters does not match n_clusters")
        assign, _ = repair_empty(init.assign, n_clusters, samples)
        part = Partition(assign, n_clusters)

    # reference embedding for the (skipped) first stopping test
    prev_emb = np.eye(n, n_clusters)
    history = []
    for cycle in range(max_cycles):
        t0 = time.perf_counter()
        blocks = build_block_factors(samples, part, params, seed=[params.seed, cycle])
        emb, eigvals = assemble_embedding(blocks, n)
        proposal = kmeans(
            emb,
            n_clusters,
            restarts=kmeans_restarts,
            max_iter=kmeans_iter,
            tol=kmeans_tol,
            seed=int(rng.integers(2**31)),
        )
        dist = subspace_distance(prev_emb, emb)
        repaired, moved = reclassify(proposal, emb)
        record = {
            "cycle": cycle,
            "subspace_distance": dist,
            "top_eigenvalues": eigvals.tolist(),
            "orthonormality_defect": float(
                np.abs(emb.T @ emb - np.eye(n_clusters)).max()
            ),
            "empty_clusters_repaired": moved,
            "seconds": 0.0,
        }
        if labels is not None:
            record["metrics"] = _metrics.evaluate(repaired.assign, labels).as_dict()
        record["seconds"] = time.perf_counter() - t0
        history.append(record)
        part = repaired
        if cycle >= 1 and dist < tol:
            break
        prev_emb = emb
    return part, history
