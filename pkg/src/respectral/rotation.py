"""Restarted spectral clustering with joint rotation-based discretization.

Instead of K-means on the embedding, each cycle alternates three updates on
a coupled objective: an orthonormal embedding is fit to the compressed
normalized kernel while being pulled toward the rotated, degree-scaled
indicator of the current partition; the rotation is refit by Procrustes
alignment; the partition is re-read off the rotated embedding rows.  All
steps work on the low-rank block factors, never on an n x n matrix.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from . import metrics as _metrics
from .blocks import build_block_factors, global_degrees
from .partition import Partition, random_partition, repair_empty
from .restart import subspace_distance
from .validation import as_float_matrix, check_cluster_count

logger = logging.getLogger(__name__)


def scaled_indicator(deg, part):
    """Degree-scaled normalized indicator: row i holds
    sqrt(deg_i / deg-mass of its cluster) in its cluster's column.
    Columns are unit vectors in the deg-weighted sense used by the objective."""
    n = deg.shape[0]
    out = np.zeros((n, part.n_clusters))
    mass = np.bincount(part.assign, weights=deg, minlength=part.n_clusters)
    if np.any(mass <= 0):
        raise ValueError("every cluster needs positive degree mass")
    out[np.arange(n), part.assign] = np.sqrt(deg / mass[part.assign])
    return out


def alignment_target(deg, part, rotation):
    """Rotated pull target for the embedding update: scaled_indicator @ rotation^T."""
    return scaled_indicator(deg, part) @ rotation.T


def _blockwise_lhat_product(blocks, emb):
    """L_hat @ emb computed block by block through the lhalf factors."""
    out = np.zeros_like(emb)
    for b in blocks:
        rows = b.member_rows
        out[rows] = b.lhalf @ (b.lhalf.T @ emb[rows])
    return out


def _lhat_frob_sq(blocks):
    # ||L_hat||_F^2 via the r x r Gram matrices of the half factors
    total = 0.0
    for b in blocks:
        gram = b.lhalf.T @ b.lhalf
        total += float(np.sum(gram * gram))
    return total


def gpi_embedding(blocks, target, coupling, emb0, inner_iter=100, inner_tol=1e-8):
    """Maximize tr(M^T L_hat M) + coupling * tr(M^T target) over orthonormal M
    by generalized power iteration: polar factor of 2 L_hat M + coupling * target.

    The inner objective is non-decreasing (asserted).  Returns
    (embedding, objective_trace).
    """
    emb = np.array(emb0, dtype=np.float64, copy=True)
    trace = []
    prev = -np.inf
    for _ in range(inner_iter):
        grad = 2.0 * _blockwise_lhat_product(blocks, emb) + coupling * target
        u, s, vt = np.linalg.svd(grad, full_matrices=False)
        if s[-1] < 1e-14 * max(1.0, s[0]):
            logger.warning("polar factor is rank deficient; completing orthonormally")
        emb = u @ vt
        obj = float(
            np.sum(_blockwise_lhat_product(blocks, emb) * emb)
            + coupling * np.sum(target * emb)
        )
        assert obj >= prev - 1e-9 * max(1.0, abs(prev)), "inner objective decreased"
        trace.append(obj)
        if obj - prev < inner_tol:
            break
        prev = obj
    return emb, trace


def update_rotation(emb, deg, part):
    """Procrustes-optimal rotation aligning the embedding with the scaled
    indicator: polar factor of emb^T scaled_indicator."""
    prod = emb.T @ scaled_indicator(deg, part)
    u, _, vt = np.linalg.svd(prod)
    return u @ vt


def update_assignment(emb, rotation):
    """Read a partition off the rotated embedding: each row joins the column
    with the largest magnitude (ties to the lowest column).  Empty clusters
    are repaired against the rotated rows; returns (Partition, moved_count)."""
    rotated = emb @ rotation
    assign = np.argmax(np.abs(rotated), axis=1)
    assign, moved = repair_empty(assign, rotated.shape[1], rotated)
    return Partition(assign, rotated.shape[1]), moved


def rotation_objective(blocks, deg, emb, rotation, part, coupling):
    """Coupled objective: ||L_hat - M M^T||_F^2
    + coupling * ||M Q - scaled_indicator||_F^2, via the factored forms.
    Returns (total, fit_term, pull_term).  Requires orthonormal emb columns."""
    c = emb.shape[1]
    fit = _lhat_frob_sq(blocks) - 2.0 * float(
        np.sum(_blockwise_lhat_product(blocks, emb) * emb)
    ) + c
    pull = float(np.linalg.norm(emb @ rotation - scaled_indicator(deg, part)) ** 2)
    return fit + coupling * pull, fit, pull


def run_restarted_rotation(
    samples,
    n_clusters,
    params,
    *,
    init=None,
    max_cycles=30,
    tol=1e-3,
    coupling=1.0,
    gpi_iter=100,
    gpi_tol=1e-8,
    labels=None,
):
    """Run the rotation-based restarted clustering loop.

    Per cycle: rebuild block factors from the current partition, update the
    embedding by generalized power iteration, refit the rotation, re-read the
    partition, then test the subspace stopping rule (skipped on the first
    cycle).  Returns (Partition, history).
    """
    samples = as_float_matrix(samples, "samples")
    n = samples.shape[0]
    n_clusters = check_cluster_count(n_clusters, n, "n_clusters")
    if coupling < 0:
        raise ValueError(f"coupling must be >= 0, got {coupling}")

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

    emb_prev = np.eye(n, n_clusters)
    rot_prev = np.eye(n_clusters)
    history = []
    for cycle in range(max_cycles):
        t0 = time.perf_counter()
        blocks = build_block_factors(samples, part, params, seed=[params.seed, cycle])
        deg = global_degrees(blocks, n)

        target = alignment_target(deg, part, rot_prev)
        emb, gpi_trace = gpi_embedding(
            blocks, target, coupling, emb_prev, inner_iter=gpi_iter, inner_tol=gpi_tol
        )
        f_after_emb = rotation_objective(blocks, deg, emb, rot_prev, part, coupling)

        rotation = update_rotation(emb, deg, part)
        f_after_rot = rotation_objective(blocks, deg, emb, rotation, part, coupling)

        proposal, moved = update_assignment(emb, rotation)
        f_after_assign = rotation_objective(blocks, deg, emb, rotation, proposal, coupling)

        dist = subspace_distance(emb_prev, emb)
        record = {
            "cycle": cycle,
            "f": f_after_assign[0],
            "term_fit": f_after_assign[1],
            "term_pull": f_after_assign[2],
            "f_after_embedding": f_after_emb[0],
            "f_after_rotation": f_after_rot[0],
            "gpi_objective_trace": gpi_trace,
            "subspace_distance": dist,
            "empty_clusters_repaired": moved,
            "seconds": 0.0,
        }
        if labels is not None:
            record["metrics"] = _metrics.evaluate(proposal.assign, labels).as_dict()
        record["seconds"] = time.perf_counter() - t0
        history.append(record)
        part = proposal
        if cycle >= 1 and dist < tol:
            break
        emb_prev = emb
        rot_prev = rotation
    return part, history
