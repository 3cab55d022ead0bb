"""Desk-scale verification of the approximation error bounds.

For small instances the exact block kernels, degrees and normalized
similarity are formed densely and compared against the compressed factors:
a deviation bound for the normalized similarity driven by the per-block
low-rank errors, and a sin-theta bound for the invariant subspace used by
the clustering loops.  Everything here is an oracle; nothing feeds back
into the clustering path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .blocks import KernelParams, build_block_factors, gaussian_kernel
from .dataset import normalize_rows
from .partition import Partition
from .validation import as_float_matrix

logger = logging.getLogger(__name__)

DENSE_LIMIT = 500


@dataclass
class BlockOracle:
    """Dense kernel, degree vector and normalized similarity of one block."""

    kernel: np.ndarray
    deg: np.ndarray
    normalized: np.ndarray


def dense_block_oracle(block_data, tau):
    """Exact dense references for one block (guarded to <= 500 rows)."""
    block_data = as_float_matrix(block_data, "block_data")
    if block_data.shape[0] > DENSE_LIMIT:
        raise ValueError(
            f"dense oracle limited to {DENSE_LIMIT} rows, got {block_data.shape[0]}"
        )
    kernel = gaussian_kernel(block_data, block_data, tau)
    deg = kernel.sum(axis=1)
    scale = 1.0 / np.sqrt(deg)
    normalized = kernel * np.outer(scale, scale)
    return BlockOracle(kernel=kernel, deg=deg, normalized=normalized)


def spectral_norm(mat):
    return float(np.linalg.norm(mat, 2))


@dataclass
class DeviationReport:
    """Measured low-rank errors and the normalized-similarity bound."""

    eps_kernel: float          # max block spectral error of the kernel factors
    eps_degree: float          # max block error scaled by sqrt(block size)
    rho: list[float]           # per-block sqrt(n_j) * spectral error
    critical_block: int        # block holding the smallest approximate degree
    tie: bool                  # smallest degree attained in several blocks
    hypothesis_ok: bool        # rho[critical_block] < degree floor
    lhs: float                 # ||normalized_exact - normalized_compressed||_2
    bound: float               # right-hand side of the deviation inequality
    holds: bool | None         # None when the hypothesis fails


def degree_floor(tau):
    """Lower bound 1 + exp(-2 / tau^2) on exact degrees of unit-row blocks
    with at least two rows."""
    return 1.0 + math.exp(-2.0 / (tau * tau))


def measure_block_errors(blocks, oracles):
    """Per-block spectral errors of the kernel factors against dense oracles.

    Returns (eps_kernel, eps_degree, rho) where rho[j] scales block j's
    error by sqrt(n_j).
    """
    errs = []
    for b, o in zip(blocks, oracles):
        errs.append(spectral_norm(o.kernel - b.dense_lowrank()))
    eps_kernel = max(errs)
    rho = [math.sqrt(b.size) * e for b, e in zip(blocks, errs)]
    eps_degree = max(rho)
    return float(eps_kernel), float(eps_degree), [float(r) for r in rho]


def check_deviation_bound(blocks, oracles, tau):
    """Test the normalized-similarity deviation bound on one instance.

    The critical block is the one holding the smallest approximate degree
    (ties to the lowest block index, recorded).  When that block's rho is
    not below the degree floor the bound is inapplicable and holds is None.
    """
    eps_kernel, eps_degree, rho = measure_block_errors(blocks, oracles)

    floor = degree_floor(tau)
    min_per_block = np.array([b.deg.min() for b in blocks])
    critical = int(np.argmin(min_per_block))
    tie = bool(np.sum(min_per_block == min_per_block[critical]) > 1)

    lhs = max(
        spectral_norm(o.normalized - b.dense_normalized())
        for b, o in zip(blocks, oracles)
    )

    hypothesis_ok = rho[critical] < floor
    if not hypothesis_ok:
        return DeviationReport(
            eps_kernel, eps_degree, rho, critical, tie, False, lhs, float("nan"), None
        )

    norm_lowrank = max(float(b.sigma[0]) for b in blocks)
    bound = eps_kernel / floor + eps_degree * norm_lowrank / (
        math.sqrt(floor) * math.sqrt(floor - rho[critical])
    )
    return DeviationReport(
        eps_kernel,
        eps_degree,
        rho,
        critical,
        tie,
        True,
        lhs,
        float(bound),
        bool(lhs <= bound + 1e-10),
    )


@dataclass
class SubspaceReport:
    """sin-theta comparison between compressed and exact top-c subspaces."""

    gap: float                # c-th minus (c+1)-th exact eigenvalue
    deviation: float          # ||normalized_exact - normalized_compressed||_2
    applicable: bool          # gap exceeds the deviation
    sin_theta: float
    bound: float
    holds: bool | None


def topc_subspace_from_factors(blocks, n, n_clusters):
    """Top-c invariant subspace of the compressed normalized similarity.

    Gathers every block's core eigenvalues, takes the c largest across
    blocks, and scatters their eigenvectors to global rows.
    """
    entries = []
    for b in blocks:
        vals, vecs = eigh(b.core)
        for i, v in enumerate(vals):
            entries.append((float(v), b, vecs[:, i]))
    entries.sort(key=lambda e: -e[0])
    basis = np.zeros((n, n_clusters))
    for col, (val, b, small_vec) in enumerate(entries[:n_clusters]):
        basis[b.member_rows, col] = b.ortho @ small_vec
    return basis


def check_subspace_bound(blocks, oracles, n, n_clusters):
    """Davis-Kahan style check: the angle between the compressed and exact
    top-c subspaces is bounded by 2 * deviation / (gap - deviation), when the
    exact eigengap exceeds the deviation."""
    deviation = max(
        spectral_norm(o.normalized - b.dense_normalized())
        for b, o in zip(blocks, oracles)
    )
    exact_vals = []
    for o in oracles:
        exact_vals.extend(np.linalg.eigvalsh(o.normalized).tolist())
    exact_vals.sort(reverse=True)
    gap = float(exact_vals[n_clusters - 1] - exact_vals[n_clusters])

    if not gap > deviation:
        return SubspaceReport(gap, deviation, False, float("nan"), float("nan"), None)

    approx = topc_subspace_from_factors(blocks, n, n_clusters)
    exact = np.zeros((n, n_clusters))
    entries = []
    for b, o in zip(blocks, oracles):
        vals, vecs = eigh(o.normalized)
        for i, v in enumerate(vals):
            entries.append((float(v), b, vecs[:, i]))
    entries.sort(key=lambda e: -e[0])
    for col, (val, b, vec) in enumerate(entries[:n_clusters]):
        exact[b.member_rows, col] = vec

    # largest principal angle via the projection residual; unlike
    # sqrt(1 - cos^2) this stays accurate when the angle is near zero
    resid = approx - exact @ (exact.T @ approx)
    sin_theta = float(np.linalg.norm(resid, 2))
    bound = 2.0 * deviation / (gap - deviation)
    return SubspaceReport(
        gap, deviation, True, sin_theta, float(bound), bool(sin_theta <= bound + 1e-10)
    )


@dataclass
class InstanceReport:
    """Outcome of both bound checks on one random instance."""

    n: int
    n_clusters: int
    seed: int
    deviation: DeviationReport
    subspace: SubspaceReport

    def violated(self):
        checks = [self.deviation.holds, self.subspace.holds]
        return any(h is False for h in checks)


def random_instance(seed, max_n=300, cluster_choices=(2, 3, 4)):
    """Random unit-row dataset with a random balanced-ish partition."""
    rng = np.random.default_rng(seed)
    c = int(rng.choice(cluster_choices))
    n = int(rng.integers(max(20 * c, 60), max_n + 1))
    d = int(rng.integers(3, 9))
    samples = normalize_rows(rng.standard_normal((n, d)))
    assign = rng.integers(0, c, size=n)
    # make sure every block can host at least a few landmarks
    for k in range(c):
        assign[5 * k : 5 * (k + 1)] = k
    return samples, Partition(assign, c)


def run_theory_suite(n_instances=20, seed=0, tau=1.0, landmarks=0.8, rank=0.9):
    """Run both bound checks over a suite of random instances.

    The default truncation is mild so the deviation hypothesis is met on
    typical draws.  Returns a list of InstanceReport.
    """
    reports = []
    for i in range(n_instances):
        inst_seed = int(np.random.default_rng([seed, i]).integers(2**31))
        samples, part = random_instance(inst_seed)
        params = KernelParams(
            tau=tau, landmarks=landmarks, rank=rank, seed=inst_seed
        )
        blocks = build_block_factors(samples, part, params)
        oracles = [dense_block_oracle(samples[b.member_rows], tau) for b in blocks]
        dev = check_deviation_bound(blocks, oracles, tau)
        sub = check_subspace_bound(blocks, oracles, samples.shape[0], part.n_clusters)
        reports.append(
            InstanceReport(
                n=samples.shape[0],
                n_clusters=part.n_clusters,
                seed=inst_seed,
                deviation=dev,
                subspace=sub,
            )
        )
    return reports
