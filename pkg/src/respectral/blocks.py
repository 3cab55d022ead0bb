"""Per-block Gaussian kernel compression.

Each cluster of the current partition owns a block.  The block's kernel
matrix is never formed in full: a landmark subset of its rows yields a
low-rank symmetric factorization A_j ~= U diag(sigma) U^T through an
economized QR of the landmark columns and an eigendecomposition of a small
core matrix.  Approximate degrees and the degree-normalized factors needed
by both clustering loops are derived from the same factors, all in
O(n_j * m_j) memory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, qr

from .validation import as_float_matrix

logger = logging.getLogger(__name__)


class DegenerateBlockError(RuntimeError):
    """Raised when a block's kernel or normalized factors collapse numerically."""


@dataclass(frozen=True)
class KernelParams:
    """Knobs for the per-block kernel compression.

    tau        Gaussian bandwidth (> 0).
    landmarks  per-block landmark count: int (absolute), float in (0, 1]
               (fraction of the block size), or None for the default policy
               min(n_j, max(c + 2, ceil(0.1 * n_j))).
    rank       target rank: int, float fraction of the landmark count, or
               None for ceil(m_j / 2).  Always further truncated by the
               relative spectral cutoff pinv_tol * lambda_max.
    pinv_tol   relative threshold for the core pseudo-inverse and the
               eigenvalue cutoff.
    deg_clamp  approximate degrees with |value| below this become 1.0.
    seed       base seed for landmark sampling.
    """

    tau: float
    landmarks: int | float | None = None
    rank: int | float | None = None
    pinv_tol: float = 1e-10
    deg_clamp: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not 0 < self.pinv_tol < 1:
            raise ValueError(f"pinv_tol must be in (0, 1), got {self.pinv_tol}")
        if self.deg_clamp <= 0:
            raise ValueError(f"deg_clamp must be > 0, got {self.deg_clamp}")
        for name in ("landmarks", "rank"):
            v = getattr(self, name)
            if v is None:
                continue
            if isinstance(v, (int, np.integer)):
                if v < 1:
                    raise ValueError(f"{name} must be >= 1, got {v}")
            elif isinstance(v, float):
                if not 0 < v <= 1:
                    raise ValueError(f"fractional {name} must be in (0, 1], got {v}")
            else:
                raise ValueError(f"{name} must be int, float or None")


@dataclass(frozen=True)
class BlockFactors:
    """Low-rank factors of one block: A_j ~= basis @ diag(sigma) @ basis.T."""

    block_index: int
    member_rows: np.ndarray  # global row positions of this block
    basis: np.ndarray        # n_j x r, orthonormal columns
    sigma: np.ndarray        # r, non-negative, descending
    deg: np.ndarray          # n_j approximate degrees, strictly positive
    norm_basis: np.ndarray   # deg^{-1/2}-scaled basis (not orthonormal)
    ortho: np.ndarray        # n_j x r orthonormal factor of norm_basis
    core: np.ndarray         # r x r symmetric, L_hat_j = ortho @ core @ ortho.T
    lhalf: np.ndarray        # n_j x r with L_hat_j = lhalf @ lhalf.T

    @property
    def size(self):
        return self.member_rows.shape[0]

    @property
    def rank(self):
        return self.sigma.shape[0]

    def dense_lowrank(self):
        """Dense A_j approximation (debug/oracle use only)."""
        return (self.basis * self.sigma) @ self.basis.T

    def dense_normalized(self):
        """Dense L_hat_j (debug/oracle use only)."""
        return self.ortho @ self.core @ self.ortho.T

    def debug_dict(self):
        """JSON-serializable dump of the factors; not a stable format."""
        return {
            "block_index": self.block_index,
            "member_rows": self.member_rows.tolist(),
            "basis": self.basis.tolist(),
            "sigma": self.sigma.tolist(),
            "deg": self.deg.tolist(),
        }


def gaussian_kernel(left, right, tau):
    """exp(-||x_p - x_q||^2 / (2 tau^2)) for all row pairs; values in (0, 1]."""
    left = np.atleast_2d(np.asarray(left, dtype=np.float64))
    right = np.atleast_2d(np.asarray(right, dtype=np.float64))
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    sq = (
        np.einsum("ij,ij->i", left, left)[:, None]
        - 2.0 * left @ right.T
        + np.einsum("ij,ij->i", right, right)[None, :]
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * tau * tau))


def median_bandwidth(samples, sample_cap=1000, seed=0):
    """Median pairwise distance over at most sample_cap rows (the usual
    bandwidth heuristic).  Zero-distance pairs are ignored; all-duplicate
    input raises ValueError."""
    samples = as_float_matrix(samples, "samples")
    n = samples.shape[0]
    if n > sample_cap:
        rng = np.random.default_rng(seed)
        rows = rng.choice(n, size=sample_cap, replace=False)
        samples = samples[rows]
    diffs = samples[:, None, :] - samples[None, :, :]
    dist = np.linalg.norm(diffs, axis=-1)[np.triu_indices(samples.shape[0], k=1)]
    dist = dist[dist > 0]
    if dist.size == 0:
        raise ValueError("all sampled rows coincide; cannot infer a bandwidth")
    return float(np.median(dist))


def resolve_block_sizes(n_block, n_clusters, params):
    """Resolve the landmark count m and target rank r for a block of size n_block."""
    lm = params.landmarks
    if lm is None:
        m = min(n_block, max(n_clusters + 2, int(np.ceil(0.1 * n_block))))
    elif isinstance(lm, float) and not isinstance(lm, (int, np.integer)):
        m = max(1, int(np.ceil(lm * n_block)))
    else:
        m = int(lm)
    if m > n_block:
        logger.warning("landmark count %d clamped to block size %d", m, n_block)
        m = n_block
    m = max(1, m)

    rk = params.rank
    if rk is None:
        r = int(np.ceil(m / 2))
    elif isinstance(rk, float) and not isinstance(rk, (int, np.integer)):
        r = max(1, int(np.ceil(rk * m)))
    else:
        r = int(rk)
    r = max(1, min(r, m))
    return m, r


def sample_landmarks(n_block, m, seed):
    """Uniform landmark positions without replacement; sorted, deterministic."""
    if m > n_block:
        logger.warning("landmark count %d clamped to block size %d", m, n_block)
        m = n_block
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_block, size=m, replace=False))


def _truncate_spectrum(vals, vecs, r_target, pinv_tol):
    # vals descending; clamp negatives, then apply the relative cutoff and rank cap
    vals = np.maximum(vals, 0.0)
    top = vals[0]
    if top <= 0.0:
        raise DegenerateBlockError("kernel factorization produced no positive eigenvalue")
    keep = min(r_target, int(np.sum(vals >= pinv_tol * top)))
    keep = max(keep, 1)
    return vals[:keep], vecs[:, :keep]


def nystrom_factorize(block_data, landmark_pos, r_target, params):
    """Low-rank symmetric factorization of one block's Gaussian kernel.

    Landmark columns C are orthogonalized by economized QR; the core
    R pinv(W) R^T is eigendecomposed and truncated to r_target (and by the
    relative cutoff).  Blocks no larger than the requested rank use the
    exact dense kernel instead, which is equivalent to full sampling.
    Returns (basis, sigma) with orthonormal basis columns and non-negative,
    descending sigma.
    """
    block_data = as_float_matrix(block_data, "block_data")
    n_block = block_data.shape[0]
    landmark_pos = np.asarray(landmark_pos, dtype=np.int64)

    if n_block <= r_target or landmark_pos.shape[0] >= n_block:
        dense = gaussian_kernel(block_data, block_data, params.tau)
        vals, vecs = eigh(dense)
        vals, vecs = _truncate_spectrum(vals[::-1], vecs[:, ::-1], r_target, params.pinv_tol)
        return vecs, vals

    cols = gaussian_kernel(block_data, block_data[landmark_pos], params.tau)
    core_w = cols[landmark_pos]
    if np.linalg.norm(core_w) < 1e-300:
        raise DegenerateBlockError("landmark kernel is numerically zero")
    q_fac, r_fac = qr(cols, mode="economic")
    w_pinv = np.linalg.pinv(core_w, rcond=params.pinv_tol, hermitian=True)
    small = r_fac @ w_pinv @ r_fac.T
    small = 0.5 * (small + small.T)
    vals, vecs = eigh(small)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    vals, vecs = _truncate_spectrum(vals, vecs, r_target, params.pinv_tol)
    return q_fac @ vecs, vals


def degrees_from_factors(basis, sigma, deg_clamp=1e-12):
    """Approximate degrees: row sums of the low-rank kernel, in O(n r).

    Magnitudes are taken and entries below deg_clamp become 1.0, so the
    result is strictly positive.
    """
    col_sums = basis.sum(axis=0)
    deg = np.abs(basis @ (sigma * col_sums))
    deg[deg < deg_clamp] = 1.0
    return deg


def compress_normalized(basis, sigma, deg, block_index=0):
    """Degree-normalize the factors and re-orthogonalize.

    Returns (norm_basis, ortho, core, lhalf) where
    L_hat = ortho @ core @ ortho.T = lhalf @ lhalf.T.
    Raises DegenerateBlockError when the normalized basis loses rank.
    """
    norm_basis = basis / np.sqrt(deg)[:, None]
    ortho, tri = qr(norm_basis, mode="economic")
    if np.any(np.abs(np.diag(tri)) < 1e-12):
        raise DegenerateBlockError(
            f"block {block_index}: normalized basis is rank deficient"
        )
    core = tri @ np.diag(sigma) @ tri.T
    core = 0.5 * (core + core.T)
    lhalf = norm_basis * np.sqrt(sigma)[None, :]
    return norm_basis, ortho, core, lhalf


def block_top_eigpair(factors):
    """Leading eigenpair of the block's normalized matrix, via its small core.

    Returns (value, vector) with a unit-norm vector of length n_j.  The
    factored residual ||L_hat v - value * v|| must not exceed 1e-8.
    """
    vals, vecs = eigh(factors.core)
    idx = int(np.argmax(vals))
    top_val = float(vals[idx])
    top_vec = factors.ortho @ vecs[:, idx]
    residual = factors.ortho @ (factors.core @ vecs[:, idx]) - top_val * top_vec
    res_norm = float(np.linalg.norm(residual))
    if res_norm > 1e-8:
        raise DegenerateBlockError(
            f"block {factors.block_index}: eigenpair residual {res_norm:.2e} exceeds 1e-8"
        )
    return top_val, top_vec


def build_block_factors(samples, part, params, seed=None):
    """Run the compression pipeline for every cluster of `part`.

    Landmark draws are re-seeded per block (from params.seed unless an
    explicit seed sequence is given) so rebuilding with the same partition
    and seed is deterministic.  Empty clusters are not allowed here; repair
    the partition first.
    """
    samples = as_float_matrix(samples, "samples")
    if seed is None:
        seed = [params.seed]
    elif isinstance(seed, (int, np.integer)):
        seed = [int(seed)]
    else:
        seed = [int(s) for s in seed]
    blocks = []
    for j in range(part.n_clusters):
        rows = part.members(j)
        if rows.size == 0:
            raise ValueError(f"cluster {j} is empty; repair the partition first")
        block_data = samples[rows]
        m, r_target = resolve_block_sizes(rows.size, part.n_clusters, params)
        landmark_pos = sample_landmarks(rows.size, m, seed=seed + [j])
        basis, sigma = nystrom_factorize(block_data, landmark_pos, r_target, params)
        deg = degrees_from_factors(basis, sigma, params.deg_clamp)
        norm_basis, ortho, core, lhalf = compress_normalized(basis, sigma, deg, j)
        blocks.append(
            BlockFactors(
                block_index=j,
                member_rows=rows,
                basis=basis,
                sigma=sigma,
                deg=deg,
                norm_basis=norm_basis,
                ortho=ortho,
                core=core,
                lhalf=lhalf,
            )
        )
    return blocks


def global_degrees(blocks, n):
    """Scatter per-block degrees to a length-n vector."""
    deg = np.zeros(n)
    seen = np.zeros(n, dtype=bool)
    for b in blocks:
        if np.any(seen[b.member_rows]):
            raise RuntimeError("blocks overlap: member_rows are not disjoint")
        seen[b.member_rows] = True
        deg[b.member_rows] = b.deg
    if not np.all(seen):
        raise RuntimeError("blocks do not cover all rows")
    return deg
