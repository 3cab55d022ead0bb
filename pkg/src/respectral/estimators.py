"""Scikit-learn style front end for the two clustering loops."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .blocks import KernelParams, median_bandwidth
from .partition import Partition
from .restart import run_restarted_kmeans
from .rotation import run_restarted_rotation
from .validation import as_float_matrix


class RestartedSpectralClustering(BaseEstimator, ClusterMixin):
    """Restarted self-guiding spectral clustering on block-compressed kernels.

    Each fit cycle rebuilds a block-diagonal Gaussian-kernel approximation
    from the current partition, extracts a c-dimensional spectral embedding
    from the blocks, and re-reads the partition from the embedding either by
    K-means or by a rotation-based discretization.

    Parameters
    ----------
    n_clusters : int, default=8
        Number of clusters.
    assign_labels : {'kmeans', 'rotation'}, default='kmeans'
        Discretization used inside each cycle.
    tau : float or 'median', default='median'
        Gaussian kernel bandwidth; 'median' uses the median pairwise
        distance over a bounded sample of rows.
    landmarks : int, float or None, default=None
        Per-block landmark budget (absolute, fraction of the block, or the
        built-in policy when None).
    rank : int, float or None, default=None
        Target rank of each block factorization.
    max_cycles : int, default=30
        Cycle budget for the outer loop.
    tol : float, default=1e-3
        Subspace-distance stopping threshold for consecutive embeddings.
    coupling : float, default=1.0
        Weight tying the embedding to the current partition
        (rotation mode only).
    init : Partition, array of int, or None, default=None
        Starting partition; None draws a uniform random one.
    random_state : int, default=0
        Seed for landmark sampling, K-means restarts and random init.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Cluster assignment of the training data.
    history_ : list of dict
        One record per executed cycle (stopping diagnostics, timings).
    n_cycles_ : int
        Number of cycles executed.
    tau_ : float
        Bandwidth actually used.
    """

    def __init__(
        self,
        n_clusters=8,
        assign_labels="kmeans",
        tau="median",
        landmarks=None,
        rank=None,
        max_cycles=30,
        tol=1e-3,
        coupling=1.0,
        gpi_iter=100,
        gpi_tol=1e-8,
        kmeans_restarts=10,
        kmeans_iter=100,
        kmeans_tol=1e-6,
        init=None,
        random_state=0,
    ):
        self.n_clusters = n_clusters
        self.assign_labels = assign_labels
        self.tau = tau
        self.landmarks = landmarks
        self.rank = rank
        self.max_cycles = max_cycles
        self.tol = tol
        self.coupling = coupling
        self.gpi_iter = gpi_iter
        self.gpi_tol = gpi_tol
        self.kmeans_restarts = kmeans_restarts
        self.kmeans_iter = kmeans_iter
        self.kmeans_tol = kmeans_tol
        self.init = init
        self.random_state = random_state

    def _resolve_tau(self, X):
        if self.tau == "median":
            return median_bandwidth(X, seed=self.random_state)
        if isinstance(self.tau, numbers.Real) and self.tau > 0:
            return float(self.tau)
        raise ValueError(f"tau must be 'median' or a positive number, got {self.tau!r}")

    def _resolve_init(self, n):
        if self.init is None or isinstance(self.init, Partition):
            return self.init
        assign = np.asarray(self.init, dtype=np.int64)
        if assign.shape != (n,):
            raise ValueError(f"init must have shape ({n},), got {assign.shape}")
        return Partition(assign, self.n_clusters)

    def fit(self, X, y=None):
        """Cluster X; y is accepted for API compatibility and ignored."""
        X = as_float_matrix(X, "X")
        self.tau_ = self._resolve_tau(X)
        params = KernelParams(
            tau=self.tau_,
            landmarks=self.landmarks,
            rank=self.rank,
            seed=self.random_state,
        )
        init = self._resolve_init(X.shape[0])
        if self.assign_labels == "kmeans":
            part, history = run_restarted_kmeans(
                X,
                self.n_clusters,
                params,
                init=init,
                max_cycles=self.max_cycles,
                tol=self.tol,
                kmeans_restarts=self.kmeans_restarts,
                kmeans_iter=self.kmeans_iter,
                kmeans_tol=self.kmeans_tol,
            )
        elif self.assign_labels == "rotation":
            part, history = run_restarted_rotation(
                X,
                self.n_clusters,
                params,
                init=init,
                max_cycles=self.max_cycles,
                tol=self.tol,
                coupling=self.coupling,
                gpi_iter=self.gpi_iter,
                gpi_tol=self.gpi_tol,
            )
        else:
            raise ValueError(
                f"assign_labels must be 'kmeans' or 'rotation', got {self.assign_labels!r}"
            )
        self.labels_ = part.assign
        self.partition_ = part
        self.history_ = history
        self.n_cycles_ = len(history)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def __sklearn_is_fitted__(self):
        return hasattr(self, "labels_")
