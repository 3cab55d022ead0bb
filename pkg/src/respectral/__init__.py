"""Restarted self-guiding spectral clustering on block-compressed Gaussian kernels."""

from .blocks import (
    BlockFactors,
    DegenerateBlockError,
    KernelParams,
    build_block_factors,
    gaussian_kernel,
    median_bandwidth,
    nystrom_factorize,
)
from .dataset import (
    Dataset,
    DatasetError,
    load_csv,
    load_libsvm,
    make_blobs,
    normalize_rows,
    save_csv,
    zscore_columns,
)
from .estimators import RestartedSpectralClustering
from .kmeans import kmeans, kmeanspp_seed, lloyd
from .metrics import MetricsReport, evaluate
from .partition import Partition, repair_empty
from .restart import assemble_embedding, run_restarted_kmeans, subspace_distance
from .rotation import run_restarted_rotation
from .theory import run_theory_suite

__version__ = "0.1.0"

__all__ = [
    "BlockFactors",
    "Dataset",
    "DatasetError",
    "DegenerateBlockError",
    "KernelParams",
    "MetricsReport",
    "Partition",
    "RestartedSpectralClustering",
    "assemble_embedding",
    "build_block_factors",
    "evaluate",
    "gaussian_kernel",
    "kmeans",
    "kmeanspp_seed",
    "lloyd",
    "load_csv",
    "load_libsvm",
    "make_blobs",
    "median_bandwidth",
    "normalize_rows",
    "nystrom_factorize",
    "repair_empty",
    "run_restarted_kmeans",
    "run_restarted_rotation",
    "run_theory_suite",
    "save_csv",
    "subspace_distance",
    "zscore_columns",
]
