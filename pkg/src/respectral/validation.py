"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_float_matrix(data, name="samples"):
    """Coerce to a 2-d float64 array with finite entries, or raise ValueError."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must contain at least one row")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(
            f"{name} contains a non-finite value at row {bad[0]}, column {bad[1]}"
        )
    return arr


def as_label_vector(labels, n, name="labels"):
    """Coerce to a 1-d int array of length n."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got ndim={arr.ndim}")
    if arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(np.asarray(arr, dtype=np.float64))
        if not np.allclose(arr, rounded, atol=0.0):
            raise ValueError(f"{name} must be integer-valued")
        arr = rounded
    return arr.astype(np.int64)


def check_cluster_count(c, n, name="c"):
    if not isinstance(c, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {type(c).__name__}")
    if c < 1:
        raise ValueError(f"{name} must be >= 1, got {c}")
    if c > n:
        raise ValueError(f"{name}={c} exceeds the number of samples n={n}")
    return int(c)
