"""Dataset loading, normalization and synthetic data generation.

Loaders accept dense CSV and sparse LIBSVM-style text files and always
produce float64 sample matrices.  Ground-truth labels, when present, are
re-indexed to a dense 0..c-1 range: numeric labels by sorted value (so an
already dense labeling round-trips unchanged), string labels in order of
first occurrence.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .validation import as_float_matrix, as_label_vector

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Raised for malformed dataset files; message names the offending row."""


@dataclass
class Dataset:
    samples: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = as_float_matrix(self.samples, "samples")
        if self.labels is not None:
            self.labels = as_label_vector(self.labels, self.n, "labels")

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def n_classes(self):
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)


def _reindex_labels(raw):
    """Map raw label tokens to dense integers 0..c-1.

    Numeric labels are ordered by value; non-numeric labels by first
    occurrence.  Returns an int64 array.
    """
    try:
        values = [float(tok) for tok in raw]
    except (TypeError, ValueError):
        order = {}
        for tok in raw:
            if tok not in order:
                order[tok] = len(order)
        return np.array([order[tok] for tok in raw], dtype=np.int64)
    values = np.asarray(values)
    uniq = np.unique(values)
    lookup = {v: i for i, v in enumerate(uniq.tolist())}
    return np.array([lookup[v] for v in values.tolist()], dtype=np.int64)


def load_csv(path, label_column=None, name=None):
    """Load a dense CSV file into a Dataset.

    A header row is skipped when none of its feature cells parse as a
    number.  `label_column` selects the ground-truth column (negative
    indices count from the end); the remaining columns are features.
    Malformed cells raise DatasetError naming the 1-based file row.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(cell.strip() == "" for cell in rec):
                continue
            rows.append((lineno, [cell.strip() for cell in rec]))
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    width = len(rows[0][1])
    if label_column is not None:
        lab_idx = label_column % width
        if not 0 <= lab_idx < width:
            raise DatasetError(f"label_column {label_column} out of range for width {width}")
    else:
        lab_idx = None

    def feature_cells(rec):
        return [cell for j, cell in enumerate(rec) if j != lab_idx]

    start = 0
    first = rows[0][1]
    numeric = []
    for cell in feature_cells(first):
        try:
            float(cell)
            numeric.append(True)
        except ValueError:
            numeric.append(False)
    if numeric and not any(numeric):
        start = 1  # header row

    samples = []
    raw_labels = []
    for lineno, rec in rows[start:]:
        if len(rec) != width:
            raise DatasetError(f"row {lineno}: expected {width} columns, got {len(rec)}")
        feats = []
        for j, cell in enumerate(rec):
            if j == lab_idx:
                continue
            try:
                feats.append(float(cell))
            except ValueError:
                raise DatasetError(f"row {lineno}: non-numeric value {cell!r} in column {j}") from None
        samples.append(feats)
        if lab_idx is not None:
            raw_labels.append(rec[lab_idx])
    if not samples:
        raise DatasetError(f"{path}: no data rows after header")

    labels = _reindex_labels(raw_labels) if lab_idx is not None else None
    return Dataset(np.asarray(samples), labels, name=name or str(path))


def save_csv(ds, path):
    """Write a Dataset to CSV, labels (if any) in the last column.

    Floats are written with repr so a reload reproduces them exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.samples[i]]
            if ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            writer.writerow(row)


def load_libsvm(path, name=None):
    """Load a sparse LIBSVM-style text file: `label idx:val ...`, 1-based indices.

    Feature indices must be strictly increasing within a line.  Empty lines
    are skipped and their count logged.  Malformed lines raise DatasetError
    naming the 1-based file row.
    """
    entries = []
    raw_labels = []
    max_idx = 0
    skipped = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                skipped += 1
                continue
            toks = line.split()
            if ":" in toks[0]:
                raise DatasetError(f"row {lineno}: missing label token")
            raw_labels.append(toks[0])
            pairs = []
            prev = 0
            for tok in toks[1:]:
                if ":" not in tok:
                    raise DatasetError(f"row {lineno}: malformed feature token {tok!r}")
                idx_s, val_s = tok.split(":", 1)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DatasetError(f"row {lineno}: malformed feature token {tok!r}") from None
                if idx < 1:
                    raise DatasetError(f"row {lineno}: feature index {idx} must be >= 1")
                if idx <= prev:
                    raise DatasetError(
                        f"row {lineno}: feature index {idx} not increasing (previous {prev})"
                    )
                prev = idx
                pairs.append((idx, val))
                max_idx = max(max_idx, idx)
            entries.append(pairs)
    if not entries:
        raise DatasetError(f"{path}: no data rows")
    if skipped:
        logger.warning("%s: skipped %d empty line(s)", path, skipped)

    samples = np.zeros((len(entries), max_idx), dtype=np.float64)
    for i, pairs in enumerate(entries):
        for idx, val in pairs:
            samples[i, idx - 1] = val
    ds = Dataset(samples, _reindex_labels(raw_labels), name=name or str(path))
    ds.meta["skipped_lines"] = skipped
    return ds


def normalize_rows(samples):
    """Scale every row to unit Euclidean norm.  Zero rows raise ValueError."""
    samples = as_float_matrix(samples, "samples")
    norms = np.linalg.norm(samples, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"row {zero[0]} has zero norm and cannot be normalized")
    return samples / norms[:, None]


def zscore_columns(samples):
    """Standardize columns to zero mean, unit variance (constant columns untouched)."""
    samples = as_float_matrix(samples, "samples")
    mean = samples.mean(axis=0)
    std = samples.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (samples - mean) / std


def make_blobs(n_clusters, per_cluster, dim, separation, seed=0):
    """Generate isotropic Gaussian blobs with centers at mutual distance >= separation.

    Deterministic for a fixed seed.  Returns a Dataset with balanced labels
    0..n_clusters-1.
    """
    if n_clusters < 1 or per_cluster < 1 or dim < 1:
        raise ValueError("n_clusters, per_cluster and dim must all be >= 1")
    if separation < 0:
        raise ValueError("separation must be non-negative")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_clusters, dim))
    if n_clusters > 1:
        diffs = centers[:, None, :] - centers[None, :, :]
        dist = np.linalg.norm(diffs, axis=-1)
        min_dist = dist[np.triu_indices(n_clusters, k=1)].min()
        if min_dist == 0.0:
            # coincident draws: spread along the first axis before scaling
            centers += np.arange(n_clusters)[:, None] * np.eye(dim)[0]
            diffs = centers[:, None, :] - centers[None, :, :]
            dist = np.linalg.norm(diffs, axis=-1)
            min_dist = dist[np.triu_indices(n_clusters, k=1)].min()
        if separation > 0 and min_dist < separation:
            centers *= separation / min_dist
    labels = np.repeat(np.arange(n_clusters), per_cluster)
    noise = rng.standard_normal((n_clusters * per_cluster, dim))
    samples = centers[labels] + noise
    return Dataset(samples, labels, name=f"blobs(c={n_clusters},n={samples.shape[0]},d={dim})")
