"""External clustering quality metrics.

All metrics compare a predicted assignment against ground truth and are
invariant to label permutation.  Pairwise precision/recall/F-score follow
the pair-counting convention: a "positive" is a sample pair placed in the
same predicted cluster.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .validation import as_label_vector

METRIC_NAMES = ("acc", "nmi", "purity", "ari", "precision", "recall", "fscore")


def _pair(pred, truth):
    pred = as_label_vector(pred, np.asarray(pred).shape[0], "pred")
    truth = as_label_vector(truth, pred.shape[0], "truth")
    return pred, truth


def contingency(pred, truth):
    """Count matrix with one row per predicted cluster, one column per class."""
    pred, truth = _pair(pred, truth)
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def accuracy(pred, truth):
    """Best-matching accuracy: fraction correct under the optimal one-to-one
    relabeling of predicted clusters (exact assignment, not greedy)."""
    table = contingency(pred, truth)
    k = max(table.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded.max() - padded)
    return float(padded[rows, cols].sum() / table.sum())


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def _same_partition(pred, truth):
    """True when the two labelings induce identical partitions of the samples."""
    table = contingency(pred, truth)
    return bool(
        np.all((table > 0).sum(axis=0) == 1) and np.all((table > 0).sum(axis=1) == 1)
    )


def nmi(pred, truth):
    """Mutual information normalized by sqrt(H_pred * H_truth), natural logs.

    1.0 when the partitions coincide (up to relabeling); 0.0 when either
    partition is degenerate (a single cluster) but they differ.
    """
    pred, truth = _pair(pred, truth)
    if _same_partition(pred, truth):
        return 1.0
    table = contingency(pred, truth).astype(np.float64)
    n = table.sum()
    hp = _entropy(table.sum(axis=1))
    ht = _entropy(table.sum(axis=0))
    if hp == 0.0 or ht == 0.0:
        return 0.0
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    mask = joint > 0
    mi = float((joint[mask] * np.log(joint[mask] / outer[mask])).sum())
    return mi / math.sqrt(hp * ht)


def purity(pred, truth):
    """Fraction of samples in the majority class of their predicted cluster."""
    table = contingency(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def pair_counts(pred, truth):
    """Pair-confusion counts over all unordered sample pairs.

    Returns (tp, fp, fn, tn): pairs together in both / only predicted /
    only truth / neither.
    """
    table = contingency(pred, truth).astype(np.int64)
    n = int(table.sum())

    def choose2(x):
        return int((x * (x - 1) // 2).sum())

    tp = choose2(table)
    same_pred = choose2(table.sum(axis=1))
    same_truth = choose2(table.sum(axis=0))
    total = n * (n - 1) // 2
    fp = same_pred - tp
    fn = same_truth - tp
    tn = total - tp - fp - fn
    return tp, fp, fn, tn


def ari(pred, truth):
    """Adjusted Rand index via the contingency-table formula.

    Degenerate cases (both partitions all-singletons or both one cluster)
    return 1.0 when the partitions coincide and 0.0 otherwise.
    """
    tp, fp, fn, tn = pair_counts(pred, truth)
    total = tp + fp + fn + tn
    if total == 0:  # n < 2: single sample, identical by construction
        return 1.0
    sum_pred = tp + fp
    sum_truth = tp + fn
    expected = sum_pred * sum_truth / total
    max_index = 0.5 * (sum_pred + sum_truth)
    if max_index == expected:
        return 1.0 if _same_partition(pred, truth) else 0.0
    return float((tp - expected) / (max_index - expected))


def pairwise_precision_recall_fscore(pred, truth):
    """Precision, recall and F-score over sample pairs (0.0 on empty denominators)."""
    tp, fp, fn, _ = pair_counts(pred, truth)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    fscore = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return float(precision), float(recall), float(fscore)


@dataclass(frozen=True)
class MetricsReport:
    acc: float
    nmi: float
    purity: float
    ari: float
    precision: float
    recall: float
    fscore: float

    @property
    def average(self):
        """Unweighted mean of the seven metrics."""
        return sum(getattr(self, m) for m in METRIC_NAMES) / len(METRIC_NAMES)

    def as_dict(self):
        out = {m: getattr(self, m) for m in METRIC_NAMES}
        out["average"] = self.average
        return out

    def to_json(self, **extra):
        """JSON rendering with values rounded to 4 decimals."""
        payload = {k: round(v, 4) for k, v in self.as_dict().items()}
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True)


def evaluate(pred, truth):
    """All seven metrics for one prediction."""
    pred, truth = _pair(pred, truth)
    precision, recall, fscore = pairwise_precision_recall_fscore(pred, truth)
    return MetricsReport(
        acc=accuracy(pred, truth),
        nmi=nmi(pred, truth),
        purity=purity(pred, truth),
        ari=ari(pred, truth),
        precision=precision,
        recall=recall,
        fscore=fscore,
    )
