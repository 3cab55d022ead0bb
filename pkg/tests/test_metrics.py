import itertools
import json

import numpy as np
import pytest

from respectral.metrics import (
    METRIC_NAMES,
    accuracy,
    ari,
    evaluate,
    nmi,
    pair_counts,
    pairwise_precision_recall_fscore,
    purity,
)

TRUTH = np.array([0, 0, 1, 1])
PRED = np.array([0, 1, 1, 1])


def brute_force_accuracy(truth, pred):
    labels = np.unique(np.concatenate([truth, pred]))
    best = 0.0
    for perm in itertools.permutations(labels):
        remap = dict(zip(labels, perm))
        mapped = np.array([remap[v] for v in pred])
        best = max(best, float(np.mean(mapped == truth)))
    return best


class TestAccuracy:
    def test_identity(self):
        y = np.array([0, 1, 2, 1, 0])
        assert accuracy(y, y) == 1.0

    def test_permutation_invariant(self):
        y = np.array([0, 0, 1, 1, 2, 2])
        renamed = (y + 1) % 3
        assert accuracy(y, renamed) == 1.0

    def test_hand_example(self):
        assert accuracy(TRUTH, PRED) == 0.75

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            c = int(rng.integers(2, 6))
            n = int(rng.integers(c, 30))
            t = rng.integers(0, c, size=n)
            p = rng.integers(0, c, size=n)
            assert accuracy(t, p) == pytest.approx(brute_force_accuracy(t, p))

    def test_different_cluster_counts(self):
        t = np.array([0, 0, 1, 1])
        p = np.array([0, 1, 2, 3])
        assert accuracy(t, p) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy(np.array([0, 1]), np.array([0]))


class TestNmi:
    def test_identical_balanced(self):
        y = np.array([0, 0, 1, 1, 2, 2])
        assert nmi(y, y) == 1.0

    def test_single_cluster_prediction(self):
        t = np.array([0, 0, 1, 1])
        p = np.zeros(4, dtype=int)
        assert nmi(t, p) == 0.0

    def test_independent_checkerboard(self):
        t = np.array([0, 0, 1, 1])
        p = np.array([0, 1, 0, 1])
        assert abs(nmi(t, p)) <= 1e-12

    def test_hand_value(self):
        # contingency [[2,0],[1,1]]: I = 0.21576..., H(t)=H(p) via formula
        t = np.array([0, 0, 1, 1])
        p = np.array([0, 0, 0, 1])
        h = -(0.5 * np.log(0.5)) * 2
        hp = -(0.75 * np.log(0.75) + 0.25 * np.log(0.25))
        mi = (
            0.5 * np.log(0.5 / (0.5 * 0.75))
            + 0.25 * np.log(0.25 / (0.5 * 0.75))
            + 0.25 * np.log(0.25 / (0.5 * 0.25))
        )
        assert nmi(t, p) == pytest.approx(mi / np.sqrt(h * hp), abs=1e-12)


class TestPurity:
    def test_identity(self):
        y = np.array([0, 1, 1, 0])
        assert purity(y, y) == 1.0

    def test_all_in_one(self):
        t = np.array([0, 0, 1, 1])
        assert purity(np.zeros(4, dtype=int), t) == 0.5

    def test_hand_example(self):
        assert purity(PRED, TRUTH) == 0.75


class TestPairCounts:
    def test_identity_has_no_disagreement(self):
        y = np.array([0, 0, 1, 2])
        tp, fp, fn, tn = pair_counts(y, y)
        assert fp == 0 and fn == 0
        assert tp + tn == 6

    def test_extremes(self):
        singles = np.arange(3)
        lumped = np.zeros(3, dtype=int)
        tp, fp, fn, tn = pair_counts(lumped, singles)
        assert (tp, fp, fn, tn) == (0, 3, 0, 0)
        tp, fp, fn, tn = pair_counts(singles, lumped)
        assert (tp, fp, fn, tn) == (0, 0, 3, 0)

    def test_hand_example(self):
        assert pair_counts(PRED, TRUTH) == (1, 2, 1, 2)


class TestAri:
    def test_identity(self):
        y = np.array([0, 1, 2, 0, 1, 2])
        assert ari(y, y) == 1.0

    def test_matches_pair_counting_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            c = int(rng.integers(2, 6))
            n = int(rng.integers(c, 40))
            t = rng.integers(0, c, size=n)
            p = rng.integers(0, c, size=n)
            tp, fp, fn, tn = pair_counts(t, p)
            total = tp + fp + fn + tn
            expected_index = (tp + fp) * (tp + fn) / total
            max_index = 0.5 * ((tp + fp) + (tp + fn))
            denom = max_index - expected_index
            want = 1.0 if denom == 0 else (tp - expected_index) / denom
            assert ari(t, p) == pytest.approx(want, abs=1e-10)

    def test_random_partitions_center_on_zero(self):
        rng = np.random.default_rng(9)
        vals = [
            ari(rng.integers(0, 4, size=50), rng.integers(0, 4, size=50))
            for _ in range(200)
        ]
        assert -0.05 < float(np.mean(vals)) < 0.05

    def test_degenerate_cases(self):
        ones = np.zeros(4, dtype=int)
        assert ari(ones, ones) == 1.0
        singles = np.arange(4)
        assert ari(singles, singles) == 1.0
        assert ari(singles, ones) == 0.0


class TestPairwisePrf:
    def test_identity(self):
        y = np.array([0, 0, 1, 1])
        assert pairwise_precision_recall_fscore(y, y) == (1.0, 1.0, 1.0)

    def test_hand_example(self):
        prec, rec, f = pairwise_precision_recall_fscore(PRED, TRUTH)
        assert prec == pytest.approx(1.0 / 3.0)
        assert rec == pytest.approx(0.5)
        assert f == pytest.approx(0.4)

    def test_zero_denominators(self):
        singles = np.arange(4)
        lumped = np.zeros(4, dtype=int)
        prec, rec, f = pairwise_precision_recall_fscore(lumped, singles)
        assert prec == 0.0 and f == 0.0


class TestReport:
    def test_average_is_the_mean_of_seven(self):
        rng = np.random.default_rng(13)
        t = rng.integers(0, 3, size=40)
        p = rng.integers(0, 3, size=40)
        rep = evaluate(t, p)
        vals = [getattr(rep, m) for m in METRIC_NAMES]
        assert len(vals) == 7
        assert rep.average == pytest.approx(float(np.mean(vals)))

    def test_perfect_prediction_maxes_everything(self):
        y = np.array([0, 0, 1, 1, 2, 2])
        rep = evaluate(y, (y + 2) % 3)
        for m in METRIC_NAMES:
            assert getattr(rep, m) == pytest.approx(1.0)
        assert rep.average == pytest.approx(1.0)

    def test_ranges(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            t = rng.integers(0, 4, size=30)
            p = rng.integers(0, 4, size=30)
            rep = evaluate(t, p)
            for m in ("acc", "nmi", "purity", "precision", "recall", "fscore"):
                assert 0.0 <= getattr(rep, m) <= 1.0
            assert -1.0 <= rep.ari <= 1.0

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(19)
        t = rng.integers(0, 3, size=50)
        p = rng.integers(0, 3, size=50)
        base = evaluate(t, p)
        t2 = (t + 1) % 3
        p2 = (p + 2) % 3
        swapped = evaluate(t2, p2)
        for m in METRIC_NAMES:
            assert getattr(base, m) == pytest.approx(getattr(swapped, m), abs=1e-12)

    def test_json_uses_four_decimals(self):
        t = np.array([0, 0, 1, 1])
        p = np.array([0, 1, 1, 1])
        payload = json.loads(evaluate(p, t).to_json())
        assert payload["precision"] == 0.3333
        assert payload["fscore"] == 0.4
        assert payload["acc"] == 0.75

    def test_as_dict_keys(self):
        y = np.array([0, 1])
        d = evaluate(y, y).as_dict()
        assert set(d) == set(METRIC_NAMES) | {"average"}
