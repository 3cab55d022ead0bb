import logging

import numpy as np
import pytest

from respectral.kmeans import kmeans, kmeanspp_seed, lloyd
from respectral.partition import Partition, random_partition, repair_empty


class TestPartition:
    def test_validates_assignments(self):
        with pytest.raises(ValueError):
            Partition(np.array([0, 1, 3]), 3)
        with pytest.raises(ValueError):
            Partition(np.array([0, -1]), 2)

    def test_indicator_round_trip(self):
        part = Partition(np.array([2, 0, 1, 1, 2]), 3)
        ind = part.to_indicator()
        assert ind.shape == (5, 3)
        assert np.all(ind.sum(axis=1) == 1)
        back = Partition.from_indicator(ind)
        assert np.array_equal(back.assign, part.assign)
        assert back.n_clusters == 3

    def test_members_and_sizes(self):
        part = Partition(np.array([0, 1, 0, 1, 1]), 2)
        assert part.sizes().tolist() == [2, 3]
        assert part.members(1).tolist() == [1, 3, 4]
        assert part.is_complete()
        assert not Partition(np.array([0, 0]), 2).is_complete()


class TestRepairEmpty:
    def test_fills_every_cluster(self):
        points = np.array([[0.0], [0.1], [10.0], [10.1], [30.0]])
        assign = np.zeros(5, dtype=int)
        fixed, moved = repair_empty(assign, 3, points)
        assert moved == 2
        assert np.all(np.bincount(fixed, minlength=3) > 0)

    def test_moves_farthest_point_first(self):
        points = np.array([[0.0], [0.2], [5.0]])
        fixed, moved = repair_empty(np.zeros(3, dtype=int), 2, points)
        assert moved == 1
        assert fixed.tolist() == [0, 0, 1]  # the outlier is donated

    def test_donor_keeps_a_member(self):
        points = np.array([[0.0], [100.0]])
        fixed, _ = repair_empty(np.zeros(2, dtype=int), 2, points)
        assert sorted(np.bincount(fixed, minlength=2).tolist()) == [1, 1]

    def test_noop_when_complete(self):
        points = np.random.default_rng(0).normal(size=(6, 2))
        assign = np.array([0, 1, 2, 0, 1, 2])
        fixed, moved = repair_empty(assign.copy(), 3, points)
        assert moved == 0
        assert np.array_equal(fixed, assign)

    def test_random_partition_is_complete(self):
        points = np.random.default_rng(1).normal(size=(40, 3))
        for k in range(10):
            rng = np.random.default_rng(k)
            part = random_partition(40, 5, rng, points=points)
            assert part.is_complete()


class TestSeeding:
    def test_every_point_when_c_equals_n(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        centers = kmeanspp_seed(points, 3, seed=0)
        got = {tuple(row) for row in centers}
        assert got == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}

    def test_far_pairs_get_one_seed_each(self):
        # three pairs at mutual distance 100; within-pair distance 1.
        # D^2 weighting makes a within-pair second draw ~1e-4 likely, so
        # every seed must land in a distinct pair.
        base = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
        points = np.vstack([base, base + [0.0, 1.0]])
        for seed in range(25):
            centers = kmeanspp_seed(points, 3, seed=seed)
            pair_of = np.argmin(
                ((centers[:, None, :] - base[None, :, :]) ** 2).sum(axis=2), axis=1
            )
            assert sorted(pair_of.tolist()) == [0, 1, 2]

    def test_single_center(self):
        points = np.random.default_rng(3).normal(size=(10, 2))
        centers = kmeanspp_seed(points, 1, seed=5)
        assert centers.shape == (1, 2)
        assert any(np.allclose(centers[0], p) for p in points)

    def test_duplicates_exhausted_warns(self, caplog):
        points = np.zeros((4, 2))
        with caplog.at_level(logging.WARNING):
            centers = kmeanspp_seed(points, 3, seed=0)
        assert centers.shape == (3, 2)
        assert np.allclose(centers, 0.0)
        assert any("duplicat" in r.message for r in caplog.records)


class TestLloyd:
    def test_fixed_point_converges_immediately(self):
        locs = np.array([[0.0, 0.0], [5.0, 5.0]])
        points = np.repeat(locs, 4, axis=0)
        part, history = lloyd(points, locs.copy(), return_history=True)
        assert history[0] == 0.0  # already optimal at the first assignment
        assert len(history) <= 2
        assert np.array_equal(part.assign, np.repeat([0, 1], 4))

    def test_two_cluster_line(self):
        points = np.array([[0.0], [1.0], [10.0], [11.0]])
        init = np.array([[0.4], [10.4]])
        part, history = lloyd(points, init, return_history=True)
        assert np.array_equal(part.assign, [0, 0, 1, 1])
        assert abs(history[-1] - 1.0) <= 1e-12

    def test_objective_monotone(self):
        rng = np.random.default_rng(7)
        points = rng.normal(size=(120, 3))
        init = kmeanspp_seed(points, 4, seed=7)
        _, history = lloyd(points, init, return_history=True)
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_empty_cluster_reseeded(self):
        points = np.array([[0.0], [0.1], [0.2], [9.0]])
        init = np.array([[0.1], [50.0]])  # second center starts empty
        part = lloyd(points, init)
        assert part.is_complete()


class TestKmeans:
    def test_restarts_one_is_seed_plus_lloyd(self):
        rng = np.random.default_rng(11)
        points = rng.normal(size=(60, 2))
        direct = lloyd(points, kmeanspp_seed(points, 3, seed=[13, 0]))
        best = kmeans(points, 3, restarts=1, seed=13)
        assert np.array_equal(direct.assign, best.assign)

    def test_recovers_separated_blobs(self):
        rng = np.random.default_rng(17)
        centers = np.array([[0.0, 0.0], [40.0, 0.0], [0.0, 40.0]])
        points = np.vstack([rng.normal(size=(30, 2)) + c for c in centers])
        truth = np.repeat([0, 1, 2], 30)
        part = kmeans(points, 3, restarts=5, seed=1)
        # brute-force best label bijection
        best = 0.0
        import itertools

        for perm in itertools.permutations(range(3)):
            mapped = np.array([perm[a] for a in part.assign])
            best = max(best, float(np.mean(mapped == truth)))
        assert best == 1.0

    def test_identical_points_policy(self):
        # without c distinct points the empties cannot be filled; the result
        # is one effective cluster, reached deterministically
        points = np.zeros((6, 2))
        part = kmeans(points, 3, restarts=2, seed=0)
        again = kmeans(points, 3, restarts=2, seed=0)
        assert part.n == 6
        assert len(np.unique(part.assign)) == 1
        assert np.array_equal(part.assign, again.assign)

    def test_deterministic(self):
        rng = np.random.default_rng(23)
        points = rng.normal(size=(80, 4))
        a = kmeans(points, 4, restarts=3, seed=9)
        b = kmeans(points, 4, restarts=3, seed=9)
        assert np.array_equal(a.assign, b.assign)

    def test_tie_goes_to_lowest_center(self):
        points = np.array([[0.0], [2.0], [1.0]])  # the middle point ties
        init = np.array([[0.0], [2.0]])
        part = lloyd(points, init, max_iter=1)
        assert part.assign[2] == 0
