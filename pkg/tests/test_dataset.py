import numpy as np
import pytest

from respectral.dataset import (
    Dataset,
    DatasetError,
    load_csv,
    load_libsvm,
    make_blobs,
    normalize_rows,
    save_csv,
    zscore_columns,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_labeled_three_rows(self, tmp_path):
        path = write(tmp_path, "1,0,a\n0,1,a\n5,5,b\n")
        ds = load_csv(path, label_column=2)
        assert ds.n == 3 and ds.dim == 2
        assert ds.labels.tolist() == [0, 0, 1]
        np.testing.assert_allclose(ds.samples, [[1, 0], [0, 1], [5, 5]])

    def test_non_numeric_feature_names_row(self, tmp_path):
        path = write(tmp_path, "1,x,0\n")
        with pytest.raises(DatasetError, match="row 1"):
            load_csv(path)

    def test_header_row_is_detected(self, tmp_path):
        path = write(tmp_path, "f1,f2,label\n1,2,0\n3,4,1\n")
        ds = load_csv(path, label_column=2)
        assert ds.n == 2
        assert ds.labels.tolist() == [0, 1]

    def test_no_labels(self, tmp_path):
        path = write(tmp_path, "1,2\n3,4\n")
        ds = load_csv(path)
        assert ds.labels is None and ds.dim == 2

    def test_ragged_row_rejected(self, tmp_path):
        path = write(tmp_path, "1,2\n3\n")
        with pytest.raises(DatasetError, match="row 2"):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(DatasetError):
            load_csv(path)

    def test_wine_shape(self, wine_csv):
        ds = load_csv(wine_csv, label_column=13)
        assert ds.n == 178
        assert ds.dim == 13
        assert ds.n_classes == 3


class TestLoadLibsvm:
    def test_sparse_line(self, tmp_path):
        path = write(tmp_path, "1 1:0.5 3:0.5\n", "data.svm")
        ds = load_libsvm(path)
        np.testing.assert_allclose(ds.samples, [[0.5, 0.0, 0.5]])
        assert ds.labels.tolist() == [0]

    def test_labels_reindexed_dense(self, tmp_path):
        path = write(tmp_path, "3 1:1\n7 1:2\n", "data.svm")
        ds = load_libsvm(path)
        assert ds.labels.tolist() == [0, 1]

    def test_empty_lines_skipped_and_counted(self, tmp_path):
        path = write(tmp_path, "1 1:1\n\n\n2 1:2\n", "data.svm")
        ds = load_libsvm(path)
        assert ds.n == 2
        assert ds.meta["skipped_lines"] == 2

    def test_non_increasing_index_rejected(self, tmp_path):
        path = write(tmp_path, "1 2:1 2:2\n", "data.svm")
        with pytest.raises(DatasetError, match="row 1"):
            load_libsvm(path)

    def test_missing_label_rejected(self, tmp_path):
        path = write(tmp_path, "1:0.5 2:0.5\n", "data.svm")
        with pytest.raises(DatasetError):
            load_libsvm(path)


class TestNormalize:
    def test_three_four_five(self):
        out = normalize_rows(np.array([[3.0, 4.0]]))
        np.testing.assert_allclose(out, [[0.6, 0.8]])

    def test_unit_row_unchanged(self):
        out = normalize_rows(np.array([[1.0, 0.0]]))
        np.testing.assert_allclose(out, [[1.0, 0.0]])

    def test_zero_row_is_an_error(self):
        with pytest.raises(ValueError, match="row 1"):
            normalize_rows(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 5))
        once = normalize_rows(x)
        twice = normalize_rows(once)
        assert np.max(np.abs(once - twice)) <= 1e-15

    def test_zscore_columns(self):
        rng = np.random.default_rng(1)
        x = rng.normal(loc=3.0, scale=2.0, size=(50, 4))
        z = zscore_columns(x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)


class TestMakeBlobs:
    def test_balanced_counts(self):
        ds = make_blobs(3, 100, 2, separation=10.0, seed=7)
        assert ds.n == 300
        assert np.bincount(ds.labels).tolist() == [100, 100, 100]

    def test_deterministic(self):
        a = make_blobs(3, 50, 2, separation=10.0, seed=7)
        b = make_blobs(3, 50, 2, separation=10.0, seed=7)
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.labels, b.labels)

    def test_center_separation(self):
        ds = make_blobs(4, 30, 3, separation=12.0, seed=5)
        centers = np.stack(
            [ds.samples[ds.labels == k].mean(axis=0) for k in range(4)]
        )
        for i in range(4):
            for j in range(i + 1, 4):
                # empirical centers sit within ~0.6 of the true ones for 30 points
                assert np.linalg.norm(centers[i] - centers[j]) > 12.0 - 2.0

    def test_wide_separation_is_unambiguous(self):
        ds = make_blobs(3, 100, 2, separation=50.0, seed=3)
        centers = np.stack(
            [ds.samples[ds.labels == k].mean(axis=0) for k in range(3)]
        )
        d2 = ((ds.samples[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assert np.array_equal(np.argmin(d2, axis=1), ds.labels)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            make_blobs(0, 10, 2, separation=1.0)
        with pytest.raises(ValueError):
            make_blobs(2, 10, 2, separation=-1.0)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    ds = Dataset(
        samples=rng.normal(size=(17, 4)),
        labels=rng.integers(0, 3, size=17),
        name="roundtrip",
    )
    path = tmp_path / "rt.csv"
    save_csv(ds, path)
    back = load_csv(path, label_column=4)
    assert np.max(np.abs(back.samples - ds.samples)) <= 1e-12
    assert np.array_equal(back.labels, ds.labels)


def test_csv_round_trip_unlabeled(tmp_path):
    ds = Dataset(samples=np.array([[1.5, -2.25], [0.0, 3.125]]), labels=None)
    path = tmp_path / "rt2.csv"
    save_csv(ds, path)
    back = load_csv(path)
    np.testing.assert_array_equal(back.samples, ds.samples)
    assert back.labels is None
