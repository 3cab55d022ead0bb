import numpy as np
import pytest
from sklearn.datasets import load_wine

from respectral.dataset import Dataset, save_csv


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    """The 178x13 wine table written out as a labeled CSV."""
    raw = load_wine()
    ds = Dataset(
        samples=np.asarray(raw.data, dtype=np.float64),
        labels=np.asarray(raw.target, dtype=np.int64),
        name="wine",
    )
    path = tmp_path_factory.mktemp("data") / "wine.csv"
    save_csv(ds, path)
    return path


@pytest.fixture(scope="session")
def wine_arrays():
    raw = load_wine()
    return np.asarray(raw.data, dtype=np.float64), np.asarray(raw.target, dtype=np.int64)
