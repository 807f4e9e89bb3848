"""Fixtures for Tests."""

from pathlib import Path

import numpy as np
import pytest

from rfdi.dataset import Dataset, FeatureSchema
from rfdi.forest import Forest, ForestConfig, train_forest
from rfdi.synthgen import SimConfig, simulate_two_class

DATA_DIR = Path(__file__).parent / "data"

SMALL_SIM = SimConfig(n_raw=1500, n_linear=6, n_noise=6, target_ir=4.0, seed=11)


@pytest.fixture
def csv_path(request) -> Path:
    """Path of a CSV file in the test data folder."""
    file = getattr(request, "param", "toy")
    return DATA_DIR / f"{file}.csv"


@pytest.fixture
def four_rows() -> Dataset:
    """Four rows on one predictor, split perfectly at 2.5."""
    schema = FeatureSchema.numeric(["x"], "y", "b", "a")
    return Dataset.from_arrays([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1], schema)


@pytest.fixture
def ranked_data() -> Dataset:
    """80 rows on 4 predictors; the 20 highest scores of x0 + x1/2 are the minority."""
    rng = np.random.default_rng(0)
    x = rng.standard_normal((80, 4))
    score = x[:, 0] + 0.5 * x[:, 1]
    y = (score >= np.sort(score)[-20]).astype(int)
    return Dataset.from_arrays(x, y, FeatureSchema.numeric(["a", "b", "c", "d"], "y", "1", "0"))


@pytest.fixture
def separable_data() -> Dataset:
    """Two clusters on one predictor, far apart: 30 majority rows in [0, 1], 10 minority rows in [10, 11]."""
    x = np.concatenate([np.linspace(0.0, 1.0, 30), np.linspace(10.0, 11.0, 10)])
    y = np.array([0] * 30 + [1] * 10)
    return Dataset.from_arrays(x, y, FeatureSchema.numeric(["x"], "y", "pos", "neg"))


@pytest.fixture(scope="session")
def sim_data() -> Dataset:
    """Small synthetic two-class dataset (17 predictors, IR 4)."""
    return simulate_two_class(SMALL_SIM)


@pytest.fixture(scope="session")
def sim_forest(sim_data: Dataset) -> Forest:
    """Small forest trained on the synthetic dataset."""
    return train_forest(sim_data, ForestConfig(n_trees=20, seed=5, n_threads=2))
