"""Tests for the synthetic data generator."""

from dataclasses import replace

import numpy as np
import pytest

from rfdi.const import SIM_MAJORITY_TOKEN, SIM_MINORITY_TOKEN
from rfdi.exception_classes import ConfigError
from rfdi.synthgen import (
    SimConfig,
    feature_names,
    linear_coefficients,
    noise_names,
    signal_ranking,
    simulate_raw,
    simulate_two_class,
)

FAST = SimConfig(n_raw=3000, seed=1)


def test_linear_coefficients() -> None:
    """Test the coefficient ramp."""
    beta = linear_coefficients(20)
    assert beta[0] == 2.5
    assert beta[-1] == pytest.approx(-0.25)
    assert np.all(np.diff(np.abs(beta)) < 0)
    assert np.all(np.sign(beta[::2]) == 1)
    assert np.all(np.sign(beta[1::2]) == -1)


def test_feature_names() -> None:
    """Test the default column layout."""
    names = feature_names(SimConfig())
    assert len(names) == SimConfig().p == 45
    assert names[:3] == ["F1", "F2", "L1"]
    assert names[22:25] == ["N1", "N2", "N3"]
    assert names[-1] == "Z20"
    assert noise_names(SimConfig()) == names[25:]


def test_signal_ranking() -> None:
    """Test that signals are ordered by coefficient magnitude."""
    ranking = signal_ranking(SimConfig())
    assert len(ranking) == 22
    assert ranking[:7] == ["L1", "L2", "L3", "L4", "L5", "F1", "F2"]


def test_simulate_two_class() -> None:
    """Test the default protocol at reduced size."""
    data = simulate_two_class(FAST)

    assert data.p == 45
    assert 5.5 <= data.stats.ir <= 6.5
    assert data.schema.minority_label == SIM_MINORITY_TOKEN
    assert data.schema.majority_label == SIM_MAJORITY_TOKEN
    assert data.feature_names == feature_names(FAST)


def test_simulate_two_class_balanced() -> None:
    """Test that a target ratio of 1 gives equal classes."""
    data = simulate_two_class(replace(FAST, target_ir=1.0))
    assert data.stats.c0 == data.stats.c1


def test_simulate_is_deterministic() -> None:
    """Test that equal settings give equal data."""
    first = simulate_two_class(FAST)
    second = simulate_two_class(FAST)
    np.testing.assert_array_equal(first.x, second.x)
    np.testing.assert_array_equal(first.y, second.y)

    other = simulate_two_class(replace(FAST, seed=2))
    assert not np.array_equal(first.x, other.x)


def test_simulate_raw_minority_is_rarer() -> None:
    """Test that label 1 marks the rarer raw class."""
    _, y = simulate_raw(FAST)
    assert np.count_nonzero(y) * 2 <= len(y)


def test_simulate_raw_factor_correlation() -> None:
    """Test the factor correlation."""
    x, _ = simulate_raw(replace(FAST, n_raw=20000))
    assert np.corrcoef(x[:, 0], x[:, 1])[0, 1] == pytest.approx(0.65, abs=0.03)


@pytest.mark.parametrize("seed", range(5))
def test_simulate_raw_prevalence(seed: int) -> None:
    """Test that the raw class-1 share stays near one half."""
    _, y = simulate_raw(SimConfig(seed=seed))
    assert 0.4 <= y.mean() <= 0.6


@pytest.mark.parametrize("seed", range(5))
def test_simulate_raw_noise_is_uncorrelated(seed: int) -> None:
    """Test that every noise column is nearly uncorrelated with the label."""
    cfg = SimConfig(seed=seed)
    x, y = simulate_raw(cfg)
    noise = x[:, cfg.p - cfg.n_noise :]
    corr = [abs(np.corrcoef(noise[:, j], y)[0, 1]) for j in range(cfg.n_noise)]
    assert max(corr) < 4 / np.sqrt(cfg.n_raw)


@pytest.mark.parametrize(
    "changes",
    [
        {"n_factors": 3},
        {"n_nonlinear": 2},
        {"n_linear": 0},
        {"factor_correlation": 1.0},
        {"n_raw": 100},
        {"target_ir": 0.5},
    ],
)
def test_sim_config_validate(changes: dict) -> None:
    """Test `SimConfig.validate`."""
    with pytest.raises(ConfigError):
        simulate_two_class(replace(FAST, **changes))
