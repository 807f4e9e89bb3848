"""Tests for forest training, prediction and evaluation."""

import logging

import numpy as np
import pytest
from scipy import stats

from rfdi.const import THREADS_ENV
from rfdi.dataset import Dataset, stratified_split
from rfdi.exception_classes import ConfigError, DegenerateLabels, DimensionError, MismatchedData, RangeError
from rfdi.forest import (
    NOT_OOB,
    ConfusionMatrix,
    Forest,
    ForestConfig,
    balanced_bootstrap,
    classify,
    confusion_matrix,
    metrics,
    oob_predict,
    oob_proba,
    predict,
    predict_proba,
    resolve_threads,
    rfq_classify,
    summarize,
    train_forest,
    vote_share,
)
from rfdi.tree import predict_tree
from rfdi.types import BRFMinorityMode, Decision, Sampling

LABELS_20_200 = np.array([1] * 20 + [0] * 200)


def test_balanced_bootstrap_all() -> None:
    """Test that mode all keeps every minority row and distinct majority rows."""
    rng = np.random.default_rng(7)
    minority = np.flatnonzero(LABELS_20_200 == 1)
    for _ in range(1000):
        sample = balanced_bootstrap(LABELS_20_200, BRFMinorityMode.ALL, rng)
        assert sample.size == 40
        assert sorted(sample[:20].tolist()) == minority.tolist()
        assert np.all(LABELS_20_200[sample[20:]] == 0)
        assert np.unique(sample[20:]).size == 20


def test_balanced_bootstrap_multiplicities() -> None:
    """Test that bootstrap mode draws every minority row equally often."""
    rng = np.random.default_rng(11)
    totals = np.zeros(LABELS_20_200.size, dtype=np.int64)
    for _ in range(1000):
        sample = balanced_bootstrap(LABELS_20_200, BRFMinorityMode.BOOTSTRAP, rng)
        assert sample.size == 40
        assert np.all(LABELS_20_200[sample[:20]] == 1)
        assert np.all(LABELS_20_200[sample[20:]] == 0)
        totals += np.bincount(sample, minlength=LABELS_20_200.size)
    assert stats.chisquare(totals[:20]).pvalue > 0.01


def test_balanced_bootstrap_relabels_rarer_class() -> None:
    """Test that the rarer label is treated as minority whatever its code."""
    sample = balanced_bootstrap([0, 1, 1, 1, 1], BRFMinorityMode.ALL, seed=0)
    assert sample[0] == 0
    assert sample.size == 2


def test_balanced_bootstrap_single_class() -> None:
    """Test that a single class is rejected."""
    with pytest.raises(DegenerateLabels):
        balanced_bootstrap([0, 0, 0], BRFMinorityMode.BOOTSTRAP, seed=0)


def test_resolve_threads(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test the thread cap."""
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads(3) == 3
    monkeypatch.setenv(THREADS_ENV, "2")
    assert resolve_threads(8) == 2
    assert resolve_threads(1) == 1
    assert resolve_threads(None) <= 2


@pytest.mark.parametrize("value", ["0", "-1", "many"])
def test_resolve_threads_invalid(monkeypatch: pytest.MonkeyPatch, value: str) -> None:
    """Test that a bad thread cap is rejected."""
    monkeypatch.setenv(THREADS_ENV, value)
    with pytest.raises(ConfigError):
        resolve_threads(4)


@pytest.mark.parametrize("cfg", [ForestConfig(n_trees=0), ForestConfig(n_threads=0)])
def test_forest_config_validate(ranked_data: Dataset, cfg: ForestConfig) -> None:
    """Test `ForestConfig.validate`."""
    with pytest.raises(ConfigError):
        train_forest(ranked_data, cfg)


def test_train_forest(ranked_data: Dataset) -> None:
    """Test forest size, in-bag sizes and training statistics."""
    forest = train_forest(ranked_data, ForestConfig(n_trees=15, seed=1))

    assert len(forest.trees) == 15
    assert {len(bag) for bag in forest.in_bags} == {ranked_data.n}
    assert forest.prevalence == 0.25
    assert forest.n_min == 20
    assert forest.feature_names == ("a", "b", "c", "d")
    assert forest.config.tree.mtry == 1


def test_train_forest_brf(sim_data: Dataset) -> None:
    """Test that balanced samples hold 2 * N_min rows."""
    forest = train_forest(sim_data, ForestConfig(n_trees=10, sampling=Sampling.BRF, seed=2))
    assert {len(bag) for bag in forest.in_bags} == {2 * sim_data.stats.c1}
    for bag in forest.in_bags:
        assert np.count_nonzero(sim_data.y[bag]) == sim_data.stats.c1


def test_train_forest_ignores_thread_count(ranked_data: Dataset) -> None:
    """Test that results do not depend on the number of threads."""
    one = train_forest(ranked_data, ForestConfig(n_trees=12, seed=3, n_threads=1))
    many = train_forest(ranked_data, ForestConfig(n_trees=12, seed=3, n_threads=4))
    for a, b in zip(one.trees, many.trees, strict=True):
        assert a.to_dict() == b.to_dict()
        np.testing.assert_array_equal(a.in_bag, b.in_bag)


def test_predict_proba(sim_forest: Forest, sim_data: Dataset) -> None:
    """Test probability shapes and ranges."""
    proba = predict_proba(sim_forest, sim_data.x[:25])
    assert proba.shape == (25,)
    assert np.all((proba >= 0) & (proba <= 1))
    single = predict_proba(sim_forest, sim_data.x[0])
    assert isinstance(single, float)
    assert single == proba[0]


def _walk_dump(dump: dict, row: np.ndarray) -> float:
    """Route ``row`` through a dumped tree and return the leaf minority fraction."""
    node = dump["nodes"][0]
    while node["variable"] is not None:
        child = node["left"] if row[node["variable"]] <= node["threshold"] else node["right"]
        node = dump["nodes"][child]
    c0, c1 = node["counts"]
    return c1 / (c0 + c1)


def test_predict_proba_matches_dumps(sim_forest: Forest, sim_data: Dataset) -> None:
    """Test forest probabilities against an average recomputed from tree dumps."""
    rows = sim_data.x[:40]
    dumps = [tree.to_dict() for tree in sim_forest.trees]
    expected = [np.mean([_walk_dump(dump, row) for dump in dumps]) for row in rows]
    np.testing.assert_allclose(predict_proba(sim_forest, rows), expected, rtol=0, atol=1e-12)


def test_single_tree_forest_follows_leaf_majority(sim_data: Dataset) -> None:
    """Test that a one-tree forest predicts the majority label of the leaf reached."""
    forest = train_forest(sim_data, ForestConfig(n_trees=1, seed=4))
    rows = sim_data.x[:200]
    expected = []
    for row in rows:
        c0, c1 = predict_tree(forest.trees[0], row)
        expected.append(int(c1 >= c0))
    np.testing.assert_array_equal(predict(forest, rows, Decision.MAJORITY_VOTE), expected)
    np.testing.assert_array_equal(predict(forest, rows, Decision.THRESHOLD_HALF), expected)


def test_predict_proba_dimension_error(sim_forest: Forest) -> None:
    """Test that rows of the wrong width are rejected."""
    with pytest.raises(DimensionError):
        predict_proba(sim_forest, np.zeros(3))


def test_vote_share(sim_forest: Forest, sim_data: Dataset) -> None:
    """Test that vote shares are multiples of one tree's share."""
    votes = vote_share(sim_forest, sim_data.x[:30]) * len(sim_forest.trees)
    np.testing.assert_allclose(votes, np.round(votes))


@pytest.mark.parametrize(("p_hat", "pi", "expected"), [(0.25, 0.25, 1), (0.2499, 0.25, 0), (0.9, 0.25, 1), (0.0, 1.0, 0)])
def test_rfq_classify(p_hat: float, pi: float, expected: int) -> None:
    """Test the RFQ rule and its boundary."""
    assert rfq_classify(p_hat, pi) == expected


@pytest.mark.parametrize(("p_hat", "pi"), [(1.5, 0.2), (-0.1, 0.2), (0.5, 0.0), (0.5, 1.2)])
def test_rfq_classify_range(p_hat: float, pi: float) -> None:
    """Test RFQ argument checks."""
    with pytest.raises(RangeError):
        rfq_classify(p_hat, pi)


def test_classify() -> None:
    """Test all decision rules on one probability vector."""
    proba = np.array([0.1, 0.3, 0.6, np.nan])
    votes = np.array([0.0, 0.5, 0.4, 0.0])
    assert classify(proba, votes, Decision.RFQ, 0.3).tolist() == [0, 1, 1, NOT_OOB]
    assert classify(proba, votes, Decision.THRESHOLD_HALF, 0.3).tolist() == [0, 0, 1, NOT_OOB]
    assert classify(proba, votes, Decision.MAJORITY_VOTE, 0.3).tolist() == [0, 1, 0, NOT_OOB]


def test_classify_errors() -> None:
    """Test `classify` argument checks."""
    with pytest.raises(ConfigError):
        classify(np.array([0.5]), None, Decision.MAJORITY_VOTE, 0.2)
    with pytest.raises(RangeError):
        classify(np.array([0.5]), None, Decision.RFQ, 0.0)


def test_separable_holdout(separable_data: Dataset) -> None:
    """Test perfect metrics on separable data under every rule."""
    train, test = stratified_split(separable_data, 0.75, seed=0)
    forest = train_forest(train, ForestConfig(n_trees=25, seed=4))
    for decision in Decision:
        result = metrics(confusion_matrix(test.y, predict(forest, test.x, decision)))
        assert result.gmean == 1.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rfq_dominates_half_threshold(sim_data: Dataset, seed: int) -> None:
    """Test that RFQ recalls at least as many minority rows as the 0.5 threshold."""
    train, test = stratified_split(sim_data, 0.75, seed=seed)
    forest = train_forest(train, ForestConfig(n_trees=15, seed=seed))
    proba = predict_proba(forest, test.x)
    rfq = metrics(confusion_matrix(test.y, classify(proba, None, Decision.RFQ, forest.prevalence)))
    half = metrics(confusion_matrix(test.y, classify(proba, None, Decision.THRESHOLD_HALF, forest.prevalence)))
    assert rfq.tpr >= half.tpr


def test_oob_proba(ranked_data: Dataset) -> None:
    """Test that out-of-bag estimates only use trees not holding the row."""
    forest = train_forest(ranked_data, ForestConfig(n_trees=1, seed=6))
    proba = oob_proba(forest, ranked_data)
    in_bag = np.bincount(forest.trees[0].in_bag, minlength=ranked_data.n) > 0

    assert np.all(np.isnan(proba[in_bag]))
    expected = forest.trees[0].leaf_fraction(ranked_data.x[~in_bag])
    np.testing.assert_allclose(proba[~in_bag], expected)
    assert np.all(oob_predict(forest, ranked_data)[in_bag] == NOT_OOB)


def test_oob_brf_all_mode(sim_data: Dataset, caplog: pytest.LogCaptureFixture) -> None:
    """Test that minority rows are never out-of-bag under BRF mode all."""
    cfg = ForestConfig(n_trees=5, sampling=Sampling.BRF, brf_minority_mode=BRFMinorityMode.ALL, seed=1)
    with caplog.at_level(logging.WARNING):
        forest = train_forest(sim_data, cfg)
    assert "never out-of-bag" in caplog.text
    labels = oob_predict(forest, sim_data)
    assert np.all(labels[sim_data.y == 1] == NOT_OOB)


def test_oob_mismatched_data(sim_forest: Forest, ranked_data: Dataset) -> None:
    """Test that out-of-bag estimates need the training data."""
    with pytest.raises(MismatchedData):
        oob_proba(sim_forest, ranked_data)


def test_confusion_matrix_skips_unlabelled() -> None:
    """Test confusion counts with rows lacking a prediction."""
    cm = confusion_matrix([1, 1, 0, 0, 1], [1, 0, 0, 1, NOT_OOB])
    assert cm == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)
    assert cm.total == 4
    assert (cm + cm).to_dict() == {"tp": 2, "fp": 2, "tn": 2, "fn": 2}


def test_metrics() -> None:
    """Test metrics on fixed counts."""
    result = metrics(ConfusionMatrix(tp=8, fp=10, tn=90, fn=2))
    assert result.tpr == pytest.approx(0.8)
    assert result.tnr == pytest.approx(0.9)
    assert result.gmean == pytest.approx(0.8485, abs=1e-4)
    assert result.precision == pytest.approx(8 / 18)
    assert result.recall == result.tpr
    assert result.f1 == pytest.approx(16 / 28)
    assert result.balanced_accuracy == pytest.approx(0.85)


def test_metrics_undefined() -> None:
    """Test that zero denominators give None."""
    result = metrics(ConfusionMatrix(tn=5, fp=1))
    assert result.tpr is None
    assert result.gmean is None
    assert result.f1 is None
    assert result.balanced_accuracy is None
    assert result.tnr == pytest.approx(5 / 6)
    assert result.precision == 0.0


def test_summarize(sim_forest: Forest, sim_data: Dataset) -> None:
    """Test the forest summary document."""
    summary = summarize(sim_forest, sim_data)
    assert summary["n_min"] == sim_data.stats.c1
    assert summary["prevalence"] == sim_data.stats.prevalence
    assert 0.9 < summary["oob_coverage"] <= 1.0
    assert sum(summary["confusion"].values()) == round(summary["oob_coverage"] * sim_data.n)
    assert summary["config"]["n_trees"] == 20


def test_reordered_forest_predicts_alike(sim_forest: Forest, sim_data: Dataset) -> None:
    """Test that tree order does not change predictions."""
    flipped = sim_forest.reordered(range(len(sim_forest.trees) - 1, -1, -1))
    np.testing.assert_allclose(predict_proba(flipped, sim_data.x[:50]), predict_proba(sim_forest, sim_data.x[:50]))
    assert flipped.depth_cache == {}
