# numpydoc ignore=EX01,GL06,GL07
"""Random forests for imbalanced binary classification.

Trees are grown on standard bootstrap samples or on balanced samples (BRF),
probabilities are averaged leaf minority fractions, and labels follow the
RFQ rule, a 0.5 threshold or a majority vote.

Classes
-------
ForestConfig
    Forest size, sampling scheme, decision rule and tree settings.
Forest
    Trained trees with their in-bag sets and training statistics.
ConfusionMatrix
    Counts with the minority class as positive.
Metrics
    Imbalance-aware rates derived from a confusion matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
import math
import os
from typing import Any

from dataclasses_json import DataClassJsonMixin
from joblib import Parallel, delayed
import numpy as np

from .const import DEFAULT_N_TREES, THREADS_ENV
from .dataset import Dataset
from .exception_classes import ConfigError, DegenerateLabels, DimensionError, MismatchedData, RangeError
from .tree import Tree, TreeConfig, grow_tree
from .types import BRFMinorityMode, Decision, ForestSummaryDict, Sampling

_LOGGER = logging.getLogger(__name__)

NOT_OOB = -1


@dataclass(frozen=True)
class ForestConfig(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Settings of a forest.

    Attributes
    ----------
    n_trees : int
        Number of trees.
    sampling : Sampling
        Standard bootstrap or balanced (BRF) samples.
    brf_minority_mode : BRFMinorityMode
        How BRF draws the minority half.
    decision : Decision
        Rule turning forest output into labels.
    tree : TreeConfig
        Tree settings; its seed is replaced per tree.
    seed : int
        Master seed.
    n_threads : int | None
        Worker count hint; None uses all cores. Capped by ``RFDI_THREADS``.
    """

    n_trees: int = DEFAULT_N_TREES
    sampling: Sampling = Sampling.STANDARD_BOOTSTRAP
    brf_minority_mode: BRFMinorityMode = BRFMinorityMode.BOOTSTRAP
    decision: Decision = Decision.MAJORITY_VOTE
    tree: TreeConfig = field(default_factory=TreeConfig)
    seed: int = 0
    n_threads: int | None = None

    def validate(self) -> None:
        """Check the settings.

        Raises
        ------
        ConfigError
            If ``n_trees < 1`` or ``n_threads < 1``.
        """
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.n_threads is not None and self.n_threads < 1:
            raise ConfigError(f"n_threads must be >= 1, got {self.n_threads}")


def resolve_threads(hint: int | None) -> int:
    """Return the worker count for a hint, capped by ``RFDI_THREADS``.

    Parameters
    ----------
    hint : int | None
        Requested workers; None means the number of CPUs.

    Returns
    -------
    int
        Worker count, at least 1.

    Raises
    ------
    ConfigError
        If ``RFDI_THREADS`` is set but not a positive integer.
    """
    threads = hint or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            limit = int(cap)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from exc
        if limit < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {cap!r}")
        threads = min(threads, limit)
    return threads


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Return the random generator of tree ``tree_index`` under master ``seed``.

    Parameters
    ----------
    seed : int
        Master seed.
    tree_index : int
        Tree position in the forest.

    Returns
    -------
    np.random.Generator
        A generator that depends only on ``(seed, tree_index)``.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, tree_index]))


def balanced_bootstrap(y: Any, mode: BRFMinorityMode, seed: int | np.random.Generator) -> np.ndarray:
    """Draw a balanced sample of ``2 * N_min`` row indices.

    Parameters
    ----------
    y : array_like
        0/1 labels; the rarer label is the minority (label 1 on ties).
    mode : BRFMinorityMode
        ``all`` takes every minority row once plus N_min distinct majority rows;
        ``bootstrap`` draws N_min rows with replacement from each class.
    seed : int | np.random.Generator
        Seed or generator.

    Returns
    -------
    np.ndarray
        Minority indices followed by majority indices.

    Raises
    ------
    DegenerateLabels
        If a class is empty.

    Examples
    --------
    >>> balanced_bootstrap([1, 0, 0, 0], BRFMinorityMode.ALL, seed=0).size
    2
    """
    labels = np.asarray(y)
    ones = np.flatnonzero(labels == 1)
    zeros = np.flatnonzero(labels == 0)
    if ones.size == 0 or zeros.size == 0:
        raise DegenerateLabels("Balanced sampling needs both classes")
    minority, majority = (ones, zeros) if ones.size <= zeros.size else (zeros, ones)
    n_min = minority.size
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if mode == BRFMinorityMode.ALL:
        return np.concatenate([minority, rng.choice(majority, size=n_min, replace=False)])
    return np.concatenate([rng.choice(minority, size=n_min, replace=True), rng.choice(majority, size=n_min, replace=True)])


@dataclass(frozen=True, eq=False)
class Forest:  # numpydoc ignore=ES01,EX01
    """A trained forest.

    Attributes
    ----------
    trees : tuple[Tree, ...]
        The trees; tree ``i`` holds its in-bag set as ``trees[i].in_bag``.
    config : ForestConfig
        Settings used for training.
    n_rows : int
        Rows of the training data.
    n_features : int
        Predictors of the training data.
    prevalence : float
        Training minority prevalence, the RFQ threshold pi.
    n_min : int
        Training minority count.
    feature_names : tuple[str, ...]
        Predictor names.
    depth_cache : dict
        Per-tree minimal depths, filled by :mod:`rfdi.depthselect`.
    """

    trees: tuple[Tree, ...]
    config: ForestConfig
    n_rows: int
    n_features: int
    prevalence: float
    n_min: int
    feature_names: tuple[str, ...]
    depth_cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def in_bags(self) -> list[np.ndarray]:  # numpydoc ignore=ES01,EX01
        """In-bag index multisets per tree."""
        return [tree.in_bag for tree in self.trees]

    def reordered(self, order: Any) -> Forest:
        """Return the same forest with its trees in another order.

        Parameters
        ----------
        order : array_like
            Permutation of tree positions.

        Returns
        -------
        Forest
            A forest sharing the trees, with an empty depth cache.
        """
        return replace(self, trees=tuple(self.trees[i] for i in order), depth_cache={})


def _draw_in_bag(y: np.ndarray, cfg: ForestConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw the in-bag rows of one tree."""
    if cfg.sampling == Sampling.BRF:
        return balanced_bootstrap(y, cfg.brf_minority_mode, rng)
    return rng.integers(0, len(y), size=len(y))


def _build_tree(data: Dataset, cfg: ForestConfig, tree_index: int) -> Tree:
    """Sample and grow tree ``tree_index``."""
    rng = tree_rng(cfg.seed, tree_index)
    in_bag = _draw_in_bag(data.y, cfg, rng)
    tree_cfg = replace(cfg.tree, seed=int(rng.integers(0, 2**63 - 1)))
    return grow_tree(data, in_bag, tree_cfg)


def train_forest(data: Dataset, cfg: ForestConfig) -> Forest:
    """Train a forest.

    Each tree draws its in-bag rows and its growth seed from a generator keyed
    by ``(cfg.seed, tree index)``, so the result does not depend on the number of
    threads.

    Parameters
    ----------
    data : Dataset
        Training data.
    cfg : ForestConfig
        Forest settings.

    Returns
    -------
    Forest
        The trained forest.

    Raises
    ------
    ConfigError
        If ``cfg`` is invalid.
    DegenerateLabels
        If a class is empty.

    Examples
    --------
    >>> forest = train_forest(data, ForestConfig(n_trees=50, sampling=Sampling.BRF))  # doctest: +SKIP
    >>> {t.in_bag.size for t in forest.trees} == {2 * forest.n_min}  # doctest: +SKIP
    True
    """
    cfg.validate()
    tree_cfg = cfg.tree.resolve(data.p)
    cfg = replace(cfg, tree=tree_cfg)
    if data.stats.c0 == 0 or data.stats.c1 == 0:
        raise DegenerateLabels
    if cfg.sampling == Sampling.BRF and cfg.brf_minority_mode == BRFMinorityMode.ALL:
        _LOGGER.warning("BRF minority mode 'all' keeps every minority row in-bag; they are never out-of-bag")

    threads = resolve_threads(cfg.n_threads)
    _LOGGER.debug("Training %s trees on %s threads (mtry=%s)", cfg.n_trees, threads, tree_cfg.mtry)
    trees = Parallel(n_jobs=threads, prefer="threads")(delayed(_build_tree)(data, cfg, i) for i in range(cfg.n_trees))
    forest = Forest(
        trees=tuple(trees),
        config=cfg,
        n_rows=data.n,
        n_features=data.p,
        prevalence=data.stats.prevalence,
        n_min=min(data.stats.c0, data.stats.c1),
        feature_names=tuple(data.feature_names),
    )
    _LOGGER.info("Trained %s trees (%s sampling)", len(forest.trees), cfg.sampling)
    return forest


def _as_matrix(forest: Forest, x: Any) -> tuple[np.ndarray, bool]:
    """Return ``x`` as a matrix and whether it was a single vector."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != forest.n_features:
        raise DimensionError(f"Expected {forest.n_features} values per row, got shape {np.shape(x)}")
    return arr, single


def predict_proba(forest: Forest, x: Any) -> Any:
    """Return the forest minority probability.

    The probability is the average over trees of the minority fraction of the
    leaf the row reaches.

    Parameters
    ----------
    forest : Forest
        A trained forest.
    x : array_like
        One feature vector or a matrix of rows.

    Returns
    -------
    float | np.ndarray
        A probability in [0, 1] per row; a float for a single vector.

    Raises
    ------
    DimensionError
        If the width does not match the training data.
    """
    arr, single = _as_matrix(forest, x)
    total = np.zeros(arr.shape[0])
    for tree in forest.trees:
        total += tree.leaf_fraction(arr)
    proba = total / len(forest.trees)
    return float(proba[0]) if single else proba


def vote_share(forest: Forest, x: Any) -> np.ndarray:
    """Return the share of trees voting for the minority.

    A tree votes minority when its leaf minority fraction is at least 0.5.

    Parameters
    ----------
    forest : Forest
        A trained forest.
    x : array_like
        Matrix of rows.

    Returns
    -------
    np.ndarray
        Vote shares in [0, 1].
    """
    arr, _ = _as_matrix(forest, x)
    votes = np.zeros(arr.shape[0])
    for tree in forest.trees:
        votes += tree.leaf_fraction(arr) >= 0.5
    return votes / len(forest.trees)


def _oob_totals(forest: Forest, data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accumulate OOB leaf fractions, votes and tree counts per row."""
    if data.n != forest.n_rows or data.p != forest.n_features:
        raise MismatchedData(f"Forest was trained on {forest.n_rows}x{forest.n_features}, got {data.n}x{data.p}")
    fractions = np.zeros(data.n)
    votes = np.zeros(data.n)
    counts = np.zeros(data.n, dtype=np.int64)
    for tree in forest.trees:
        oob = np.flatnonzero(np.bincount(tree.in_bag, minlength=data.n) == 0)
        if oob.size == 0:
            continue
        leaf = tree.leaf_fraction(data.x[oob])
        fractions[oob] += leaf
        votes[oob] += leaf >= 0.5
        counts[oob] += 1
    return fractions, votes, counts


def oob_proba(forest: Forest, data: Dataset) -> np.ndarray:
    """Return out-of-bag minority probabilities.

    Parameters
    ----------
    forest : Forest
        A forest trained on ``data``.
    data : Dataset
        The training data.

    Returns
    -------
    np.ndarray
        Per-row average leaf fraction over trees not holding the row in-bag;
        NaN where every tree holds it.

    Raises
    ------
    MismatchedData
        If ``data`` does not have the training shape.
    """
    fractions, _, counts = _oob_totals(forest, data)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, fractions / np.maximum(counts, 1), np.nan)


def rfq_classify(p_hat: float, pi: float) -> int:
    """Apply the RFQ rule: minority iff ``p_hat >= pi``.

    Parameters
    ----------
    p_hat : float
        Forest minority probability.
    pi : float
        Training minority prevalence.

    Returns
    -------
    int
        1 for the minority class, else 0.

    Raises
    ------
    RangeError
        If ``p_hat`` is not in [0, 1] or ``pi`` not in (0, 1].

    Examples
    --------
    >>> rfq_classify(0.25, 0.25)
    1
    """
    if not 0.0 <= p_hat <= 1.0 or not 0.0 < pi <= 1.0:
        raise RangeError(f"Need p_hat in [0, 1] and pi in (0, 1], got p_hat={p_hat}, pi={pi}")
    return int(p_hat >= pi)


def classify(proba: np.ndarray, votes: np.ndarray | None, decision: Decision, pi: float) -> np.ndarray:
    """Turn probabilities (or vote shares) into labels.

    Parameters
    ----------
    proba : np.ndarray
        Minority probabilities; NaN rows stay unlabelled.
    votes : np.ndarray | None
        Minority vote shares, required for majority voting.
    decision : Decision
        Rule to apply.
    pi : float
        Training prevalence for the RFQ rule.

    Returns
    -------
    np.ndarray
        Labels in {0, 1}, or -1 where ``proba`` is NaN.

    Raises
    ------
    RangeError
        If ``pi`` is not in (0, 1].
    ConfigError
        If majority voting is requested without vote shares.
    """
    if decision == Decision.RFQ:
        if not 0.0 < pi <= 1.0:
            raise RangeError(f"pi must be in (0, 1], got {pi}")
        labels = proba >= pi
    elif decision == Decision.THRESHOLD_HALF:
        labels = proba >= 0.5
    else:
        if votes is None:
            raise ConfigError("Majority voting needs vote shares")
        labels = votes >= 0.5
    return np.where(np.isnan(proba), NOT_OOB, labels.astype(np.int64))


def predict(forest: Forest, x: Any, decision: Decision | None = None) -> np.ndarray:
    """Predict labels under a decision rule.

    Parameters
    ----------
    forest : Forest
        A trained forest.
    x : array_like
        Matrix of rows.
    decision : Decision, optional
        Rule to apply; defaults to the forest's configured rule.

    Returns
    -------
    np.ndarray
        Labels in {0, 1}.
    """
    arr, _ = _as_matrix(forest, x)
    decision = decision or forest.config.decision
    votes = vote_share(forest, arr) if decision == Decision.MAJORITY_VOTE else None
    return classify(np.atleast_1d(predict_proba(forest, arr)), votes, decision, forest.prevalence)


def oob_predict(forest: Forest, data: Dataset, decision: Decision | None = None) -> np.ndarray:
    """Predict out-of-bag labels under a decision rule.

    Parameters
    ----------
    forest : Forest
        A forest trained on ``data``.
    data : Dataset
        The training data.
    decision : Decision, optional
        Rule to apply; defaults to the forest's configured rule.

    Returns
    -------
    np.ndarray
        Labels in {0, 1}, or -1 for rows never out-of-bag.
    """
    fractions, votes, counts = _oob_totals(forest, data)
    safe = np.maximum(counts, 1)
    proba = np.where(counts > 0, fractions / safe, np.nan)
    return classify(proba, votes / safe, decision or forest.config.decision, forest.prevalence)


@dataclass(frozen=True)
class ConfusionMatrix(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Confusion counts with the minority (label 1) as positive class.

    Attributes
    ----------
    tp : int
        Minority rows predicted minority.
    fp : int
        Majority rows predicted minority.
    tn : int
        Majority rows predicted majority.
    fn : int
        Minority rows predicted majority.
    """

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: ConfusionMatrix) -> ConfusionMatrix:  # numpydoc ignore=ES01,EX01
        """Pool two confusion matrices."""
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:  # numpydoc ignore=ES01,EX01
        """Number of evaluated rows."""
        return self.tp + self.fp + self.tn + self.fn


def confusion_matrix(y_true: Any, y_pred: Any) -> ConfusionMatrix:
    """Count outcomes, skipping rows predicted -1.

    Parameters
    ----------
    y_true : array_like
        True labels.
    y_pred : array_like
        Predicted labels; -1 marks rows without a prediction.

    Returns
    -------
    ConfusionMatrix
        The counts.
    """
    truth = np.asarray(y_true)
    pred = np.asarray(y_pred)
    keep = pred != NOT_OOB
    truth, pred = truth[keep], pred[keep]
    return ConfusionMatrix(
        tp=int(np.count_nonzero((truth == 1) & (pred == 1))),
        fp=int(np.count_nonzero((truth == 0) & (pred == 1))),
        tn=int(np.count_nonzero((truth == 0) & (pred == 0))),
        fn=int(np.count_nonzero((truth == 1) & (pred == 0))),
    )


def _ratio(num: float, den: float) -> float | None:
    """Divide, returning None for a zero denominator."""
    return num / den if den else None


@dataclass(frozen=True)
class Metrics(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Imbalance-aware metrics; None marks an undefined value.

    Attributes
    ----------
    tpr : float | None
        True positive rate (recall of the minority).
    tnr : float | None
        True negative rate.
    gmean : float | None
        Geometric mean of TPR and TNR.
    precision : float | None
        Minority precision.
    recall : float | None
        Same as ``tpr``.
    f1 : float | None
        Harmonic mean of precision and recall.
    balanced_accuracy : float | None
        Mean of TPR and TNR.
    """

    tpr: float | None
    tnr: float | None
    gmean: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    balanced_accuracy: float | None


def metrics(cm: ConfusionMatrix) -> Metrics:
    """Compute metrics from a confusion matrix.

    Parameters
    ----------
    cm : ConfusionMatrix
        The counts.

    Returns
    -------
    Metrics
        Rates; metrics with a zero denominator, or built on one, are None.

    Examples
    --------
    >>> round(metrics(ConfusionMatrix(tp=8, fp=10, tn=90, fn=2)).gmean, 4)
    0.8485
    """
    # zero-denominator rates are None rather than the 0 or NaN sklearn.metrics would give
    tpr = _ratio(cm.tp, cm.tp + cm.fn)
    tnr = _ratio(cm.tn, cm.tn + cm.fp)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    both = tpr is not None and tnr is not None
    f1 = None
    if precision is not None and tpr is not None:
        f1 = _ratio(2 * precision * tpr, precision + tpr)
    return Metrics(
        tpr=tpr,
        tnr=tnr,
        gmean=math.sqrt(tpr * tnr) if both else None,
        precision=precision,
        recall=tpr,
        f1=f1,
        balanced_accuracy=(tpr + tnr) / 2 if both else None,
    )


def summarize(forest: Forest, data: Dataset) -> ForestSummaryDict:
    """Build the forest summary document from out-of-bag predictions.

    Parameters
    ----------
    forest : Forest
        A forest trained on ``data``.
    data : Dataset
        The training data.

    Returns
    -------
    ForestSummaryDict
        Config echo, pi, N_min, OOB coverage, confusion counts and metrics.
    """
    labels = oob_predict(forest, data)
    cm = confusion_matrix(data.y, labels)
    return {
        "config": forest.config.to_dict(),
        "prevalence": forest.prevalence,
        "n_min": forest.n_min,
        "oob_coverage": float(np.count_nonzero(labels != NOT_OOB) / data.n),
        "confusion": cm.to_dict(),
        "metrics": metrics(cm).to_dict(),
    }
