# numpydoc ignore=EX01
"""
Types for rfdi.

This module defines the enumerations used in configurations and the TypedDicts
describing the JSON documents written by the library and the command line.

See Also
--------
rfdi.report : Builds the selection report documents described here.
"""

from enum import StrEnum
from typing import TypedDict


class ColumnKind(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """Kind of a predictor column."""

    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Sampling(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """Per-tree sampling scheme."""

    STANDARD_BOOTSTRAP = "standard_bootstrap"
    BRF = "brf"


class BRFMinorityMode(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """How the minority half of a balanced sample is drawn.

    ``bootstrap`` draws N_min minority rows with replacement, ``all`` takes every
    minority row exactly once.
    """

    BOOTSTRAP = "bootstrap"
    ALL = "all"


class Decision(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """Decision rule turning forest output into a label."""

    RFQ = "rfq"
    MAJORITY_VOTE = "majority_vote"
    THRESHOLD_HALF = "threshold_half"


class ThresholdMode(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """Null minimal depth distribution used for the threshold."""

    STANDARD = "standard"
    ADJUSTED = "adjusted"


class ModelKind(StrEnum):  # numpydoc ignore=ES01,SA01,EX01
    """Forest variants offered on the command line."""

    RF = "rf"
    BRF = "brf"
    RFQ = "rfq"


class TreeNodeDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """
    A TypedDict for one node of a tree dump.

    Attributes
    ----------
    id : int
        Node index.
    depth : int
        Distance from the root.
    variable : int | None
        Split variable, None for leaves.
    threshold : float | None
        Split threshold (go left iff value <= threshold), None for leaves.
    left : int | None
        Left child index.
    right : int | None
        Right child index.
    counts : list[int]
        Class counts ``[c0, c1]`` of the in-bag rows reaching the node.
    """

    id: int
    depth: int
    variable: int | None
    threshold: float | None
    left: int | None
    right: int | None
    counts: list[int]


class TreeDumpDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """
    A TypedDict for a tree dump.

    Attributes
    ----------
    max_depth : int
        D(T), the largest node depth.
    n_in_bag : int
        Size of the in-bag multiset.
    nodes : list[TreeNodeDict]
        All nodes, root first.
    """

    max_depth: int
    n_in_bag: int
    nodes: list[TreeNodeDict]


class ConfusionDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """A TypedDict for a confusion matrix (positive = minority = label 1)."""

    tp: int
    fp: int
    tn: int
    fn: int


class MetricsDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """
    A TypedDict for the metrics block.

    Undefined metrics (zero denominators) are ``None``.
    """

    tpr: float | None
    tnr: float | None
    gmean: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    balanced_accuracy: float | None


class ForestSummaryDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """
    A TypedDict for the forest summary document.

    Attributes
    ----------
    config : dict
        Echo of the forest configuration.
    prevalence : float
        Training minority prevalence pi used by the RFQ rule.
    n_min : int
        Training minority count.
    oob_coverage : float
        Share of rows that are out-of-bag for at least one tree.
    confusion : ConfusionDict
        OOB confusion matrix under the configured decision rule.
    metrics : MetricsDict
        Metrics derived from the confusion matrix.
    """

    config: dict
    prevalence: float
    n_min: int
    oob_coverage: float
    confusion: ConfusionDict
    metrics: MetricsDict


class ReportDict(TypedDict):  # numpydoc ignore=ES01,SA01,EX01
    """
    A TypedDict for the selection report written by ``rfdi select``.

    Attributes
    ----------
    config : dict
        Run configuration echo, including the creation timestamp.
    dataset_stats : dict
        Imbalance statistics of the input data.
    thresholds : dict
        Mean and standard deviation over runs of both thresholds.
    variables : list[dict]
        Per-variable averaged minimal depth, spread and selection shares.
    selected : dict
        Consensus selections per threshold mode.
    metrics : dict
        Averaged classification metrics and the pooled confusion matrix.
    runs : list[dict]
        Per-run raw records.
    """

    config: dict
    dataset_stats: dict
    thresholds: dict
    variables: list[dict]
    selected: dict
    metrics: dict
    runs: list[dict]
