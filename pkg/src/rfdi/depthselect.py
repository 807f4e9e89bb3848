# numpydoc ignore=EX01,GL06,GL07
"""Minimal depth feature selection.

Computes each variable's minimal depth, the null minimal depth distribution of
an uninformative variable given a tree's topology, and mean thresholds from the
standard (``p``) and adjusted (``p*``) versions of that distribution.

Classes
-------
AdjustmentContext
    Scaling parameter, adjustment factor and scaled variable count.
DepthDistribution
    Null minimal depth mass over depths ``0 .. D(T)``.
VariableDepth
    Forest-averaged minimal depth of one variable.
SelectionReport
    Thresholds and selections of one forest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

from dataclasses_json import DataClassJsonMixin
import numpy as np

from .const import P_STAR_EPSILON
from .dataset import ImbalanceStats
from .exception_classes import AdjustmentOutOfRange, RangeError, VariableIndexError
from .forest import Forest
from .tree import Tree, TreeTopology, topology
from .types import ThresholdMode

_LOGGER = logging.getLogger(__name__)

_DEPTHS_KEY = "minimal_depths"


@dataclass(frozen=True)
class AdjustmentContext(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Adjustment of the variable count for ``n >> p``.

    Attributes
    ----------
    n : int
        Number of observations.
    p : int
        Number of predictors.
    lambda_ : float
        Scaling parameter ``sqrt(n/p) + ln(p)``.
    psi : float
        Adjustment factor ``ln(n/p) / lambda_``.
    p_star : float
        Scaled variable count ``p * psi``.
    """

    n: int
    p: int
    lambda_: float
    psi: float
    p_star: float


def adjustment_factor(n: int, p: int) -> AdjustmentContext:
    """Compute the adjustment factor and the scaled variable count.

    Parameters
    ----------
    n : int
        Number of observations.
    p : int
        Number of predictors.

    Returns
    -------
    AdjustmentContext
        ``lambda = sqrt(n/p) + ln(p)``, ``psi = ln(n/p) / lambda``, ``p* = p * psi``.

    Raises
    ------
    AdjustmentOutOfRange
        If ``n <= p``, ``p < 1`` or ``p* <= 1``.

    Examples
    --------
    >>> ctx = adjustment_factor(48842, 15)
    >>> round(ctx.psi, 5), round(ctx.p_star, 4)
    (0.13533, 2.0299)
    """
    if p < 1 or n <= p:
        raise AdjustmentOutOfRange(f"Adjustment needs n > p >= 1, got n={n}, p={p}")
    ratio = n / p
    lambda_ = math.sqrt(ratio) + math.log(p)
    psi = math.log(ratio) / lambda_
    p_star = p * psi
    if p_star <= 1 + P_STAR_EPSILON:
        raise AdjustmentOutOfRange(f"Scaled variable count p*={p_star:.6g} must exceed 1 (n={n}, p={p})")
    return AdjustmentContext(n=n, p=p, lambda_=lambda_, psi=psi, p_star=p_star)


def _log_keep(p_eff: float) -> float:
    """Return ``ln(1 - 1/p_eff)``, the log-probability a node does not split on v."""
    if not p_eff > 1:
        raise RangeError(f"p_eff must exceed 1, got {p_eff}")
    return math.log1p(-1.0 / p_eff)


@dataclass(frozen=True)
class SplitDepthProbability:  # numpydoc ignore=ES01,EX01
    """Log-probabilities of not splitting above and at a depth.

    Attributes
    ----------
    p1 : float
        ``L_d * ln(1 - 1/p_eff)``, no split on v above depth d.
    p2 : float
        ``l_d * ln(1 - 1/p_eff)``, no split on v at depth d.
    prob : float
        ``exp(p1) * (1 - exp(p2))``, first split on v at depth d.
    """

    p1: float
    p2: float
    prob: float


def split_depth_probability(cumulative: int, level: int, p_eff: float) -> SplitDepthProbability:
    """Return the probability that a noisy variable first splits at a depth.

    Parameters
    ----------
    cumulative : int
        ``L_d``, non-terminal nodes above the depth.
    level : int
        ``l_d``, non-terminal nodes at the depth.
    p_eff : float
        Effective variable count, above 1.

    Returns
    -------
    SplitDepthProbability
        ``P1``, ``P2`` and the first-split probability.

    Raises
    ------
    RangeError
        If ``p_eff <= 1`` or a count is negative.

    Examples
    --------
    >>> split_depth_probability(1, 2, 2.0).prob
    0.375
    """
    if cumulative < 0 or level < 0:
        raise RangeError(f"Node counts must be >= 0, got L_d={cumulative}, l_d={level}")
    log_keep = _log_keep(p_eff)
    p1 = cumulative * log_keep
    p2 = level * log_keep
    return SplitDepthProbability(p1=p1, p2=p2, prob=math.exp(p1) * -math.expm1(p2))


@dataclass(frozen=True)
class DepthDistribution:  # numpydoc ignore=ES01,EX01
    """Null minimal depth distribution of a noisy variable.

    Attributes
    ----------
    p_eff : float
        ``p`` for the standard distribution, ``p*`` for the adjusted one.
    mass : np.ndarray
        ``P(D_v = d)`` for ``d = 0 .. D(T)-1``.
    residual : float
        Mass at ``D(T)``: the variable never splits.
    mean : float
        ``sum(d * mass[d]) + D(T) * residual``.
    """

    p_eff: float
    mass: np.ndarray
    residual: float
    mean: float

    @property
    def depth_max(self) -> int:  # numpydoc ignore=ES01,EX01
        """D(T) of the underlying topology."""
        return len(self.mass)


def null_depth_distribution(topo: TreeTopology, p_eff: float) -> DepthDistribution:
    """Compute the minimal depth distribution of a noisy variable.

    ``mass[d] = (1 - (1 - 1/p_eff)**l_d) * prod_{j<d} (1 - 1/p_eff)**l_j``, evaluated
    as exponentials of log-sums. The mass left after depth ``D(T)-1`` is put at
    ``D(T)`` so the distribution sums to one.

    Parameters
    ----------
    topo : TreeTopology
        Tree topology.
    p_eff : float
        Effective variable count, above 1.

    Returns
    -------
    DepthDistribution
        The distribution and its mean.

    Raises
    ------
    RangeError
        If ``p_eff <= 1``.

    Examples
    --------
    >>> dist = null_depth_distribution(TreeTopology.from_levels([1, 2]), 2.0)
    >>> dist.mass.tolist(), dist.residual, dist.mean
    ([0.5, 0.375], 0.125, 0.625)
    """
    log_keep = _log_keep(p_eff)
    levels = topo.levels.astype(np.float64)
    cumulative = topo.cumulative.astype(np.float64)
    mass = np.exp(cumulative * log_keep) * -np.expm1(levels * log_keep)
    residual = math.exp(float(levels.sum()) * log_keep)
    depths = np.arange(topo.depth_max, dtype=np.float64)
    mean = math.fsum((depths * mass).tolist()) + topo.depth_max * residual
    return DepthDistribution(p_eff=p_eff, mass=mass, residual=residual, mean=mean)


def minimal_depth(tree: Tree, v: int) -> int:
    """Return the depth of the shallowest node splitting on ``v``.

    This is the root depth of ``v``'s closest first-order maximal subtree.

    Parameters
    ----------
    tree : Tree
        A grown tree.
    v : int
        Variable index.

    Returns
    -------
    int
        The minimal depth, or ``D(T)`` when ``v`` never splits.

    Raises
    ------
    VariableIndexError
        If ``v`` is not in ``0 .. p-1``.
    """
    if not 0 <= v < tree.n_features:
        raise VariableIndexError(f"Variable {v} not in 0..{tree.n_features - 1}")
    return int(_tree_minimal_depths(tree)[v])


def _tree_minimal_depths(tree: Tree) -> np.ndarray:
    """Return the minimal depth of every variable in one tree."""
    depths = np.full(tree.n_features, tree.max_depth, dtype=np.int64)
    internal = ~tree.is_leaf
    np.minimum.at(depths, tree.variable[internal], tree.depth[internal])
    return depths


def tree_minimal_depths(forest: Forest) -> np.ndarray:
    """Return the ``n_trees x p`` matrix of per-tree minimal depths.

    The matrix is cached on the forest.

    Parameters
    ----------
    forest : Forest
        A trained forest.

    Returns
    -------
    np.ndarray
        Minimal depth of each variable in each tree.
    """
    cached = forest.depth_cache.get(_DEPTHS_KEY)
    if cached is None:
        cached = np.vstack([_tree_minimal_depths(tree) for tree in forest.trees])
        cached.setflags(write=False)
        forest.depth_cache[_DEPTHS_KEY] = cached
    return cached


def forest_minimal_depth(forest: Forest) -> np.ndarray:
    """Return each variable's minimal depth averaged over the trees.

    Trees where a variable never splits contribute their ``D(T)``.

    Parameters
    ----------
    forest : Forest
        A trained forest.

    Returns
    -------
    np.ndarray
        ``D_v`` bar per variable.
    """
    return tree_minimal_depths(forest).sum(axis=0) / len(forest.trees)


def effective_count(mode: ThresholdMode, stats: ImbalanceStats) -> float:
    """Return ``p`` for the standard mode and ``p*`` for the adjusted mode.

    Parameters
    ----------
    mode : ThresholdMode
        Threshold mode.
    stats : ImbalanceStats
        Statistics of the training data.

    Returns
    -------
    float
        The effective variable count.

    Raises
    ------
    AdjustmentOutOfRange
        In adjusted mode, if the adjustment does not apply.
    """
    if mode == ThresholdMode.ADJUSTED:
        return adjustment_factor(stats.n, stats.p).p_star
    return float(stats.p)


def forest_threshold(forest: Forest, mode: ThresholdMode, data_stats: ImbalanceStats) -> float:
    """Return the mean null minimal depth averaged over the forest's trees.

    Parameters
    ----------
    forest : Forest
        A trained forest.
    mode : ThresholdMode
        ``standard`` uses ``p``, ``adjusted`` uses ``p*``.
    data_stats : ImbalanceStats
        Statistics of the training data.

    Returns
    -------
    float
        The threshold.

    Raises
    ------
    AdjustmentOutOfRange
        In adjusted mode, if the adjustment does not apply.
    """
    p_eff = effective_count(mode, data_stats)
    means = [null_depth_distribution(topology(tree), p_eff).mean for tree in forest.trees]
    return math.fsum(means) / len(means)


@dataclass(frozen=True)
class VariableDepth(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Minimal depth summary of one variable.

    Attributes
    ----------
    name : str
        Variable name.
    mean_depth : float
        Forest-averaged minimal depth.
    depth_variance : float
        Variance of the per-tree minimal depths.
    """

    name: str
    mean_depth: float
    depth_variance: float


@dataclass(frozen=True)
class SelectionReport(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Minimal depth thresholds and selections of one forest.

    Attributes
    ----------
    variables : list[VariableDepth]
        Per-variable depths in column order.
    threshold_standard : float
        Mean of the standard null distribution.
    threshold_adjusted : float | None
        Mean of the adjusted null distribution; None when not applicable.
    selected_standard : list[str]
        Variables with depth at most the standard threshold.
    selected_adjusted : list[str] | None
        Variables with depth at most the adjusted threshold.
    adjustment : AdjustmentContext | None
        The adjustment used for the adjusted threshold.
    metadata : dict
        Seed, tree count and run information.
    """

    variables: list[VariableDepth]
    threshold_standard: float
    threshold_adjusted: float | None
    selected_standard: list[str]
    selected_adjusted: list[str] | None
    adjustment: AdjustmentContext | None = None
    metadata: dict = field(default_factory=dict)

    def threshold(self, mode: ThresholdMode) -> float | None:  # numpydoc ignore=ES01,EX01
        """Return the threshold of ``mode``.

        Parameters
        ----------
        mode : ThresholdMode
            Threshold mode.

        Returns
        -------
        float | None
            The threshold.
        """
        return self.threshold_adjusted if mode == ThresholdMode.ADJUSTED else self.threshold_standard

    def selected(self, mode: ThresholdMode) -> list[str] | None:  # numpydoc ignore=ES01,EX01
        """Return the selection of ``mode``.

        Parameters
        ----------
        mode : ThresholdMode
            Threshold mode.

        Returns
        -------
        list[str] | None
            The selected variable names.
        """
        return self.selected_adjusted if mode == ThresholdMode.ADJUSTED else self.selected_standard


def _select(names: tuple[str, ...], depths: np.ndarray, threshold: float) -> list[str]:
    """Return names whose depth is at most ``threshold``."""
    return [name for name, depth in zip(names, depths, strict=True) if depth <= threshold]


def select_features(forest: Forest, data_stats: ImbalanceStats, metadata: dict | None = None) -> SelectionReport:
    """Select variables whose averaged minimal depth is at most the threshold.

    Both the standard and the adjusted thresholds are computed. When the
    adjustment does not apply the adjusted fields are None and a warning is
    logged; the standard selection is still reported.

    Parameters
    ----------
    forest : Forest
        A trained forest.
    data_stats : ImbalanceStats
        Statistics of the training data.
    metadata : dict, optional
        Extra run information stored in the report.

    Returns
    -------
    SelectionReport
        Thresholds, selections and per-variable depths.

    Examples
    --------
    >>> report = select_features(forest, data.stats)  # doctest: +SKIP
    >>> report.threshold_adjusted < report.threshold_standard  # doctest: +SKIP
    True
    """
    per_tree = tree_minimal_depths(forest)
    mean_depths = per_tree.sum(axis=0) / per_tree.shape[0]
    variances = per_tree.var(axis=0)
    variables = [
        VariableDepth(name, float(m), float(v))
        for name, m, v in zip(forest.feature_names, mean_depths, variances, strict=True)
    ]
    standard = forest_threshold(forest, ThresholdMode.STANDARD, data_stats)
    adjusted: float | None = None
    selected_adjusted: list[str] | None = None
    context: AdjustmentContext | None = None
    try:
        context = adjustment_factor(data_stats.n, data_stats.p)
        adjusted = forest_threshold(forest, ThresholdMode.ADJUSTED, data_stats)
        selected_adjusted = _select(forest.feature_names, mean_depths, adjusted)
    except AdjustmentOutOfRange as exc:
        _LOGGER.warning("Adjusted threshold not available: %s", exc)

    report = SelectionReport(
        variables=variables,
        threshold_standard=standard,
        threshold_adjusted=adjusted,
        selected_standard=_select(forest.feature_names, mean_depths, standard),
        selected_adjusted=selected_adjusted,
        adjustment=context,
        metadata={"seed": forest.config.seed, "n_trees": len(forest.trees)} | (metadata or {}),
    )
    _LOGGER.info(
        "Thresholds: standard=%.4f (%s selected), adjusted=%s (%s selected)",
        standard,
        len(report.selected_standard),
        "n/a" if adjusted is None else f"{adjusted:.4f}",
        "n/a" if selected_adjusted is None else len(selected_adjusted),
    )
    return report


def variable_ranking(report: SelectionReport) -> list[VariableDepth]:
    """Order variables by increasing averaged minimal depth.

    Parameters
    ----------
    report : SelectionReport
        A selection report.

    Returns
    -------
    list[VariableDepth]
        Variables, most important first; ties keep column order.
    """
    return sorted(report.variables, key=lambda var: var.mean_depth)
