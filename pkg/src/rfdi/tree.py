# numpydoc ignore=EX01,GL06,GL07
"""CART classification trees.

Trees are grown to purity on a (possibly repeated) set of in-bag rows with a
random subset of candidate features at every node, and keep the topology
needed for minimal depth analysis.

Classes
-------
TreeConfig
    Split and stopping settings of one tree.
SplitRule
    A split variable with its threshold and impurity decrease.
Tree
    Node arrays of a grown tree.
TreeTopology
    Per-depth counts of non-terminal nodes.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, replace
import logging
import math
from typing import Any

from dataclasses_json import DataClassJsonMixin
import numpy as np

from .const import DEFAULT_NODESIZE
from .dataset import Dataset
from .exception_classes import ConfigError, DimensionError
from .types import TreeDumpDict, TreeNodeDict

_LOGGER = logging.getLogger(__name__)

LEAF = -1


def default_mtry(p: int) -> int:  # numpydoc ignore=ES01,EX01
    """Return the default number of split candidates, ``max(1, floor(p / 3))``.

    Parameters
    ----------
    p : int
        Number of predictors.

    Returns
    -------
    int
        The candidate count.
    """
    return max(1, p // 3)


@dataclass(frozen=True)
class TreeConfig(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Settings for growing one tree.

    Attributes
    ----------
    mtry : int | None
        Candidate features drawn at each node; None means ``max(1, p // 3)``.
    nodesize : int
        A node with at most this many samples becomes a leaf.
    max_depth : int | None
        Depth at which growth stops; None grows to purity.
    seed : int
        Random seed for the candidate draws.
    debug : bool
        Record the candidate set drawn at every node.
    """

    mtry: int | None = None
    nodesize: int = DEFAULT_NODESIZE
    max_depth: int | None = None
    seed: int = 0
    debug: bool = False

    def resolve(self, p: int) -> TreeConfig:
        """Fill in the default ``mtry`` for ``p`` predictors and validate.

        Parameters
        ----------
        p : int
            Number of predictors.

        Returns
        -------
        TreeConfig
            A config with a concrete ``mtry``.

        Raises
        ------
        ConfigError
            If ``mtry`` is not in ``1..p``, ``nodesize < 1`` or ``max_depth < 0``.
        """
        cfg = self if self.mtry is not None else replace(self, mtry=default_mtry(p))
        if not 1 <= cfg.mtry <= p:
            raise ConfigError(f"mtry must be in 1..{p}, got {cfg.mtry}")
        if cfg.nodesize < 1:
            raise ConfigError(f"nodesize must be >= 1, got {cfg.nodesize}")
        if cfg.max_depth is not None and cfg.max_depth < 0:
            raise ConfigError(f"max_depth must be >= 0, got {cfg.max_depth}")
        return cfg


@dataclass(frozen=True)
class SplitRule:  # numpydoc ignore=ES01,EX01
    """A binary split: rows with ``x[variable] <= threshold`` go left.

    Attributes
    ----------
    variable : int
        Split variable index.
    threshold : float
        Split threshold.
    decrease : float
        Gini impurity decrease of the split.
    """

    variable: int
    threshold: float
    decrease: float


def _best_split(x: np.ndarray, y: np.ndarray, rows: np.ndarray, candidates: Iterable[int]) -> SplitRule | None:
    """Search the best Gini split of ``rows`` over ``candidates``."""
    y_node = y[rows]
    m = len(rows)
    pos = int(y_node.sum())
    if pos in (0, m):
        return None
    parent = 2.0 * pos * (m - pos) / (m * m)
    n_left = np.arange(1, m, dtype=np.float64)
    n_right = m - n_left

    best: SplitRule | None = None
    best_gain = -math.inf
    for variable in sorted(int(c) for c in candidates):
        values = x[rows, variable]
        order = np.argsort(values, kind="stable")
        ordered = values[order]
        distinct = ordered[1:] > ordered[:-1]
        if not distinct.any():
            continue
        pos_left = np.cumsum(y_node[order])[:-1]
        pos_right = pos - pos_left
        child = 2.0 * (pos_left * (n_left - pos_left) / n_left + pos_right * (n_right - pos_right) / n_right) / m
        gain = np.where(distinct, parent - child, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            lo, hi = float(ordered[i]), float(ordered[i + 1])
            threshold = lo + (hi - lo) / 2.0
            if not lo <= threshold < hi:
                threshold = lo
            best = SplitRule(variable, threshold, float(gain[i]))
            best_gain = gain[i]
    return best


def best_split(x: Any, y: Any, candidates: Iterable[int]) -> SplitRule | None:
    """Return the split maximizing the Gini impurity decrease.

    All midpoints between consecutive distinct sorted values of every candidate
    are scored. Ties go to the lower variable index, then the lower threshold.

    Parameters
    ----------
    x : array_like
        Feature matrix of the node's rows.
    y : array_like
        0/1 labels of the node's rows.
    candidates : Iterable[int]
        Candidate variable indices.

    Returns
    -------
    SplitRule | None
        The best split, or None when the node is pure or no candidate has two
        distinct values.

    Examples
    --------
    >>> best_split([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1], [0])
    SplitRule(variable=0, threshold=2.5, decrease=0.5)
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if x_arr.ndim == 1:
        x_arr = x_arr.reshape(-1, 1)
    y_arr = np.asarray(y, dtype=np.int64)
    return _best_split(x_arr, y_arr, np.arange(len(y_arr)), candidates)


@dataclass(frozen=True)
class TreeTopology:  # numpydoc ignore=ES01,EX01
    """Depth profile of the non-terminal nodes of a tree.

    Attributes
    ----------
    depth_max : int
        D(T), the maximum node depth.
    levels : np.ndarray
        ``levels[d]`` is the number of non-terminal nodes at depth ``d`` for
        ``d = 0 .. D(T)-1``.
    cumulative : np.ndarray
        ``cumulative[d]`` is the number of non-terminal nodes above depth ``d``.
    """

    depth_max: int
    levels: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_levels(cls, levels: Iterable[int]) -> TreeTopology:
        """Build a topology from per-depth non-terminal counts.

        Parameters
        ----------
        levels : Iterable[int]
            Non-terminal node counts at depths ``0 .. D(T)-1``.

        Returns
        -------
        TreeTopology
            The topology, with ``D(T) = len(levels)``.

        Examples
        --------
        >>> TreeTopology.from_levels([1, 2]).cumulative
        array([0, 1])
        """
        ell = np.asarray(list(levels), dtype=np.int64)
        cumulative = np.concatenate(([0], np.cumsum(ell)[:-1])) if ell.size else np.zeros(0, dtype=np.int64)
        return cls(len(ell), ell, cumulative.astype(np.int64))


@dataclass(frozen=True, eq=False)
class Tree:  # numpydoc ignore=ES01,EX01
    """A grown classification tree stored as parallel node arrays.

    Node 0 is the root. Leaves have ``variable == -1``.

    Attributes
    ----------
    variable : np.ndarray
        Split variable per node.
    threshold : np.ndarray
        Split threshold per node (NaN for leaves).
    left : np.ndarray
        Left child per node (-1 for leaves).
    right : np.ndarray
        Right child per node (-1 for leaves).
    depth : np.ndarray
        Depth per node.
    counts : np.ndarray
        ``n_nodes x 2`` class counts of in-bag rows reaching each node.
    in_bag : np.ndarray
        Row indices (with repetitions) the tree was grown on.
    n_features : int
        Number of predictors.
    candidates : tuple[tuple[int, ...], ...] | None
        Candidate variables drawn per node, recorded in debug mode.
    """

    variable: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    depth: np.ndarray
    counts: np.ndarray
    in_bag: np.ndarray
    n_features: int
    candidates: tuple[tuple[int, ...], ...] | None = None

    @property
    def n_nodes(self) -> int:  # numpydoc ignore=ES01,EX01
        """Number of nodes."""
        return len(self.variable)

    @property
    def is_leaf(self) -> np.ndarray:  # numpydoc ignore=ES01,EX01
        """Boolean leaf mask."""
        return self.variable == LEAF

    @property
    def max_depth(self) -> int:  # numpydoc ignore=ES01,EX01
        """D(T), the maximum node depth."""
        return int(self.depth.max())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Route rows to leaves.

        Parameters
        ----------
        x : np.ndarray
            ``m x p`` feature matrix.

        Returns
        -------
        np.ndarray
            Leaf index reached by each row.
        """
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.variable[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = x[active, self.variable[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.variable[node[active]] != LEAF]
        return node

    def leaf_fraction(self, x: np.ndarray) -> np.ndarray:  # numpydoc ignore=ES01,EX01
        """Return the minority fraction ``c1 / (c0 + c1)`` of the leaf each row reaches.

        Parameters
        ----------
        x : np.ndarray
            ``m x p`` feature matrix.

        Returns
        -------
        np.ndarray
            Leaf minority fractions.
        """
        counts = self.counts[self.apply(x)]
        return counts[:, 1] / counts.sum(axis=1)

    def to_dict(self) -> TreeDumpDict:
        """Dump the tree as a JSON-safe document.

        Returns
        -------
        TreeDumpDict
            Nodes with depth, variable, threshold, children and class counts.
        """
        nodes: list[TreeNodeDict] = []
        for i in range(self.n_nodes):
            leaf = bool(self.variable[i] == LEAF)
            nodes.append(
                {
                    "id": i,
                    "depth": int(self.depth[i]),
                    "variable": None if leaf else int(self.variable[i]),
                    "threshold": None if leaf else float(self.threshold[i]),
                    "left": None if leaf else int(self.left[i]),
                    "right": None if leaf else int(self.right[i]),
                    "counts": [int(self.counts[i, 0]), int(self.counts[i, 1])],
                }
            )
        return {"max_depth": self.max_depth, "n_in_bag": len(self.in_bag), "nodes": nodes}


def grow_tree(data: Dataset, in_bag: Any, cfg: TreeConfig) -> Tree:
    """Grow a tree on the in-bag rows of ``data``.

    Nodes are expanded depth first, left child before right. At every node
    ``mtry`` candidate features are drawn without replacement; growth stops when
    the node holds at most ``nodesize`` samples, is pure, reaches ``max_depth`` or
    has no valid split among its candidates.

    Parameters
    ----------
    data : Dataset
        Training data.
    in_bag : array_like
        Row indices to grow on; repeated indices count repeatedly.
    cfg : TreeConfig
        Tree settings.

    Returns
    -------
    Tree
        The grown tree; identical for identical inputs.

    Raises
    ------
    ConfigError
        If ``cfg`` is invalid or ``in_bag`` is empty.

    Examples
    --------
    >>> tree = grow_tree(data, np.arange(data.n), TreeConfig(seed=1))  # doctest: +SKIP
    >>> topology(tree).depth_max  # doctest: +SKIP
    12
    """
    bag = np.asarray(in_bag, dtype=np.int64)
    if bag.size == 0:
        raise ConfigError("in_bag must not be empty")
    p = data.p
    cfg = cfg.resolve(p)
    rng = np.random.default_rng(cfg.seed)
    x = data.x[bag]
    y = data.y[bag].astype(np.int64)

    variable: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    depth: list[int] = []
    counts: list[tuple[int, int]] = []
    drawn: list[tuple[int, ...]] = []

    def add_node(node_depth: int, rows: np.ndarray) -> int:
        pos = int(y[rows].sum())
        variable.append(LEAF)
        threshold.append(math.nan)
        left.append(LEAF)
        right.append(LEAF)
        depth.append(node_depth)
        counts.append((len(rows) - pos, pos))
        drawn.append(())
        return len(variable) - 1

    stack = [(add_node(0, np.arange(len(bag))), np.arange(len(bag)))]
    while stack:
        node, rows = stack.pop()
        c0, c1 = counts[node]
        if c0 + c1 <= cfg.nodesize or c0 == 0 or c1 == 0:
            continue
        if cfg.max_depth is not None and depth[node] >= cfg.max_depth:
            continue
        candidates = np.sort(rng.choice(p, size=cfg.mtry, replace=False))
        if cfg.debug:
            drawn[node] = tuple(int(c) for c in candidates)
        rule = _best_split(x, y, rows, candidates)
        if rule is None:
            continue
        go_left = x[rows, rule.variable] <= rule.threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        variable[node] = rule.variable
        threshold[node] = rule.threshold
        left[node] = add_node(depth[node] + 1, left_rows)
        right[node] = add_node(depth[node] + 1, right_rows)
        stack.append((right[node], right_rows))
        stack.append((left[node], left_rows))

    tree = Tree(
        variable=np.asarray(variable, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        depth=np.asarray(depth, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64).reshape(-1, 2),
        in_bag=bag,
        n_features=p,
        candidates=tuple(drawn) if cfg.debug else None,
    )
    _LOGGER.debug("Grew tree: seed=%s in_bag=%s nodes=%s depth=%s", cfg.seed, len(bag), tree.n_nodes, tree.max_depth)
    return tree


def topology(tree: Tree) -> TreeTopology:
    """Count non-terminal nodes per depth.

    Parameters
    ----------
    tree : Tree
        A grown tree.

    Returns
    -------
    TreeTopology
        ``D(T)``, the levels and their cumulative sums. A single-leaf tree has
        ``D(T) = 0`` and no levels.
    """
    internal_depths = tree.depth[~tree.is_leaf]
    return TreeTopology.from_levels(np.bincount(internal_depths, minlength=tree.max_depth)[: tree.max_depth])


def predict_tree(tree: Tree, x: Any) -> tuple[int, int]:
    """Return the training class counts of the leaf ``x`` reaches.

    Parameters
    ----------
    tree : Tree
        A grown tree.
    x : array_like
        Feature vector with one finite value per predictor.

    Returns
    -------
    tuple[int, int]
        ``(c0, c1)`` of the reached leaf.

    Raises
    ------
    DimensionError
        If ``x`` does not have one value per predictor.
    """
    row = np.asarray(x, dtype=np.float64)
    if row.shape != (tree.n_features,):
        raise DimensionError(f"Expected {tree.n_features} values, got shape {row.shape}")
    leaf = int(tree.apply(row.reshape(1, -1))[0])
    return int(tree.counts[leaf, 0]), int(tree.counts[leaf, 1])
