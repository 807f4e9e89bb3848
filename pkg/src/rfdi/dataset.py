# numpydoc ignore=EX01,GL06,GL07
"""Tabular binary-classification data.

This module loads and encodes CSV tables, characterizes their class and
dimensional imbalance, and resamples them.

Classes
-------
FeatureSchema
    Column names, kinds, category lexicons and the target labels.
ImbalanceStats
    Counts, imbalance ratio, dimensional asymmetry and prevalence.
Dataset
    Encoded feature matrix with binary labels (1 = minority).
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
import logging
import math
from os import PathLike
from typing import Any

from dataclasses_json import DataClassJsonMixin
import numpy as np
import pandas as pd

from .const import DEFAULT_DA_MIN, DEFAULT_IR_MIN, MISSING_CATEGORY, MISSING_TOKENS
from .exception_classes import (
    ConfigError,
    DegenerateLabels,
    DivisionByZero,
    FileError,
    InfeasibleRatio,
    ParseError,
    SchemaError,
)
from .types import ColumnKind

_LOGGER = logging.getLogger(__name__)

AUTO_MINORITY = "auto"


@dataclass(frozen=True)
class ColumnSpec(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Description of one predictor column.

    Attributes
    ----------
    name : str
        Column header.
    kind : ColumnKind
        Numeric or categorical.
    lexicon : list[str]
        Ordered distinct tokens of a categorical column; the encoded value of a
        token is its index. Empty for numeric columns.
    """

    name: str
    kind: ColumnKind = ColumnKind.NUMERIC
    lexicon: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class FeatureSchema(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Schema of an encoded table.

    Attributes
    ----------
    columns : list[ColumnSpec]
        Predictor columns in matrix order.
    target : str
        Name of the target column.
    minority_label : str
        Target token encoded as label 1.
    majority_label : str
        Target token encoded as label 0.
    """

    columns: list[ColumnSpec]
    target: str
    minority_label: str
    majority_label: str

    def __post_init__(self) -> None:  # numpydoc ignore=ES01,EX01
        """Validate the schema."""
        names = [c.name for c in self.columns]
        if self.target in names:
            raise SchemaError(f"Target column {self.target!r} is also listed as a predictor")
        if len(set(names)) != len(names):
            raise SchemaError("Duplicate predictor column names")
        if self.minority_label == self.majority_label:
            raise SchemaError("The target needs two distinct labels")
        for column in self.columns:
            if len(set(column.lexicon)) != len(column.lexicon):
                raise SchemaError(f"Lexicon of column {column.name!r} contains duplicates")

    @property
    def names(self) -> list[str]:  # numpydoc ignore=ES01,EX01
        """Predictor names in matrix order."""
        return [c.name for c in self.columns]

    @classmethod
    def numeric(cls, names: Sequence[str], target: str, minority_label: str, majority_label: str) -> FeatureSchema:
        """Build a schema of numeric predictors only.

        Parameters
        ----------
        names : Sequence[str]
            Predictor names.
        target : str
            Target column name.
        minority_label : str
            Token of the minority class.
        majority_label : str
            Token of the majority class.

        Returns
        -------
        FeatureSchema
            The schema.

        Examples
        --------
        >>> FeatureSchema.numeric(["x1", "x2"], "y", "b", "a").names
        ['x1', 'x2']
        """
        return cls([ColumnSpec(name) for name in names], target, minority_label, majority_label)


def imbalance_ratio(c0: int, c1: int) -> float:
    """Return the imbalance ratio ``c0 / c1``.

    Parameters
    ----------
    c0 : int
        Majority class count.
    c1 : int
        Minority class count.

    Returns
    -------
    float
        The imbalance ratio.

    Raises
    ------
    DivisionByZero
        If ``c1`` is zero.

    Examples
    --------
    >>> imbalance_ratio(30, 10)
    3.0
    """
    if c1 == 0:
        raise DivisionByZero
    return c0 / c1


@dataclass(frozen=True)
class ImbalanceStats(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Imbalance statistics of a labelled table.

    Attributes
    ----------
    n : int
        Number of rows.
    p : int
        Number of predictors offered to the forest (the target is not counted).
    c0 : int
        Majority (label 0) count.
    c1 : int
        Minority (label 1) count.
    ir : float
        Imbalance ratio ``c0 / c1``.
    da : float
        Dimensional asymmetry ``n / p``.
    prevalence : float
        Minority prevalence ``c1 / n``.
    """

    n: int
    p: int
    c0: int
    c1: int
    ir: float
    da: float
    prevalence: float

    @classmethod
    def from_counts(cls, c0: int, c1: int, p: int) -> ImbalanceStats:  # numpydoc ignore=ES01,EX01
        """Compute the statistics from class counts.

        Parameters
        ----------
        c0 : int
            Label 0 count.
        c1 : int
            Label 1 count.
        p : int
            Number of predictors.

        Returns
        -------
        ImbalanceStats
            The statistics.
        """
        n = c0 + c1
        return cls(n=n, p=p, c0=c0, c1=c1, ir=imbalance_ratio(c0, c1), da=n / p, prevalence=c1 / n)

    @classmethod
    def from_labels(cls, y: np.ndarray, p: int) -> ImbalanceStats:  # numpydoc ignore=ES01,EX01
        """Compute the statistics from a 0/1 label vector.

        Parameters
        ----------
        y : np.ndarray
            Labels.
        p : int
            Number of predictors.

        Returns
        -------
        ImbalanceStats
            The statistics.
        """
        c1 = int(np.count_nonzero(y))
        return cls.from_counts(len(y) - c1, c1, p)


def is_double_imbalanced(
    stats: ImbalanceStats, ir_min: float = DEFAULT_IR_MIN, da_min: float = DEFAULT_DA_MIN
) -> bool:
    """Tell whether a table is skewed in both classes and shape.

    Parameters
    ----------
    stats : ImbalanceStats
        Statistics of the table.
    ir_min : float, optional
        Smallest imbalance ratio counted as imbalanced. Default is 1.3.
    da_min : float, optional
        Smallest ``n / p`` counted as dimensionally asymmetric. Default is 100.

    Returns
    -------
    bool
        True iff ``ir >= ir_min`` and ``da >= da_min``.

    Examples
    --------
    >>> is_double_imbalanced(ImbalanceStats.from_counts(37155, 11687, 15))
    True
    """
    return stats.ir >= ir_min and stats.da >= da_min


@dataclass(frozen=True, eq=False)
class Dataset:  # numpydoc ignore=ES01,EX01
    """Encoded binary-classification data.

    Arrays are made read-only on construction, so a dataset can be shared by
    concurrent readers.

    Attributes
    ----------
    x : np.ndarray
        Row-major ``n x p`` matrix of finite reals.
    y : np.ndarray
        Labels in {0, 1}; 1 is the minority class.
    schema : FeatureSchema
        Column description.
    stats : ImbalanceStats
        Imbalance statistics of ``y``.
    """

    x: np.ndarray
    y: np.ndarray
    schema: FeatureSchema
    stats: ImbalanceStats

    def __post_init__(self) -> None:  # numpydoc ignore=ES01,EX01
        """Validate shapes and freeze the arrays."""
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise ConfigError("x must be n x p and y must have n entries")
        n, p = self.x.shape
        if n < 2 or p < 1:
            raise ConfigError(f"A dataset needs n >= 2 and p >= 1, got n={n}, p={p}")
        if p != len(self.schema.columns):
            raise ConfigError(f"Schema lists {len(self.schema.columns)} columns but x has {p}")
        if not np.all(np.isfinite(self.x)):
            raise ConfigError("Feature values must be finite")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ConfigError("Labels must be 0 or 1")
        if self.stats.c0 < 1 or self.stats.c1 < 1:
            raise DegenerateLabels
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @classmethod
    def from_arrays(cls, x: Any, y: Any, schema: FeatureSchema) -> Dataset:
        """Build a dataset and its statistics from arrays.

        Parameters
        ----------
        x : array_like
            ``n x p`` feature matrix.
        y : array_like
            Labels in {0, 1}.
        schema : FeatureSchema
            Column description.

        Returns
        -------
        Dataset
            The dataset.

        Raises
        ------
        DegenerateLabels
            If a class is empty.
        ConfigError
            If shapes or values are invalid.

        Examples
        --------
        >>> schema = FeatureSchema.numeric(["x"], "y", "b", "a")
        >>> Dataset.from_arrays([[1.0], [2.0], [3.0]], [0, 0, 1], schema).stats.ir
        2.0
        """
        x_arr = np.array(x, dtype=np.float64, copy=True)
        if x_arr.ndim == 1:
            x_arr = x_arr.reshape(-1, 1)
        y_arr = np.array(y, dtype=np.int8, copy=True)
        c1 = int(np.count_nonzero(y_arr == 1))
        c0 = int(np.count_nonzero(y_arr == 0))
        if c0 == 0 or c1 == 0:
            raise DegenerateLabels(f"Both classes must be present, got c0={c0}, c1={c1}")
        stats = ImbalanceStats.from_counts(c0, c1, x_arr.shape[1] if x_arr.ndim == 2 else 0)
        return cls(x_arr, y_arr, schema, stats)

    @property
    def n(self) -> int:  # numpydoc ignore=ES01,EX01
        """Number of rows."""
        return self.x.shape[0]

    @property
    def p(self) -> int:  # numpydoc ignore=ES01,EX01
        """Number of predictors."""
        return self.x.shape[1]

    @property
    def feature_names(self) -> list[str]:  # numpydoc ignore=ES01,EX01
        """Predictor names in column order."""
        return self.schema.names

    def subset(self, rows: np.ndarray) -> Dataset:  # numpydoc ignore=ES01,EX01
        """Return the rows at ``rows`` as a new dataset.

        Parameters
        ----------
        rows : np.ndarray
            Row indices.

        Returns
        -------
        Dataset
            The subset with recomputed statistics.
        """
        return Dataset.from_arrays(self.x[rows], self.y[rows], self.schema)


def _encode_numeric(name: str, tokens: pd.Series, missing: pd.Series) -> np.ndarray:
    """Parse a numeric column, rejecting missing and non-numeric tokens."""
    if missing.any():
        row = int(np.flatnonzero(missing.to_numpy())[0]) + 2
        raise ParseError(f"Missing value in numeric column {name!r} (line {row})")
    values = pd.to_numeric(tokens, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise ParseError(f"Non-numeric token {tokens.iloc[row]!r} in numeric column {name!r} (line {row + 2})")
    return values


def _is_numeric(tokens: pd.Series, missing: pd.Series) -> bool:
    """Tell whether every non-missing token parses as a finite real."""
    present = tokens[~missing]
    if present.empty:
        return False
    return bool(np.all(np.isfinite(pd.to_numeric(present, errors="coerce").to_numpy(dtype=np.float64))))


def _encode_categorical(tokens: pd.Series, missing: pd.Series) -> tuple[np.ndarray, list[str]]:
    """Ordinal-encode a column by its sorted lexicon."""
    filled = tokens.where(~missing, MISSING_CATEGORY).to_numpy(dtype=object)
    lexicon = sorted(set(filled))
    codes = np.searchsorted(np.array(lexicon, dtype=object), filled)
    return codes.astype(np.float64), lexicon


def load_csv(
    path: str | PathLike[str],
    target: str,
    minority_label: str = AUTO_MINORITY,
    kinds: Mapping[str, ColumnKind] | None = None,
) -> Dataset:
    """Load and encode a CSV table.

    Numeric columns are parsed as reals. Categorical columns are ordinal-encoded
    by the index of each token in the column's sorted lexicon; the missing tokens
    ``?``, empty and ``NA`` become their own category. A column is numeric iff
    every non-missing token parses as a real, unless ``kinds`` says otherwise.
    Labels are mapped so that the minority class is 1.

    Parameters
    ----------
    path : str | PathLike[str]
        CSV file with a header row, UTF-8, ``.`` as decimal separator.
    target : str
        Name of the target column.
    minority_label : str, optional
        Target token to treat as the minority class. ``"auto"`` (default) picks the
        rarer label. A named label may not be the more frequent one; on a tie it is
        accepted.
    kinds : Mapping[str, ColumnKind], optional
        Forced column kinds, by column name.

    Returns
    -------
    Dataset
        The encoded dataset.

    Raises
    ------
    FileError
        If the file cannot be read.
    SchemaError
        If the target is missing or duplicated, does not hold exactly two labels, the
        named minority label is the more frequent class, or there are fewer than two
        data rows.
    ParseError
        If a numeric column holds a non-numeric token or a missing value.

    Examples
    --------
    >>> data = load_csv("adult.csv", target="income")  # doctest: +SKIP
    >>> round(data.stats.ir, 2)  # doctest: +SKIP
    3.18
    """
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except (OSError, UnicodeDecodeError) as exc:
        raise FileError(f"Could not read {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path} is empty") from exc
    except pd.errors.ParserError as exc:
        raise ParseError(f"Malformed CSV in {path}: {exc}") from exc

    header = [str(h).strip() for h in raw.iloc[0]]
    body = raw.iloc[1:].reset_index(drop=True)
    body.columns = range(len(header))
    body = body.apply(lambda column: column.str.strip())

    if header.count(target) == 0:
        raise SchemaError(f"Target column {target!r} not found")
    if len(set(header)) != len(header):
        raise SchemaError("Duplicate column names in header")
    if len(body) < 2:
        raise SchemaError("At least two data rows are required")

    kinds = kinds or {}
    target_index = header.index(target)
    labels = body[target_index]
    counts = labels.value_counts()
    if len(counts) != 2:
        raise SchemaError(f"Target {target!r} must hold exactly 2 classes, found {len(counts)}")
    tokens = sorted(counts.index)
    if minority_label == AUTO_MINORITY:
        minority = min(reversed(tokens), key=lambda t: counts[t])
    elif minority_label not in tokens:
        raise SchemaError(f"Minority label {minority_label!r} does not occur in {target!r}")
    elif counts[minority_label] > counts.drop(minority_label).iloc[0]:
        raise SchemaError(f"Label {minority_label!r} is the more frequent class of {target!r}, not the minority")
    else:
        minority = minority_label
    majority = tokens[0] if tokens[1] == minority else tokens[1]

    columns: list[ColumnSpec] = []
    encoded: list[np.ndarray] = []
    for index, name in enumerate(header):
        if index == target_index:
            continue
        column = body[index]
        missing = column.isin(MISSING_TOKENS)
        kind = kinds.get(name)
        if kind is None:
            kind = ColumnKind.NUMERIC if _is_numeric(column, missing) else ColumnKind.CATEGORICAL
        if kind == ColumnKind.NUMERIC:
            encoded.append(_encode_numeric(name, column, missing))
            columns.append(ColumnSpec(name, ColumnKind.NUMERIC))
        else:
            values, lexicon = _encode_categorical(column, missing)
            encoded.append(values)
            columns.append(ColumnSpec(name, ColumnKind.CATEGORICAL, lexicon))

    if not columns:
        raise SchemaError("No predictor columns besides the target")

    schema = FeatureSchema(columns, target, minority, majority)
    x = np.column_stack(encoded)
    y = (labels == minority).to_numpy(dtype=np.int8)
    data = Dataset.from_arrays(x, y, schema)
    _LOGGER.info(
        "Loaded %s: n=%s p=%s c0=%s c1=%s ir=%.3f da=%.3f",
        path,
        data.stats.n,
        data.stats.p,
        data.stats.c0,
        data.stats.c1,
        data.stats.ir,
        data.stats.da,
    )
    return data


def decode_column(data: Dataset, column: int | str) -> list[str]:
    """Decode one predictor column back to its tokens.

    Parameters
    ----------
    data : Dataset
        The dataset.
    column : int | str
        Column index or name.

    Returns
    -------
    list[str]
        Lexicon tokens for categorical columns, the shortest round-trip text
        of each value for numeric ones.

    Examples
    --------
    >>> data = load_csv("cars.csv", target="y")  # doctest: +SKIP
    >>> decode_column(data, "colour")[:2]  # doctest: +SKIP
    ['red', 'blue']
    """
    index = data.schema.names.index(column) if isinstance(column, str) else column
    spec = data.schema.columns[index]
    values = data.x[:, index]
    if spec.kind == ColumnKind.CATEGORICAL:
        return [spec.lexicon[int(v)] for v in values]
    return [repr(float(v)) for v in values]


def save_csv(data: Dataset, path: str | PathLike[str]) -> None:
    """Write a dataset in the format read by :func:`load_csv`.

    Parameters
    ----------
    data : Dataset
        The dataset.
    path : str | PathLike[str]
        Output file.

    Raises
    ------
    FileError
        If the file cannot be written.
    """
    frame: dict[str, Any] = {}
    for index, spec in enumerate(data.schema.columns):
        if spec.kind == ColumnKind.CATEGORICAL:
            frame[spec.name] = [MISSING_TOKENS[0] if t == MISSING_CATEGORY else t for t in decode_column(data, index)]
        else:
            frame[spec.name] = data.x[:, index]
    frame[data.schema.target] = np.where(data.y == 1, data.schema.minority_label, data.schema.majority_label)
    try:
        pd.DataFrame(frame).to_csv(path, index=False, encoding="utf-8")
    except OSError as exc:
        raise FileError(f"Could not write {path}: {exc}") from exc
    _LOGGER.debug("Wrote %s rows to %s", data.n, path)


def describe(data: Dataset, ir_min: float = DEFAULT_IR_MIN, da_min: float = DEFAULT_DA_MIN) -> dict[str, Any]:
    """Summarize the data attributes of a dataset.

    Parameters
    ----------
    data : Dataset
        The dataset.
    ir_min : float, optional
        Imbalance gate for the double-imbalance flag.
    da_min : float, optional
        Asymmetry gate for the double-imbalance flag.

    Returns
    -------
    dict[str, Any]
        Statistics, class tokens, column kinds and the double-imbalance flag.
    """
    summary: dict[str, Any] = data.stats.to_dict()
    summary["target"] = data.schema.target
    summary["minority_label"] = data.schema.minority_label
    summary["majority_label"] = data.schema.majority_label
    summary["n_categorical"] = sum(1 for c in data.schema.columns if c.kind == ColumnKind.CATEGORICAL)
    summary["double_imbalanced"] = is_double_imbalanced(data.stats, ir_min, da_min)
    return summary


def downsample_to_ir(data: Dataset, target_ir: float, seed: int) -> Dataset:
    """Subsample one class so the imbalance ratio meets ``target_ir``.

    The minority class (label 1) is shrunk to ``floor(c0 / target_ir)`` rows. When
    that would not shrink it (the requested ratio is below the current one) the
    majority is shrunk to ``floor(c1 * target_ir)`` rows instead. Rows are drawn
    uniformly without replacement and keep their original order.

    Parameters
    ----------
    data : Dataset
        The dataset.
    target_ir : float
        Requested ratio, at least 1.
    seed : int
        Random seed.

    Returns
    -------
    Dataset
        The resampled dataset, or ``data`` itself when no class changes size.

    Raises
    ------
    ConfigError
        If ``target_ir < 1``.
    InfeasibleRatio
        If the shrunk class would be empty.

    Examples
    --------
    >>> schema = FeatureSchema.numeric(["x"], "y", "b", "a")
    >>> data = Dataset.from_arrays(np.arange(20.0), [0] * 10 + [1] * 10, schema)
    >>> downsample_to_ir(data, 5, seed=0).stats.c1
    2
    """
    if not target_ir >= 1:
        raise ConfigError(f"target_ir must be >= 1, got {target_ir}")
    c0, c1 = data.stats.c0, data.stats.c1
    new_c1 = math.floor(c0 / target_ir)
    new_c0 = c0
    if new_c1 >= c1:
        new_c1 = c1
        new_c0 = min(c0, math.floor(c1 * target_ir))
    if new_c1 == 0 or new_c0 == 0:
        raise InfeasibleRatio(f"Ratio {target_ir} leaves a class empty (c0={c0}, c1={c1})")
    if new_c0 == c0 and new_c1 == c1:
        return data

    rng = np.random.default_rng(seed)
    keep = []
    for label, size in ((0, new_c0), (1, new_c1)):
        rows = np.flatnonzero(data.y == label)
        keep.append(rows if size == len(rows) else rng.choice(rows, size=size, replace=False))
    rows = np.sort(np.concatenate(keep))
    _LOGGER.debug("Downsampled c0=%s c1=%s to c0=%s c1=%s", c0, c1, new_c0, new_c1)
    return data.subset(rows)


def stratified_split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split a dataset per class into train and test parts.

    Each class contributes ``floor(count * train_fraction + 0.5)`` rows to the
    training part and the rest to the test part.

    Parameters
    ----------
    data : Dataset
        The dataset.
    train_fraction : float
        Share of rows used for training, strictly between 0 and 1.
    seed : int
        Random seed.

    Returns
    -------
    tuple[Dataset, Dataset]
        Train and test datasets; disjoint and together exhaustive.

    Raises
    ------
    ConfigError
        If ``train_fraction`` is not in (0, 1).
    InfeasibleRatio
        If a part would hold no sample of some class.
    """
    if not 0 < train_fraction < 1:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in (0, 1):
        rows = rng.permutation(np.flatnonzero(data.y == label))
        cut = math.floor(len(rows) * train_fraction + 0.5)
        if cut == 0 or cut == len(rows):
            raise InfeasibleRatio(
                f"Split {train_fraction} leaves class {label} ({len(rows)} rows) empty in one part"
            )
        train.append(rows[:cut])
        test.append(rows[cut:])
    return data.subset(np.sort(np.concatenate(train))), data.subset(np.sort(np.concatenate(test)))
