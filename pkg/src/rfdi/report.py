# numpydoc ignore=EX01,GL06,GL07
"""Repeated selection runs and their reports.

Trains one forest per run, computes both minimal depth thresholds and their
selections, evaluates the configured decision rule, and aggregates the runs
into the selection report and its plot-ready CSV.

Classes
-------
RunRecord
    Raw results of one run.
SelectionRun
    All runs of one model on one dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import UTC, datetime
import json
import logging
from os import PathLike
from typing import Any

from dataclasses_json import DataClassJsonMixin
import numpy as np
import pandas as pd

from .const import CONSENSUS_SHARE, VERSION
from .dataset import Dataset, stratified_split
from .depthselect import SelectionReport, select_features
from .exception_classes import FileError
from .forest import ConfusionMatrix, ForestConfig, confusion_matrix, metrics, oob_predict, predict, train_forest
from .types import ReportDict, ThresholdMode

_LOGGER = logging.getLogger(__name__)

CSV_COLUMNS = [
    "run",
    "variable",
    "mean_depth",
    "threshold_standard",
    "threshold_adjusted",
    "selected_standard",
    "selected_adjusted",
]


def derive_seed(seed: int, run: int) -> int:
    """Return the seed of run ``run`` under master ``seed``.

    Parameters
    ----------
    seed : int
        Master seed.
    run : int
        Run index.

    Returns
    -------
    int
        A 32-bit seed that depends only on ``(seed, run)``.
    """
    return int(np.random.SeedSequence([seed, run]).generate_state(1)[0])


@dataclass(frozen=True)
class RunRecord(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Results of one run.

    Attributes
    ----------
    run : int
        Run index.
    seed : int
        Seed of the run's forest (and holdout split).
    threshold_standard : float
        Standard threshold.
    threshold_adjusted : float | None
        Adjusted threshold, None when not applicable.
    n_selected_standard : int
        Size of the standard selection.
    n_selected_adjusted : int | None
        Size of the adjusted selection.
    selected_standard : list[str]
        Standard selection.
    selected_adjusted : list[str] | None
        Adjusted selection.
    confusion : ConfusionMatrix
        Evaluation counts.
    metrics : dict
        Metrics derived from the counts.
    """

    run: int
    seed: int
    threshold_standard: float
    threshold_adjusted: float | None
    n_selected_standard: int
    n_selected_adjusted: int | None
    selected_standard: list[str]
    selected_adjusted: list[str] | None
    confusion: ConfusionMatrix
    metrics: dict = field(default_factory=dict)


@dataclass
class SelectionRun:  # numpydoc ignore=ES01,EX01
    """All runs of one forest configuration on one dataset.

    Attributes
    ----------
    data : Dataset
        The input data.
    forest_config : ForestConfig
        Forest settings; the seed is replaced per run.
    records : list[RunRecord]
        Per-run results.
    reports : list[SelectionReport]
        Per-run selection reports.
    evaluation : str
        ``oob`` or ``holdout``.
    """

    data: Dataset
    forest_config: ForestConfig
    records: list[RunRecord] = field(default_factory=list)
    reports: list[SelectionReport] = field(default_factory=list)
    evaluation: str = "oob"

    @property
    def names(self) -> list[str]:  # numpydoc ignore=ES01,EX01
        """Variable names."""
        return self.data.feature_names

    def threshold_summary(self, mode: ThresholdMode) -> dict[str, float] | None:
        """Summarize a threshold over runs.

        Parameters
        ----------
        mode : ThresholdMode
            Threshold mode.

        Returns
        -------
        dict[str, float] | None
            Mean, standard deviation, minimum and maximum; None when no run has
            the threshold.
        """
        values = [r.threshold(mode) for r in self.reports if r.threshold(mode) is not None]
        if not values:
            return None
        arr = np.asarray(values)
        return {"mean": float(arr.mean()), "std": float(arr.std()), "min": float(arr.min()), "max": float(arr.max())}

    def selection_share(self, mode: ThresholdMode) -> dict[str, float] | None:
        """Return the share of runs selecting each variable.

        Parameters
        ----------
        mode : ThresholdMode
            Threshold mode.

        Returns
        -------
        dict[str, float] | None
            Share per variable name; None when no run has the mode.
        """
        selections = [r.selected(mode) for r in self.reports if r.selected(mode) is not None]
        if not selections:
            return None
        return {name: sum(name in s for s in selections) / len(selections) for name in self.names}

    def consensus(self, mode: ThresholdMode) -> list[str] | None:
        """Return the variables selected in at least half of the runs.

        Parameters
        ----------
        mode : ThresholdMode
            Threshold mode.

        Returns
        -------
        list[str] | None
            Consensus selection in column order.
        """
        shares = self.selection_share(mode)
        if shares is None:
            return None
        return [name for name in self.names if shares[name] >= CONSENSUS_SHARE]

    def pooled_confusion(self) -> ConfusionMatrix:  # numpydoc ignore=ES01,EX01
        """Sum the confusion matrices of all runs.

        Returns
        -------
        ConfusionMatrix
            Pooled counts.
        """
        pooled = ConfusionMatrix()
        for record in self.records:
            pooled += record.confusion
        return pooled


def run_selection(
    data: Dataset, forest_config: ForestConfig, runs: int, seed: int, holdout: float | None = None
) -> SelectionRun:
    """Train ``runs`` forests and collect thresholds, selections and metrics.

    Parameters
    ----------
    data : Dataset
        Input data.
    forest_config : ForestConfig
        Forest settings; the seed of run ``r`` is ``derive_seed(seed, r)``.
    runs : int
        Number of runs.
    seed : int
        Master seed.
    holdout : float, optional
        Training fraction of a stratified holdout split. When None the forest is
        trained on all rows and evaluated out-of-bag.

    Returns
    -------
    SelectionRun
        The collected runs.
    """
    result = SelectionRun(data, forest_config, evaluation="oob" if holdout is None else "holdout")
    for run in range(runs):
        run_seed = derive_seed(seed, run)
        if holdout is None:
            train, test = data, None
        else:
            train, test = stratified_split(data, holdout, run_seed)
        forest = train_forest(train, replace(forest_config, seed=run_seed))
        report = select_features(forest, train.stats, metadata={"run": run})
        if test is None:
            cm = confusion_matrix(train.y, oob_predict(forest, train))
        else:
            cm = confusion_matrix(test.y, predict(forest, test.x))
        result.reports.append(report)
        result.records.append(
            RunRecord(
                run=run,
                seed=run_seed,
                threshold_standard=report.threshold_standard,
                threshold_adjusted=report.threshold_adjusted,
                n_selected_standard=len(report.selected_standard),
                n_selected_adjusted=None if report.selected_adjusted is None else len(report.selected_adjusted),
                selected_standard=report.selected_standard,
                selected_adjusted=report.selected_adjusted,
                confusion=cm,
                metrics=metrics(cm).to_dict(),
            )
        )
        _LOGGER.debug("Run %s/%s done (seed %s)", run + 1, runs, run_seed)
    return result


def _mean_metrics(records: list[RunRecord]) -> dict[str, float | None]:
    """Average each metric over the runs where it is defined."""
    keys = records[0].metrics.keys() if records else []
    averaged: dict[str, float | None] = {}
    for key in keys:
        values = [r.metrics[key] for r in records if r.metrics[key] is not None]
        averaged[key] = float(np.mean(values)) if values else None
    return averaged


def build_report(result: SelectionRun, config: dict[str, Any], timestamp: bool = True) -> ReportDict:
    """Aggregate runs into the selection report document.

    Parameters
    ----------
    result : SelectionRun
        Collected runs.
    config : dict[str, Any]
        Run configuration echo.
    timestamp : bool, optional
        Add a ``created_at`` field to the config echo. Default is True.

    Returns
    -------
    ReportDict
        Report with the keys ``config``, ``dataset_stats``, ``thresholds``,
        ``variables``, ``selected``, ``metrics`` and ``runs``.
    """
    per_run_depths = np.vstack([[v.mean_depth for v in r.variables] for r in result.reports])
    per_run_variances = np.vstack([[v.depth_variance for v in r.variables] for r in result.reports])
    share_standard = result.selection_share(ThresholdMode.STANDARD) or {}
    share_adjusted = result.selection_share(ThresholdMode.ADJUSTED)
    variables = []
    for index, name in enumerate(result.names):
        variables.append(
            {
                "name": name,
                "mean_depth": float(per_run_depths[:, index].mean()),
                "depth_std": float(per_run_depths[:, index].std()),
                "depth_variance": float(per_run_variances[:, index].mean()),
                "selected_share_standard": share_standard.get(name, 0.0),
                "selected_share_adjusted": None if share_adjusted is None else share_adjusted[name],
            }
        )
    pooled = result.pooled_confusion()
    echo = dict(config)
    echo["forest"] = result.forest_config.to_dict(encode_json=True)
    echo["version"] = VERSION
    if timestamp:
        echo["created_at"] = datetime.now(UTC).isoformat()
    return {
        "config": echo,
        "dataset_stats": result.data.stats.to_dict(),
        "thresholds": {
            "standard": result.threshold_summary(ThresholdMode.STANDARD),
            "adjusted": result.threshold_summary(ThresholdMode.ADJUSTED),
        },
        "variables": variables,
        "selected": {
            "standard": result.consensus(ThresholdMode.STANDARD),
            "adjusted": result.consensus(ThresholdMode.ADJUSTED),
        },
        "metrics": {
            "decision": str(result.forest_config.decision),
            "evaluation": result.evaluation,
            "confusion": pooled.to_dict(),
            "pooled": metrics(pooled).to_dict(),
            "mean": _mean_metrics(result.records),
        },
        "runs": [record.to_dict(encode_json=True) for record in result.records],
    }


def plot_frame(result: SelectionRun) -> pd.DataFrame:
    """Return the plot data: one row per variable per run.

    Parameters
    ----------
    result : SelectionRun
        Collected runs.

    Returns
    -------
    pd.DataFrame
        Columns ``run``, ``variable``, ``mean_depth``, both thresholds and both
        selection flags.
    """
    rows = []
    for record, report in zip(result.records, result.reports, strict=True):
        adjusted = set(report.selected_adjusted or [])
        standard = set(report.selected_standard)
        for var in report.variables:
            rows.append(
                {
                    "run": record.run,
                    "variable": var.name,
                    "mean_depth": var.mean_depth,
                    "threshold_standard": report.threshold_standard,
                    "threshold_adjusted": report.threshold_adjusted,
                    "selected_standard": var.name in standard,
                    "selected_adjusted": None if report.selected_adjusted is None else var.name in adjusted,
                }
            )
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_json(document: Any, path: str | PathLike[str]) -> None:
    """Write a JSON document with two-space indentation.

    Parameters
    ----------
    document : Any
        JSON-serializable document.
    path : str | PathLike[str]
        Output file.

    Raises
    ------
    FileError
        If the file cannot be written.
    """
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise FileError(f"Could not write {path}: {exc}") from exc


def write_plot_csv(result: SelectionRun, path: str | PathLike[str]) -> None:
    """Write the plot data CSV.

    Parameters
    ----------
    result : SelectionRun
        Collected runs.
    path : str | PathLike[str]
        Output file.

    Raises
    ------
    FileError
        If the file cannot be written.
    """
    try:
        plot_frame(result).to_csv(path, index=False, encoding="utf-8")
    except OSError as exc:
        raise FileError(f"Could not write {path}: {exc}") from exc
