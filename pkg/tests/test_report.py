"""Tests for repeated selection runs and their reports."""

import json
import math
from pathlib import Path

import pandas as pd
import pytest

from rfdi.const import REPORT_KEYS
from rfdi.dataset import Dataset
from rfdi.exception_classes import FileError
from rfdi.forest import ForestConfig
from rfdi.report import (
    CSV_COLUMNS,
    SelectionRun,
    build_report,
    derive_seed,
    plot_frame,
    run_selection,
    write_json,
    write_plot_csv,
)
from rfdi.types import Decision, ThresholdMode

FOREST = ForestConfig(n_trees=8, decision=Decision.RFQ, n_threads=2)


@pytest.fixture(scope="module")
def oob_runs(sim_data: Dataset) -> SelectionRun:
    """Three out-of-bag runs on the synthetic data."""
    return run_selection(sim_data, FOREST, runs=3, seed=7)


def test_derive_seed() -> None:
    """Test that run seeds depend only on the master seed and the run."""
    assert derive_seed(7, 0) == derive_seed(7, 0)
    assert len({derive_seed(7, run) for run in range(10)}) == 10
    assert derive_seed(7, 1) != derive_seed(8, 1)


def test_run_selection(oob_runs: SelectionRun, sim_data: Dataset) -> None:
    """Test the per-run records."""
    assert [r.run for r in oob_runs.records] == [0, 1, 2]
    assert [r.seed for r in oob_runs.records] == [derive_seed(7, run) for run in range(3)]
    assert oob_runs.evaluation == "oob"
    for record, report in zip(oob_runs.records, oob_runs.reports, strict=True):
        assert record.threshold_adjusted < record.threshold_standard
        assert record.n_selected_standard == len(report.selected_standard)
        assert record.confusion.total <= sim_data.n
        assert set(record.metrics) == {"tpr", "tnr", "gmean", "precision", "recall", "f1", "balanced_accuracy"}


def test_run_selection_holdout(sim_data: Dataset) -> None:
    """Test holdout evaluation."""
    result = run_selection(sim_data, FOREST, runs=1, seed=1, holdout=0.75)
    assert result.evaluation == "holdout"
    train_rows = sum(math.floor(0.75 * c + 0.5) for c in (sim_data.stats.c0, sim_data.stats.c1))
    assert result.records[0].confusion.total == sim_data.n - train_rows


def test_consensus(oob_runs: SelectionRun) -> None:
    """Test shares and consensus selections."""
    shares = oob_runs.selection_share(ThresholdMode.ADJUSTED)
    consensus = oob_runs.consensus(ThresholdMode.ADJUSTED)
    assert consensus == [name for name in oob_runs.names if shares[name] >= 0.5]
    assert all(share in (0.0, 1 / 3, 2 / 3, 1.0) for share in shares.values())

    summary = oob_runs.threshold_summary(ThresholdMode.STANDARD)
    assert summary["min"] <= summary["mean"] <= summary["max"]


def test_pooled_confusion(oob_runs: SelectionRun) -> None:
    """Test that pooled counts add up the runs."""
    pooled = oob_runs.pooled_confusion()
    assert pooled.total == sum(r.confusion.total for r in oob_runs.records)


def test_build_report(oob_runs: SelectionRun) -> None:
    """Test the report document."""
    report = build_report(oob_runs, {"seed": 7}, timestamp=False)

    assert tuple(report) == REPORT_KEYS
    assert "created_at" not in report["config"]
    assert report["config"]["seed"] == 7
    assert report["config"]["forest"]["n_trees"] == 8
    assert len(report["variables"]) == len(oob_runs.names)
    first = report["variables"][0]
    per_run = [run.variables[0].depth_variance for run in oob_runs.reports]
    assert first["depth_variance"] == pytest.approx(sum(per_run) / len(per_run))
    assert any(v["depth_variance"] > 0 for v in report["variables"])
    assert len(report["runs"]) == 3
    assert report["metrics"]["decision"] == "rfq"
    assert report["thresholds"]["adjusted"]["mean"] < report["thresholds"]["standard"]["mean"]
    json.dumps(report)


def test_build_report_timestamp(oob_runs: SelectionRun) -> None:
    """Test the creation timestamp."""
    assert "created_at" in build_report(oob_runs, {})["config"]


def test_plot_frame(oob_runs: SelectionRun, tmp_path: Path) -> None:
    """Test the plot data: one row per variable per run."""
    frame = plot_frame(oob_runs)
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 3 * len(oob_runs.names)

    out = tmp_path / "plot.csv"
    write_plot_csv(oob_runs, out)
    assert len(pd.read_csv(out)) == len(frame)


def test_write_json(tmp_path: Path) -> None:
    """Test JSON output formatting."""
    out = tmp_path / "doc.json"
    write_json({"a": [1, 2]}, out)
    assert out.read_text(encoding="utf-8") == '{\n  "a": [\n    1,\n    2\n  ]\n}\n'


def test_write_json_error(tmp_path: Path) -> None:
    """Test that unwritable paths raise `FileError`."""
    with pytest.raises(FileError):
        write_json({}, tmp_path / "missing" / "doc.json")
