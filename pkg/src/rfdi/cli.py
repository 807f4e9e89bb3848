# numpydoc ignore=EX01,GL06,GL07
"""Command line interface.

Subcommands
-----------
simulate
    Write a synthetic two-class table.
describe
    Print the data attributes of a table.
select
    Compare standard and adjusted minimal depth selection over repeated runs.
compare
    Run ``select`` for several forest variants on the same data and seeds.
evaluate
    Train one forest and report its confusion matrix and metrics.

Exit codes are 0 on success, 1 on runtime errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
from collections.abc import Sequence
from dataclasses import dataclass, replace
from datetime import UTC, datetime
import json
import logging
import os
from pathlib import Path
import sys
from typing import Any

from dataclasses_json import DataClassJsonMixin
import numpy as np

from .const import (
    DEFAULT_HOLDOUT_FRACTION,
    DEFAULT_N_TREES,
    DEFAULT_NODESIZE,
    DEFAULT_RUNS,
    FULL_N_TREES,
    FULL_RUNS,
    VERSION,
)
from .dataset import AUTO_MINORITY, Dataset, describe, is_double_imbalanced, load_csv, save_csv, stratified_split
from .exception_classes import BaseError, ConfigError
from .forest import (
    ForestConfig,
    classify,
    confusion_matrix,
    metrics,
    oob_predict,
    predict_proba,
    train_forest,
    vote_share,
)
from .report import build_report, run_selection, write_json, write_plot_csv
from .synthgen import SimConfig, simulate_two_class
from .tree import TreeConfig
from .types import BRFMinorityMode, Decision, ModelKind, Sampling, ThresholdMode

_LOGGER = logging.getLogger(__name__)

MODEL_DEFAULTS: dict[ModelKind, tuple[Sampling, Decision]] = {
    ModelKind.RF: (Sampling.STANDARD_BOOTSTRAP, Decision.MAJORITY_VOTE),
    ModelKind.BRF: (Sampling.BRF, Decision.MAJORITY_VOTE),
    ModelKind.RFQ: (Sampling.STANDARD_BOOTSTRAP, Decision.RFQ),
}


@dataclass(frozen=True)
class RunConfig(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Parameters of a ``select``, ``compare`` or ``evaluate`` invocation.

    Attributes
    ----------
    data : str
        Input CSV.
    target : str
        Target column.
    minority : str
        Minority label or ``auto``.
    model : ModelKind
        Forest variant.
    n_trees : int
        Trees per forest.
    mtry : int | None
        Split candidates; None means ``p // 3``.
    nodesize : int
        Leaf size bound.
    runs : int
        Iterations.
    seed : int
        Master seed.
    holdout : float | None
        Training fraction of a holdout split; None evaluates out-of-bag.
    brf_minority : BRFMinorityMode
        Minority sampling of BRF.
    decision : Decision | None
        Overrides the model's default decision rule.
    threads : int | None
        Worker count hint.
    out : str | None
        JSON output path; None prints to stdout.
    csv : str | None
        Plot data CSV path.
    """

    data: str
    target: str
    minority: str = AUTO_MINORITY
    model: ModelKind = ModelKind.RFQ
    n_trees: int = DEFAULT_N_TREES
    mtry: int | None = None
    nodesize: int = DEFAULT_NODESIZE
    runs: int = DEFAULT_RUNS
    seed: int = 0
    holdout: float | None = None
    brf_minority: BRFMinorityMode = BRFMinorityMode.BOOTSTRAP
    decision: Decision | None = None
    threads: int | None = None
    out: str | None = None
    csv: str | None = None

    def validate(self) -> None:
        """Check the parameters.

        Raises
        ------
        ConfigError
            If ``runs < 1``, the holdout fraction is not in (0, 1) or an output
            directory is not writable.
        """
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.holdout is not None and not 0 < self.holdout < 1:
            raise ConfigError(f"holdout must be in (0, 1), got {self.holdout}")
        for path in (self.out, self.csv):
            if path is None:
                continue
            parent = Path(path).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigError(f"Output directory {parent} is not writable")

    def forest_config(self, model: ModelKind | None = None) -> ForestConfig:
        """Translate the parameters into forest settings.

        Parameters
        ----------
        model : ModelKind, optional
            Variant to build instead of ``self.model``.

        Returns
        -------
        ForestConfig
            Forest settings for the variant.
        """
        sampling, decision = MODEL_DEFAULTS[model or self.model]
        return ForestConfig(
            n_trees=self.n_trees,
            sampling=sampling,
            brf_minority_mode=self.brf_minority,
            decision=self.decision or decision,
            tree=TreeConfig(mtry=self.mtry, nodesize=self.nodesize),
            seed=self.seed,
            n_threads=self.threads,
        )


def _load(cfg: RunConfig) -> Dataset:
    """Load the input table and warn when it is not doubly imbalanced."""
    data = load_csv(cfg.data, cfg.target, cfg.minority)
    if not is_double_imbalanced(data.stats):
        _LOGGER.warning(
            "Data is not doubly imbalanced under the default gates (ir=%.3f, n/p=%.3f)", data.stats.ir, data.stats.da
        )
    return data


def _emit(document: Any, path: str | None) -> None:
    """Write a JSON document to ``path`` or stdout."""
    if path is None:
        json.dump(document, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        write_json(document, path)


def _run_config(args: argparse.Namespace) -> RunConfig:
    """Build the run configuration from parsed arguments."""
    cfg = RunConfig(
        data=args.data,
        target=args.target,
        minority=args.minority,
        model=ModelKind(args.model),
        n_trees=args.trees,
        mtry=args.mtry,
        nodesize=args.nodesize,
        runs=args.runs,
        seed=args.seed,
        holdout=args.holdout,
        brf_minority=BRFMinorityMode(args.brf_minority),
        decision=Decision(args.decision) if args.decision else None,
        threads=args.threads,
        out=args.out,
        csv=getattr(args, "csv", None),
    )
    cfg.validate()
    return cfg


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write a synthetic dataset and print its statistics.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments.

    Returns
    -------
    int
        Exit status.
    """
    cfg = SimConfig(
        n_raw=args.n,
        n_linear=args.linear,
        n_noise=args.noise,
        factor_correlation=args.rho,
        target_ir=args.ir,
        seed=args.seed,
    )
    data = simulate_two_class(cfg)
    save_csv(data, args.out)
    print(f"n={data.stats.n} p={data.stats.p} ir={data.stats.ir:.4f}")
    return 0


def cmd_describe(args: argparse.Namespace) -> int:
    """Print the data attributes of a table.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments.

    Returns
    -------
    int
        Exit status.
    """
    data = load_csv(args.data, args.target, args.minority)
    _emit(describe(data), args.out)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    """Run repeated minimal depth selection and write the report.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments.

    Returns
    -------
    int
        Exit status.
    """
    cfg = _run_config(args)
    data = _load(cfg)
    result = run_selection(data, cfg.forest_config(), cfg.runs, cfg.seed, cfg.holdout)
    report = build_report(result, cfg.to_dict(encode_json=True), timestamp=not args.no_timestamp)
    _emit(report, cfg.out)
    if cfg.csv:
        write_plot_csv(result, cfg.csv)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    """Run selection for several forest variants on the same data and seeds.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments.

    Returns
    -------
    int
        Exit status.
    """
    cfg = _run_config(args)
    data = _load(cfg)
    models: dict[str, Any] = {}
    for model in (ModelKind(m) for m in args.models.split(",")):
        result = run_selection(data, cfg.forest_config(model), cfg.runs, cfg.seed, cfg.holdout)
        standard = result.threshold_summary(ThresholdMode.STANDARD)
        adjusted = result.threshold_summary(ThresholdMode.ADJUSTED)
        selected_standard = result.consensus(ThresholdMode.STANDARD) or []
        selected_adjusted = result.consensus(ThresholdMode.ADJUSTED)
        models[str(model)] = {
            "threshold_standard": None if standard is None else standard["mean"],
            "n_selected_standard": len(selected_standard),
            "threshold_adjusted": None if adjusted is None else adjusted["mean"],
            "n_selected_adjusted": None if selected_adjusted is None else len(selected_adjusted),
            "selected_standard": selected_standard,
            "selected_adjusted": selected_adjusted,
        }
    echo = cfg.to_dict(encode_json=True) | {"models": args.models, "version": VERSION}
    if not args.no_timestamp:
        echo["created_at"] = datetime.now(UTC).isoformat()
    _emit({"config": echo, "dataset_stats": data.stats.to_dict(), "models": models}, cfg.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Train one forest and report confusion counts and metrics.

    The configured decision rule is reported under ``metrics``; every rule
    applied to the same probabilities is reported under ``rules``.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments.

    Returns
    -------
    int
        Exit status.
    """
    cfg = _run_config(args)
    if args.oob:
        cfg = replace(cfg, holdout=None)
    elif cfg.holdout is None:
        cfg = replace(cfg, holdout=DEFAULT_HOLDOUT_FRACTION)
    data = _load(cfg)
    forest_cfg = cfg.forest_config()

    rules: dict[str, Any] = {}
    if cfg.holdout is None:
        train = data
        forest = train_forest(train, forest_cfg)
        truth = train.y
        for decision in Decision:
            cm = confusion_matrix(truth, oob_predict(forest, train, decision))
            rules[str(decision)] = {"confusion": cm.to_dict(), "metrics": metrics(cm).to_dict()}
    else:
        train, test = stratified_split(data, cfg.holdout, cfg.seed)
        forest = train_forest(train, forest_cfg)
        truth = test.y
        proba = np.atleast_1d(predict_proba(forest, test.x))
        votes = vote_share(forest, test.x)
        for decision in Decision:
            cm = confusion_matrix(truth, classify(proba, votes, decision, forest.prevalence))
            rules[str(decision)] = {"confusion": cm.to_dict(), "metrics": metrics(cm).to_dict()}

    chosen = rules[str(forest_cfg.decision)]
    document = {
        "config": cfg.to_dict(encode_json=True) | {"forest": forest_cfg.to_dict(encode_json=True), "version": VERSION},
        "dataset_stats": train.stats.to_dict(),
        "evaluation": "oob" if cfg.holdout is None else "holdout",
        "decision": str(forest_cfg.decision),
        "prevalence": forest.prevalence,
        "confusion": chosen["confusion"],
        "metrics": chosen["metrics"],
        "rules": rules,
    }
    _emit(document, cfg.out)
    return 0


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the input table arguments."""
    parser.add_argument("--data", required=True, help="input CSV with a header row")
    parser.add_argument("--target", required=True, help="target column name")
    parser.add_argument("--minority", default=AUTO_MINORITY, help="minority label token (default: rarer label)")
    parser.add_argument("--out", help="JSON output path (default: stdout)")


def _add_forest_arguments(parser: argparse.ArgumentParser) -> None:
    """Add forest and run arguments."""
    parser.add_argument("--model", choices=[m.value for m in ModelKind], default=ModelKind.RFQ.value)
    parser.add_argument("--trees", type=int, default=DEFAULT_N_TREES, help=f"trees per forest, full scale: {FULL_N_TREES}")
    parser.add_argument("--mtry", type=int, default=None, help="split candidates (default: p // 3)")
    parser.add_argument("--nodesize", type=int, default=DEFAULT_NODESIZE)
    parser.add_argument("--runs", type=int, default=DEFAULT_RUNS, help=f"iterations, full scale: {FULL_RUNS}")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--holdout", type=float, default=None, help="train fraction of a holdout split (default: OOB)")
    parser.add_argument("--brf-minority", choices=[m.value for m in BRFMinorityMode], default=BRFMinorityMode.BOOTSTRAP.value)
    parser.add_argument("--decision", choices=[d.value for d in Decision], default=None)
    parser.add_argument("--threads", type=int, default=None, help="worker threads (capped by RFDI_THREADS)")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the created_at field")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser.

    Returns
    -------
    argparse.ArgumentParser
        Parser with the ``simulate``, ``describe``, ``select``, ``compare`` and
        ``evaluate`` subcommands.
    """
    parser = argparse.ArgumentParser(prog="rfdi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="write a synthetic two-class dataset")
    simulate.add_argument("--out", required=True, help="output CSV")
    simulate.add_argument("--n", type=int, default=SimConfig.n_raw, help="rows before downsampling")
    simulate.add_argument("--ir", type=float, default=SimConfig.target_ir, help="imbalance ratio after downsampling")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--linear", type=int, default=SimConfig.n_linear, help="linear predictors")
    simulate.add_argument("--noise", type=int, default=SimConfig.n_noise, help="noise predictors")
    simulate.add_argument("--rho", type=float, default=SimConfig.factor_correlation, help="factor correlation")
    simulate.set_defaults(func=cmd_simulate)

    describe_parser = sub.add_parser("describe", help="print data attributes")
    _add_data_arguments(describe_parser)
    describe_parser.set_defaults(func=cmd_describe)

    select = sub.add_parser("select", help="standard vs adjusted minimal depth selection")
    _add_data_arguments(select)
    _add_forest_arguments(select)
    select.add_argument("--csv", help="plot data CSV path")
    select.set_defaults(func=cmd_select)

    compare = sub.add_parser("compare", help="selection for several forest variants")
    _add_data_arguments(compare)
    _add_forest_arguments(compare)
    compare.add_argument("--models", default="rf,brf,rfq", help="comma-separated variants")
    compare.set_defaults(func=cmd_compare)

    evaluate = sub.add_parser("evaluate", help="confusion matrix and metrics of one forest")
    _add_data_arguments(evaluate)
    _add_forest_arguments(evaluate)
    evaluate.add_argument("--oob", action="store_true", help="evaluate out-of-bag instead of on a holdout split")
    evaluate.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line.

    Parameters
    ----------
    argv : Sequence[str], optional
        Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns
    -------
    int
        0 on success, 1 on a runtime error. Usage errors exit with 2.
    """
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except BaseError as exc:
        _LOGGER.error("%s failed: %s", args.command, exc)
        print(f"rfdi {args.command}: {exc}", file=sys.stderr)
        return 1
