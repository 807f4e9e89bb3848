"""Random forests and minimal depth feature selection for doubly imbalanced data."""  # numpydoc ignore=EX01,ES01

from .dataset import Dataset, FeatureSchema, ImbalanceStats, downsample_to_ir, load_csv, stratified_split
from .depthselect import SelectionReport, adjustment_factor, null_depth_distribution, select_features
from .exception_classes import (
    AdjustmentOutOfRange,
    BaseError,
    ConfigError,
    DegenerateLabels,
    DimensionError,
    DivisionByZero,
    FileError,
    InfeasibleRatio,
    MismatchedData,
    ParseError,
    RangeError,
    SchemaError,
    VariableIndexError,
)
from .forest import Forest, ForestConfig, predict, predict_proba, train_forest
from .synthgen import SimConfig, simulate_two_class
from .tree import Tree, TreeConfig, grow_tree
from .types import BRFMinorityMode, Decision, Sampling, ThresholdMode

__all__ = [
    "AdjustmentOutOfRange",
    "BRFMinorityMode",
    "BaseError",
    "ConfigError",
    "Dataset",
    "Decision",
    "DegenerateLabels",
    "DimensionError",
    "DivisionByZero",
    "FeatureSchema",
    "FileError",
    "Forest",
    "ForestConfig",
    "ImbalanceStats",
    "InfeasibleRatio",
    "MismatchedData",
    "ParseError",
    "RangeError",
    "Sampling",
    "SchemaError",
    "SelectionReport",
    "SimConfig",
    "ThresholdMode",
    "Tree",
    "TreeConfig",
    "VariableIndexError",
    "adjustment_factor",
    "downsample_to_ir",
    "grow_tree",
    "load_csv",
    "null_depth_distribution",
    "predict",
    "predict_proba",
    "select_features",
    "simulate_two_class",
    "stratified_split",
    "train_forest",
]
