"""Constants for rfdi."""  # numpydoc ignore=EX01,ES01

from rfdi.__version import __version__

VERSION = __version__

# Desk-scale defaults and the full-scale study settings.
DEFAULT_N_TREES = 200
DEFAULT_RUNS = 10
FULL_N_TREES = 5000
FULL_RUNS = 100
DEFAULT_NODESIZE = 1
DEFAULT_HOLDOUT_FRACTION = 0.75

# Double-imbalance gates; they admit benchmark tables down to IR 1.31 and n/p 487.8.
DEFAULT_IR_MIN = 1.3
DEFAULT_DA_MIN = 100.0

MISSING_TOKENS = ("?", "", "NA")
MISSING_CATEGORY = "⟨missing⟩"

THREADS_ENV = "RFDI_THREADS"

# p* must clear 1 by this margin for the adjusted null distribution to exist.
P_STAR_EPSILON = 1e-9

# Share of runs a variable must be selected in to enter the consensus selection.
CONSENSUS_SHARE = 0.5

SIM_TARGET = "y"
SIM_MAJORITY_TOKEN = "class1"
SIM_MINORITY_TOKEN = "class2"

REPORT_KEYS = ("config", "dataset_stats", "thresholds", "variables", "selected", "metrics", "runs")
