"""flowbench: RF/DT/NB evaluation harness over exported flow CSVs."""

__version__ = "0.1.0"

from .columns import FEATURE_NAMES, ColumnResolutionError, resolve_columns
from .data import ANOMALY, BENIGN, DatasetError, Prepared, prepare
from .evaluate import (
    EvalReport,
    SplitError,
    TaskSpec,
    evaluate_csv,
    multi_model_compare,
    select_top_features,
    train_eval,
)
from .metrics import MetricSet, compute_metrics, normalized_confusion

__all__ = [
    "ANOMALY",
    "BENIGN",
    "ColumnResolutionError",
    "DatasetError",
    "EvalReport",
    "FEATURE_NAMES",
    "MetricSet",
    "Prepared",
    "SplitError",
    "TaskSpec",
    "compute_metrics",
    "evaluate_csv",
    "multi_model_compare",
    "normalized_confusion",
    "prepare",
    "resolve_columns",
    "select_top_features",
    "train_eval",
]
