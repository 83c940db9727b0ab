"""Dataset preparation: column selection, label mapping, NaN row handling."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .columns import FEATURE_NAMES, resolve_columns

BENIGN = "BENIGN"
ANOMALY = "ANOMALY"

TASK_BINARY = "binary"
TASK_MULTICLASS = "multiclass"


class DatasetError(ValueError):
    """Unusable dataset for the requested task."""


@dataclass
class Prepared:
    X: pd.DataFrame
    y: pd.Series
    dropped_nan_rows: int
    source: str


def prepare(csv_path: str | Path, task: str) -> Prepared:
    """Load a flow CSV into a model-ready (X, y).

    Endpoint identity columns never enter X; the feature matrix is exactly
    the protocol column plus the 41 flow statistics, under canonical names.
    Rows with unparseable or non-finite feature cells (present only in
    third-party CSVs) are dropped and counted.
    """
    if task not in (TASK_BINARY, TASK_MULTICLASS):
        raise ValueError(f"unknown task {task!r}")
    path = Path(csv_path)
    frame = pd.read_csv(path, skipinitialspace=True, low_memory=False)
    mapping, label_col = resolve_columns(list(frame.columns))

    X = frame[[mapping[name] for name in FEATURE_NAMES]].copy()
    X.columns = FEATURE_NAMES
    for column in FEATURE_NAMES:
        X[column] = pd.to_numeric(X[column], errors="coerce")
    X = X.replace([np.inf, -np.inf], np.nan)
    y = frame[label_col].astype(str).str.strip()

    usable = X.notna().all(axis=1) & y.ne("") & y.ne("nan")
    dropped = int((~usable).sum())
    X, y = X[usable].reset_index(drop=True), y[usable].reset_index(drop=True)
    if task == TASK_BINARY:
        y = y.where(y == BENIGN, ANOMALY)
    y.name = "label"

    if y.nunique() < 2:
        raise DatasetError(
            f"{path.name}: single-class dataset ({y.unique().tolist()}); "
            f"{task} metrics are undefined"
        )
    return Prepared(X=X, y=y, dropped_nan_rows=dropped, source=path.name)
