"""Classification metrics with explicit, documented conventions.

Binary scores treat ANOMALY as the positive class. Multi-class metrics are
weighted-averaged and ROC AUC is one-vs-rest weighted; the convention rides
along in every report so cross-study comparisons stay caveated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import (
    accuracy_score,
    confusion_matrix,
    f1_score,
    precision_score,
    recall_score,
    roc_auc_score,
)

from .data import ANOMALY

AVERAGING_NOTE = "binary: ANOMALY positive; multiclass: weighted, AUC one-vs-rest weighted"


@dataclass
class MetricSet:
    precision: float
    recall: float
    accuracy: float
    f1: float
    roc_auc: float
    labels: list[str]
    confusion: list[list[float]] = field(default_factory=list)  # row-normalized

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "labels": self.labels,
            "normalized_confusion": self.confusion,
            "averaging": AVERAGING_NOTE,
        }


def normalized_confusion(y_true, y_pred, labels: list[str]) -> list[list[float]]:
    """Row-normalized confusion matrix; an absent true class yields a zero row."""
    counts = confusion_matrix(y_true, y_pred, labels=labels).astype(float)
    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        normalized = np.where(rows > 0, counts / rows, 0.0)
    return normalized.tolist()


def compute_metrics(y_true, y_pred, scores, labels: list[str] | None = None) -> MetricSet:
    """Score predictions.

    ``scores`` is the positive-class probability vector for binary tasks or
    an (n, k) probability matrix whose columns follow ``labels`` order for
    multi-class tasks.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred))
    binary = len(labels) == 2 and ANOMALY in labels

    if binary:
        precision = precision_score(y_true, y_pred, pos_label=ANOMALY, zero_division=0)
        recall = recall_score(y_true, y_pred, pos_label=ANOMALY, zero_division=0)
        f1 = f1_score(y_true, y_pred, pos_label=ANOMALY, zero_division=0)
        roc_auc = roc_auc_score((y_true == ANOMALY).astype(int), np.asarray(scores))
    else:
        precision = precision_score(y_true, y_pred, average="weighted", zero_division=0)
        recall = recall_score(y_true, y_pred, average="weighted", zero_division=0)
        f1 = f1_score(y_true, y_pred, average="weighted", zero_division=0)
        roc_auc = roc_auc_score(
            y_true,
            np.asarray(scores),
            multi_class="ovr",
            average="weighted",
            labels=labels,
        )
    return MetricSet(
        precision=float(precision),
        recall=float(recall),
        accuracy=float(accuracy_score(y_true, y_pred)),
        f1=float(f1),
        roc_auc=float(roc_auc),
        labels=list(labels),
        confusion=normalized_confusion(y_true, y_pred, list(labels)),
    )
