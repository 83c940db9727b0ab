"""Model training and evaluation over prepared flow datasets.

Splits are stratified with a fixed, documented seed; models run library
defaults plus that seed, so every run over the same file is reproducible
bit for bit. Feature selection (when enabled) takes the top-k importances
of an Extremely Randomized Trees forest fitted on the training split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.ensemble import ExtraTreesClassifier, RandomForestClassifier
from sklearn.model_selection import train_test_split
from sklearn.naive_bayes import GaussianNB
from sklearn.tree import DecisionTreeClassifier

from .columns import EXCLUDED_KEY_COLUMNS
from .data import Prepared, prepare
from .metrics import AVERAGING_NOTE, MetricSet, compute_metrics

MODELS = ("RF", "DT", "NB")
SELECTION_NONE = "none"
SELECTION_EXTRA_TREES = "extra-trees-top-k"

DEFAULT_SEED = 42
DEFAULT_TEST_FRACTION = 0.3


@dataclass
class TaskSpec:
    task: str = "binary"
    model: str = "RF"
    seed: int = DEFAULT_SEED
    test_fraction: float = DEFAULT_TEST_FRACTION
    feature_selection: str = SELECTION_NONE
    top_k: int = 15

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r} (expected one of {MODELS})")
        if self.feature_selection not in (SELECTION_NONE, SELECTION_EXTRA_TREES):
            raise ValueError(f"unknown feature selection {self.feature_selection!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


@dataclass
class EvalReport:
    task: str
    model: str
    seed: int
    test_fraction: float
    source: str
    metrics: MetricSet
    n_train: int
    n_test: int
    dropped_nan_rows: int
    feature_names: list[str]
    feature_importances: list[tuple[str, float]] | None = None
    selected_features: list[str] | None = None
    averaging: str = AVERAGING_NOTE

    def as_dict(self) -> dict:
        out = {
            "task": self.task,
            "model": self.model,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "source": self.source,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "dropped_nan_rows": self.dropped_nan_rows,
            "feature_names": self.feature_names,
            "selected_features": self.selected_features,
            "feature_importances": self.feature_importances,
        }
        out.update(self.metrics.as_dict())
        return out


class SplitError(RuntimeError):
    """A class is too rare to stratify into both splits."""


def make_model(name: str, seed: int):
    if name == "RF":
        return RandomForestClassifier(random_state=seed)
    if name == "DT":
        return DecisionTreeClassifier(random_state=seed)
    if name == "NB":
        return GaussianNB()
    raise ValueError(f"unknown model {name!r}")


def select_top_features(
    X: pd.DataFrame, y: pd.Series, k: int, seed: int
) -> list[str]:
    """Top-k columns by Extremely Randomized Trees importance."""
    forest = ExtraTreesClassifier(random_state=seed)
    forest.fit(X, y)
    order = np.argsort(forest.feature_importances_)[::-1][:k]
    return [X.columns[i] for i in sorted(order)]


def split_dataset(X: pd.DataFrame, y: pd.Series, spec: TaskSpec):
    try:
        return train_test_split(
            X, y, test_size=spec.test_fraction, random_state=spec.seed, stratify=y
        )
    except ValueError as exc:
        raise SplitError(
            f"stratified split failed (a class is too rare): {exc}"
        ) from exc


def train_eval(prepared: Prepared, spec: TaskSpec) -> EvalReport:
    X, y = prepared.X, prepared.y
    leaked = [c for c in EXCLUDED_KEY_COLUMNS if c in X.columns]
    if leaked:
        raise ValueError(f"endpoint identity columns reached the model: {leaked}")

    X_train, X_test, y_train, y_test = split_dataset(X, y, spec)
    missing_train = set(y) - set(y_train)
    missing_test = set(y) - set(y_test)
    if missing_train or missing_test:
        raise SplitError(
            f"degenerate split: classes missing from train={missing_train} test={missing_test}"
        )

    selected = None
    if spec.feature_selection == SELECTION_EXTRA_TREES:
        selected = select_top_features(X_train, y_train, spec.top_k, spec.seed)
        X_train, X_test = X_train[selected], X_test[selected]

    model = make_model(spec.model, spec.seed)
    model.fit(X_train, y_train)
    y_pred = model.predict(X_test)
    proba = model.predict_proba(X_test)
    labels = [str(c) for c in model.classes_]
    if len(labels) == 2:
        scores = proba[:, labels.index("ANOMALY")] if "ANOMALY" in labels else proba[:, 1]
    else:
        scores = proba

    metrics = compute_metrics(y_test, y_pred, scores, labels=labels)
    importances = None
    if hasattr(model, "feature_importances_"):
        ranked = sorted(
            zip(list(X_train.columns), model.feature_importances_.tolist()),
            key=lambda item: -item[1],
        )
        importances = [(name, float(value)) for name, value in ranked]
    return EvalReport(
        task=spec.task,
        model=spec.model,
        seed=spec.seed,
        test_fraction=spec.test_fraction,
        source=prepared.source,
        metrics=metrics,
        n_train=len(X_train),
        n_test=len(X_test),
        dropped_nan_rows=prepared.dropped_nan_rows,
        feature_names=list(X_train.columns),
        feature_importances=importances,
        selected_features=selected,
    )


def evaluate_csv(csv_path, spec: TaskSpec) -> EvalReport:
    prepared = prepare(csv_path, spec.task)
    return train_eval(prepared, spec)


METRIC_ORDER = ("precision", "recall", "accuracy", "f1", "roc_auc")
LOW_METRIC_THRESHOLD = 0.9


def multi_model_compare(
    datasets: dict[str, str],
    tasks: tuple[str, ...] = ("binary", "multiclass"),
    models: tuple[str, ...] = MODELS,
    seed: int = DEFAULT_SEED,
    top_k: int = 15,
) -> tuple[list[dict], str]:
    """Dataset x task x model grid with Extra-Trees top-k selection applied.

    Returns (rows, rendered table); metric cells below 0.9 are flagged
    with '*' in the rendering.
    """
    rows: list[dict] = []
    for name, path in datasets.items():
        for task in tasks:
            prepared = prepare(path, task)
            for model in models:
                spec = TaskSpec(
                    task=task,
                    model=model,
                    seed=seed,
                    feature_selection=SELECTION_EXTRA_TREES,
                    top_k=top_k,
                )
                report = train_eval(prepared, spec)
                row = {"dataset": name, "task": task, "model": model}
                row.update(
                    {metric: getattr(report.metrics, metric) for metric in METRIC_ORDER}
                )
                rows.append(row)
    return rows, render_comparison(rows)


def render_comparison(rows: list[dict]) -> str:
    header = f"{'dataset':<18} {'task':<10} {'model':<5}" + "".join(
        f" {metric:>10}" for metric in METRIC_ORDER
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        cells = ""
        for metric in METRIC_ORDER:
            value = row[metric]
            flag = "*" if value < LOW_METRIC_THRESHOLD else " "
            cells += f" {value:>9.4f}{flag}"
        lines.append(f"{row['dataset']:<18} {row['task']:<10} {row['model']:<5}" + cells)
    return "\n".join(lines) + "\n"
