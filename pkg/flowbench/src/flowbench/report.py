"""Report rendering: JSON metrics, confusion-matrix and importance images."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import EvalReport  # noqa: E402


def write_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def save_confusion_png(report: EvalReport, path: str | Path) -> None:
    matrix = report.metrics.confusion
    labels = report.metrics.labels
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(labels), 1.0 + 0.9 * len(labels)))
    image = ax.imshow(matrix, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(labels)), labels, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"{report.source} {report.model} {report.task}", fontsize=8)
    for i, row in enumerate(matrix):
        for j, value in enumerate(row):
            ax.text(
                j, i, f"{value:.2f}",
                ha="center", va="center", fontsize=6,
                color="white" if value > 0.5 else "black",
            )
    fig.colorbar(image, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_importance_png(report: EvalReport, path: str | Path, top: int = 20) -> bool:
    if not report.feature_importances:
        return False
    ranked = report.feature_importances[:top]
    names = [name for name, _ in ranked][::-1]
    values = [value for _, value in ranked][::-1]
    fig, ax = plt.subplots(figsize=(6, 0.28 * len(ranked) + 1.2))
    ax.barh(names, values, color="#4878a8")
    ax.set_xlabel("importance")
    ax.set_title(f"{report.source} {report.model} {report.task}", fontsize=8)
    ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True
