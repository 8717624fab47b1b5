"""Evaluation arithmetic: confusion matrices, macro-averaged accuracy, and
threshold-coverage curves for selective prediction."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import POLARITIES
from .validation import check_equal_length

__all__ = [
    "confusion",
    "macro_accuracy",
    "ThresholdCurve",
    "threshold_curve",
    "write_confusion_csv",
    "read_confusion_csv",
    "write_curve_csv",
    "read_curve_csv",
]


def confusion(
    true_labels: Sequence[str],
    predicted_labels: Sequence[str],
    classes: Sequence[str] = POLARITIES,
) -> np.ndarray:
    """Counts matrix with rows = true class, columns = predicted class."""
    check_equal_length("true_labels", true_labels, "predicted_labels", predicted_labels)
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        cm[index[t], index[p]] += 1
    return cm


def macro_accuracy(cm: np.ndarray, classes: Sequence[str] = POLARITIES) -> float:
    """Mean over classes of per-class accuracy ``cm[i][i] / rowsum(i)``.

    Every class must have at least one evaluated item; an empty row raises
    an error naming the class.
    """
    cm = np.asarray(cm)
    row_sums = cm.sum(axis=1)
    for i, total in enumerate(row_sums):
        if total == 0:
            raise ValueError(f"class '{classes[i]}' has no evaluated items")
    per_class = np.diag(cm) / row_sums
    return float(per_class.sum() / cm.shape[0])


@dataclass(frozen=True)
class ThresholdCurve:
    """Coverage and correctness of predictions above each confidence threshold.

    ``correctness`` is defined as 1.0 where no prediction clears the
    threshold; those points are flagged in ``empty_coverage``.
    """

    thresholds: tuple[float, ...]
    coverage: tuple[float, ...]
    correctness: tuple[float, ...]
    covered_counts: tuple[int, ...]
    empty_coverage: tuple[bool, ...]


def threshold_curve(
    predictions: Sequence,
    true_labels: Sequence[str],
    thresholds: Sequence[float],
) -> ThresholdCurve:
    """Selective-prediction curve over ascending thresholds in ``[0, 1]``.

    A prediction is covered at threshold ``t`` iff its confidence is
    strictly greater than ``t``; correctness is the fraction of covered
    predictions whose ``predicted_class`` matches the true label.
    """
    check_equal_length("predictions", predictions, "true_labels", true_labels)
    confidences = [p.confidence for p in predictions]
    correct = [p.predicted_class == t for p, t in zip(predictions, true_labels)]
    thresholds = [float(t) for t in thresholds]
    if any(not 0.0 <= t <= 1.0 for t in thresholds):
        raise ValueError("thresholds must lie in [0, 1]")
    if any(b > a for a, b in zip(thresholds[1:], thresholds)):
        raise ValueError("thresholds must be ascending")

    conf = np.asarray(confidences, dtype=np.float64)
    ok = np.asarray(correct, dtype=bool)
    n = len(conf)
    coverage, correctness, counts, empty = [], [], [], []
    for t in thresholds:
        covered = conf > t
        n_covered = int(covered.sum())
        counts.append(n_covered)
        coverage.append(n_covered / n if n else 0.0)
        if n_covered == 0:
            correctness.append(1.0)
            empty.append(True)
        else:
            correctness.append(float(ok[covered].sum() / n_covered))
            empty.append(False)
    return ThresholdCurve(
        thresholds=tuple(thresholds),
        coverage=tuple(coverage),
        correctness=tuple(correctness),
        covered_counts=tuple(counts),
        empty_coverage=tuple(empty),
    )


def write_confusion_csv(path: Path, cm: np.ndarray, classes: Sequence[str] = POLARITIES) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true\\predicted", *classes])
        for i, row_class in enumerate(classes):
            writer.writerow([row_class, *(int(v) for v in cm[i])])


def read_confusion_csv(path: Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[int(v) for v in row[1:]] for row in rows[1:]], dtype=np.int64)


def write_curve_csv(path: Path, curve: ThresholdCurve) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "coverage", "correctness", "covered_count"])
        for t, cov, corr, n in zip(
            curve.thresholds, curve.coverage, curve.correctness, curve.covered_counts
        ):
            writer.writerow([repr(float(t)), repr(cov), repr(corr), n])


def read_curve_csv(path: Path) -> ThresholdCurve:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    thresholds, coverage, correctness, counts = [], [], [], []
    for row in rows[1:]:
        thresholds.append(float(row[0]))
        coverage.append(float(row[1]))
        correctness.append(float(row[2]))
        counts.append(int(row[3]))
    return ThresholdCurve(
        thresholds=tuple(thresholds),
        coverage=tuple(coverage),
        correctness=tuple(correctness),
        covered_counts=tuple(counts),
        empty_coverage=tuple(n == 0 for n in counts),
    )
