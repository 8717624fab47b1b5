"""Course score-bucket prediction from aggregated comment features.

A course is represented by the mean embedding of its kept comments plus
the mean of their topic probabilities. A gradient-boosted ensemble of
depth-limited regression trees (one tree per class per round, softmax
objective) predicts whether the course's mean evaluation score falls in
the very-high, high, or moderate bucket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .bundles import (BundleError, read_array, read_manifest, write_array,
                      write_manifest)
from .corpus import Comment, CourseRecord
from .textprep.preprocess import TokenizedDoc, preprocess
from .validation import check_equal_length, check_feature_matrix

__all__ = [
    "BUCKETS",
    "bucketize",
    "CourseFeatures",
    "build_features",
    "GradientBoostedScorer",
]

BUCKETS = ("very_high", "high", "moderate")

BUNDLE_KIND = "score-model"
BUNDLE_VERSION = 1


def bucketize(mean_score: float) -> str:
    """Bucket for a mean evaluation score: [4.5, 5.0] is very_high,
    [4.0, 4.5) is high, [1.0, 4.0) is moderate."""
    if not 1.0 <= mean_score <= 5.0:
        raise ValueError(f"mean score {mean_score} outside [1.0, 5.0]")
    if mean_score >= 4.5:
        return "very_high"
    if mean_score >= 4.0:
        return "high"
    return "moderate"


@dataclass(frozen=True)
class CourseFeatures:
    """Aggregated model features for one course."""

    course_key: tuple[str, str]
    embedding: np.ndarray
    topic_probs: np.ndarray
    n_comments: int

    def vector(self) -> np.ndarray:
        return np.concatenate([self.embedding, self.topic_probs])


def build_features(
    courses: Sequence[CourseRecord],
    comments: Sequence[Comment],
    polarity_model,
    topic_model,
) -> tuple[list[CourseFeatures], list[tuple[str, str]]]:
    """Mean comment embedding and mean topic probabilities per course.

    Comments should already be quality-filtered. Courses with no kept
    comments are skipped; their keys are returned separately. Output
    order follows the course list.
    """
    config = polarity_model._config()
    by_course: dict[tuple[str, str], list[Comment]] = {}
    for comment in comments:
        by_course.setdefault((comment.subject_code, comment.period), []).append(
            comment
        )
    features: list[CourseFeatures] = []
    skipped: list[tuple[str, str]] = []
    for course in courses:
        members = by_course.get(course.key, [])
        if not members:
            skipped.append(course.key)
            continue
        docs = [
            TokenizedDoc(comment_id=c.id, tokens=preprocess(c.text, config).tokens)
            for c in members
        ]
        embedding = np.mean([polarity_model.embed_doc(d) for d in docs], axis=0)
        topic_probs = np.mean([topic_model.doc_topics(d) for d in docs], axis=0)
        features.append(CourseFeatures(
            course_key=course.key,
            embedding=embedding,
            topic_probs=topic_probs,
            n_comments=len(members),
        ))
    return features, skipped


# ---------------------------------------------------------------------------
# Regression trees


def _best_split(x: np.ndarray, residual: np.ndarray):
    """Exact greedy least-squares split: returns (feature, float32
    threshold) or None. Candidates are ranked by gain with deterministic
    ties (lowest feature, then lowest threshold); a candidate whose
    float32 threshold fails to separate the rows is discarded."""
    n, m = x.shape
    total = residual.sum()
    base_score = total * total / n
    candidates = []  # (negative gain, feature, threshold)
    for j in range(m):
        order = np.argsort(x[:, j], kind="stable")
        values = x[order, j]
        sums = np.cumsum(residual[order])
        best_gain = 0.0
        best_thr = None
        for i in range(1, n):
            if values[i - 1] == values[i]:
                continue
            left = sums[i - 1]
            right = total - left
            gain = left * left / i + right * right / (n - i) - base_score
            if gain > best_gain + 1e-12:
                thr = np.float32(values[i - 1] + (values[i] - values[i - 1]) / 2.0)
                best_gain = float(gain)
                best_thr = float(thr)
        if best_thr is not None:
            candidates.append((-best_gain, j, best_thr))
    for _, j, thr in sorted(candidates):
        mask = x[:, j] <= thr
        count = int(mask.sum())
        if 0 < count < n:
            return j, thr
    return None


def _leaf_value(residual: np.ndarray, n_classes: int) -> float:
    numerator = residual.sum()
    denominator = float(np.sum(np.abs(residual) * (1.0 - np.abs(residual))))
    if denominator <= 0.0:
        return 0.0
    return (n_classes - 1) / n_classes * numerator / denominator


class _Tree:
    """Flat-array regression tree: feature < 0 marks a leaf."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def grow(self, x: np.ndarray, residual: np.ndarray, rows: np.ndarray,
             depth: int, max_depth: int, n_classes: int) -> int:
        node = self._add_node()
        r = residual[rows]
        if depth < max_depth and len(rows) >= 2 and not np.all(r == r[0]):
            split = _best_split(x[rows], r)
            if split is not None:
                j, thr = split
                mask = x[rows, j] <= thr
                self.feature[node] = j
                self.threshold[node] = thr
                self.left[node] = self.grow(x, residual, rows[mask],
                                            depth + 1, max_depth, n_classes)
                self.right[node] = self.grow(x, residual, rows[~mask],
                                             depth + 1, max_depth, n_classes)
                return node
        self.value[node] = float(np.float32(_leaf_value(r, n_classes)))
        return node

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape[0], dtype=np.float64)
        for i in range(x.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if x[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


class GradientBoostedScorer(BaseEstimator):
    """Multiclass softmax gradient boosting over the fixed bucket order
    [very_high, high, moderate].

    Per round, one least-squares regression tree per class fits the
    residual (one-hot minus probability); leaves apply the multiclass
    Newton step. Splits are exact greedy over sorted feature values, so
    training is deterministic; ``seed`` is kept for interface uniformity
    and recorded in bundles but no subsampling uses it. Zero rounds leave
    all scores at 0, which predicts uniform probabilities.
    """

    def __init__(self, n_rounds: int = 100, max_depth: int = 3,
                 learning_rate: float = 0.1, seed: int = 0):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.seed = seed

    # ------------------------------------------------------------------
    def fit(self, x, buckets: Sequence[str]) -> "GradientBoostedScorer":
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        x = check_feature_matrix(x)
        check_equal_length("x", x, "buckets", buckets)
        index = {b: i for i, b in enumerate(BUCKETS)}
        y = np.empty(len(buckets), dtype=np.int64)
        for i, b in enumerate(buckets):
            if b not in index:
                raise ValueError(f"unknown bucket label: {b!r}")
            y[i] = index[b]
        if len(set(buckets)) < 2:
            raise ValueError("training data contains a single bucket")

        n, n_classes = x.shape[0], len(BUCKETS)
        onehot = np.zeros((n, n_classes), dtype=np.float64)
        onehot[np.arange(n), y] = 1.0
        scores = np.zeros((n, n_classes), dtype=np.float64)
        self.n_features_ = x.shape[1]
        self.trees_: list[list[_Tree]] = []
        self.training_log_loss_ = [self._log_loss(scores, y)]
        rows = np.arange(n)
        for _ in range(self.n_rounds):
            probs = _softmax_rows(scores)
            round_trees = []
            for k in range(n_classes):
                residual = onehot[:, k] - probs[:, k]
                tree = _Tree()
                tree.grow(x, residual, rows, 0, self.max_depth, n_classes)
                round_trees.append(tree)
                scores[:, k] += self.learning_rate * tree.predict(x)
            self.trees_.append(round_trees)
            self.training_log_loss_.append(self._log_loss(scores, y))
        return self

    @staticmethod
    def _log_loss(scores: np.ndarray, y: np.ndarray) -> float:
        probs = _softmax_rows(scores)
        return float(np.mean(-np.log(probs[np.arange(len(y)), y])))

    # ------------------------------------------------------------------
    def decision_scores(self, x) -> np.ndarray:
        x = check_feature_matrix(x, n_features=self.n_features_)
        scores = np.zeros((x.shape[0], len(BUCKETS)), dtype=np.float64)
        for round_trees in self.trees_:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict(x)
        return scores

    def predict_proba(self, x) -> np.ndarray:
        return _softmax_rows(self.decision_scores(x))

    def predict(self, x) -> list[str]:
        probs = self.predict_proba(x)
        return [BUCKETS[i] for i in np.argmax(probs, axis=1)]

    def predict_bucket(self, features: CourseFeatures) -> tuple[str, np.ndarray]:
        """Bucket and probability vector for one course's features."""
        probs = self.predict_proba(features.vector()[None, :])[0]
        return BUCKETS[int(np.argmax(probs))], probs

    # ------------------------------------------------------------------
    def save(self, bundle_dir) -> None:
        flat_feature: list[int] = []
        flat_threshold: list[float] = []
        flat_left: list[int] = []
        flat_right: list[int] = []
        flat_value: list[float] = []
        node_counts: list[int] = []
        for round_trees in self.trees_:
            for tree in round_trees:
                node_counts.append(len(tree.feature))
                flat_feature.extend(tree.feature)
                flat_threshold.extend(tree.threshold)
                flat_left.extend(tree.left)
                flat_right.extend(tree.right)
                flat_value.extend(tree.value)
        manifest = {
            "kind": BUNDLE_KIND,
            "format_version": BUNDLE_VERSION,
            "n_rounds": int(self.n_rounds),
            "max_depth": int(self.max_depth),
            "learning_rate": float(self.learning_rate),
            "seed": int(self.seed),
            "classes": list(BUCKETS),
            "n_features": int(self.n_features_),
            "node_counts": node_counts,
            "training_log_loss": self.training_log_loss_,
        }
        bundle_dir = Path(bundle_dir)
        bundle_dir.mkdir(parents=True, exist_ok=True)
        manifest["entries"] = {
            "node_feature": write_array(
                bundle_dir, "node_feature",
                np.asarray(flat_feature, dtype=np.int32)),
            "node_threshold": write_array(
                bundle_dir, "node_threshold",
                np.asarray(flat_threshold, dtype=np.float32)),
            "node_left": write_array(
                bundle_dir, "node_left", np.asarray(flat_left, dtype=np.int32)),
            "node_right": write_array(
                bundle_dir, "node_right",
                np.asarray(flat_right, dtype=np.int32)),
            "node_value": write_array(
                bundle_dir, "node_value",
                np.asarray(flat_value, dtype=np.float32)),
        }
        write_manifest(bundle_dir, manifest)

    @classmethod
    def load(cls, bundle_dir) -> "GradientBoostedScorer":
        manifest = read_manifest(bundle_dir, kind=BUNDLE_KIND,
                                 version=BUNDLE_VERSION)
        if tuple(manifest["classes"]) != BUCKETS:
            raise ValueError("bundle class order does not match")
        model = cls(
            n_rounds=manifest["n_rounds"],
            max_depth=manifest["max_depth"],
            learning_rate=manifest["learning_rate"],
            seed=manifest["seed"],
        )
        model.n_features_ = manifest["n_features"]
        model.training_log_loss_ = [float(v) for v in
                                    manifest["training_log_loss"]]
        node_counts = manifest["node_counts"]
        entries = manifest["entries"]
        feature = read_array(bundle_dir, entries["node_feature"])
        threshold = read_array(bundle_dir, entries["node_threshold"])
        left = read_array(bundle_dir, entries["node_left"])
        right = read_array(bundle_dir, entries["node_right"])
        value = read_array(bundle_dir, entries["node_value"])
        if len(feature) != sum(node_counts):
            raise BundleError(
                "tree node arrays do not match manifest node counts")
        n_classes = len(BUCKETS)
        model.trees_ = []
        offset = 0
        for t, count in enumerate(node_counts):
            if t % n_classes == 0:
                model.trees_.append([])
            tree = _Tree()
            tree.feature = [int(v) for v in feature[offset:offset + count]]
            tree.threshold = [float(v) for v in threshold[offset:offset + count]]
            tree.left = [int(v) for v in left[offset:offset + count]]
            tree.right = [int(v) for v in right[offset:offset + count]]
            tree.value = [float(v) for v in value[offset:offset + count]]
            model.trees_[-1].append(tree)
            offset += count
        return model
