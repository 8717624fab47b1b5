"""Descriptive statistics and report assembly.

Computes per-course response rates, groups comments by their hard
(argmax) topic and polarity assignments, summarizes course scores and
response rates per group with interpolated quartiles, and assembles the
final report directory consumed by the service and external plotting.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bundles import bundle_sha256
from .corpus import POLARITIES, Comment, CourseRecord
from .metrics import ThresholdCurve
from .textprep.preprocess import TokenizedDoc, preprocess
from .topics import TopicSummary

__all__ = [
    "AnalyticsError",
    "ResponseRate",
    "GroupStats",
    "response_rate",
    "response_rates",
    "assign_comments",
    "group_by_topic_polarity",
    "build_report",
    "load_report",
    "load_topic_names",
]

REPORT_KIND = "analytics-report"
REPORT_VERSION = 1


class AnalyticsError(Exception):
    """Raised when a report prerequisite is missing or a rate is undefined."""


@dataclass(frozen=True)
class ResponseRate:
    """Kept-comment count over enrolled students for one course."""

    course_key: tuple[str, str]
    kept_comments: int
    num_students: int
    rr: float
    exceeds_one: bool


@dataclass(frozen=True)
class GroupStats:
    """Five-number summary plus mean for one (topic, polarity) group."""

    topic_id: int
    polarity: str
    count: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float


def response_rate(course: CourseRecord, kept_comments: int) -> ResponseRate:
    """Response rate = kept comments / enrolled students. Zero enrollment
    leaves the rate undefined and raises; rates above 1 (students leaving
    several comments) are flagged, not rejected."""
    if course.num_students == 0:
        raise AnalyticsError(
            f"course {course.subject_code}/{course.period} has zero enrolled "
            "students; response rate is undefined"
        )
    rr = kept_comments / course.num_students
    return ResponseRate(
        course_key=course.key,
        kept_comments=kept_comments,
        num_students=course.num_students,
        rr=rr,
        exceeds_one=rr > 1.0,
    )


def response_rates(
    courses: Sequence[CourseRecord], comments: Sequence[Comment]
) -> tuple[list[ResponseRate], list[tuple[str, str]]]:
    """Rates for every course, plus the keys of courses whose rate is
    undefined (zero enrollment)."""
    counts: dict[tuple[str, str], int] = {}
    for comment in comments:
        key = (comment.subject_code, comment.period)
        counts[key] = counts.get(key, 0) + 1
    rates: list[ResponseRate] = []
    undefined: list[tuple[str, str]] = []
    for course in courses:
        try:
            rates.append(response_rate(course, counts.get(course.key, 0)))
        except AnalyticsError:
            undefined.append(course.key)
    return rates, undefined


def _five_numbers(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    arr = np.asarray(values, dtype=np.float64)
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    return tuple(float(v) for v in q)


def assign_comments(
    comments: Sequence[Comment], polarity_model, topic_model
) -> list[tuple[Comment, int, str]]:
    """Hard (argmax) topic and polarity assignment per comment."""
    config = polarity_model._config()
    out = []
    for comment in comments:
        doc = TokenizedDoc(
            comment_id=comment.id, tokens=preprocess(comment.text, config).tokens
        )
        prediction = polarity_model.predict_docs([doc])[0]
        topic_id = int(np.argmax(topic_model.doc_topics(doc)))
        out.append((comment, topic_id, prediction.predicted_class))
    return out


def group_by_topic_polarity(
    comments: Sequence[Comment],
    polarity_model,
    topic_model,
    courses: Sequence[CourseRecord],
    score_field: str = "score_evaluation",
) -> tuple[list[GroupStats], list[GroupStats]]:
    """Quartile summaries of course scores and of course response rates,
    one row per non-empty (topic, polarity) group.

    Each comment contributes its course's score and response rate to the
    single group given by its argmax topic and argmax polarity. Comments
    whose course is unknown, or whose course has an undefined response
    rate, are left out of the respective summary.
    """
    course_by_key = {c.key: c for c in courses}
    rates, _ = response_rates(courses, comments)
    rate_by_key = {r.course_key: r.rr for r in rates}
    score_groups: dict[tuple[int, str], list[float]] = {}
    rr_groups: dict[tuple[int, str], list[float]] = {}
    for comment, topic_id, polarity in assign_comments(
        comments, polarity_model, topic_model
    ):
        key = (comment.subject_code, comment.period)
        group = (topic_id, polarity)
        course = course_by_key.get(key)
        if course is not None:
            score_groups.setdefault(group, []).append(
                float(getattr(course, score_field))
            )
            if key in rate_by_key:
                rr_groups.setdefault(group, []).append(rate_by_key[key])

    def summarize(groups: Mapping[tuple[int, str], list[float]]) -> list[GroupStats]:
        stats = []
        for (topic_id, polarity) in sorted(
            groups, key=lambda g: (g[0], POLARITIES.index(g[1]))
        ):
            values = groups[(topic_id, polarity)]
            lo, q1, med, q3, hi = _five_numbers(values)
            stats.append(GroupStats(
                topic_id=topic_id, polarity=polarity, count=len(values),
                minimum=lo, q1=q1, median=med, q3=q3, maximum=hi,
                mean=float(np.mean(values)),
            ))
        return stats

    return summarize(score_groups), summarize(rr_groups)


# ---------------------------------------------------------------------------
# Report assembly


def _write_csv(path: Path, header: list[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _group_rows(stats: Sequence[GroupStats]) -> list[list]:
    return [
        [s.topic_id, s.polarity, s.count, repr(s.minimum), repr(s.q1),
         repr(s.median), repr(s.q3), repr(s.maximum), repr(s.mean)]
        for s in stats
    ]


_GROUP_HEADER = ["topic_id", "polarity", "count", "min", "q1", "median",
                 "q3", "max", "mean"]


def load_topic_names(path) -> dict[int, str]:
    """Read the human topic-name overlay CSV (``topic_id,label``)."""
    names: dict[int, str] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["topic_id", "label"]:
            raise AnalyticsError(
                "topic-name overlay must have header 'topic_id,label'"
            )
        for row in reader:
            names[int(row[0])] = row[1]
    return names


def build_report(
    report_dir,
    *,
    confusion_train: np.ndarray,
    confusion_test: np.ndarray,
    macro_train: float,
    macro_test: float,
    curve: ThresholdCurve,
    topic_summaries: Sequence[TopicSummary],
    group_scores: Sequence[GroupStats],
    group_rr: Sequence[GroupStats],
    rates: Sequence[ResponseRate],
    undefined_rr: Sequence[tuple[str, str]] = (),
    topic_names: Mapping[int, str] | None = None,
    bundle_hashes: Mapping[str, str] | None = None,
    scorer_summary: Mapping | None = None,
) -> None:
    """Write the report manifest plus CSV sidecars into ``report_dir``.

    Topics without an overlay name are called ``topic-<id>``. Bundle
    hashes record which model artifacts produced the numbers.
    """
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    names = dict(topic_names or {})

    def topic_name(k: int) -> str:
        return names.get(k, f"topic-{k}")

    manifest = {
        "kind": REPORT_KIND,
        "format_version": REPORT_VERSION,
        "classes": list(POLARITIES),
        "macro_train": float(macro_train),
        "macro_test": float(macro_test),
        "topics": [
            {
                "topic_id": s.topic_id,
                "name": topic_name(s.topic_id),
                "top_words": [[w, p] for w, p in s.top_words],
                "representative_comments": [
                    [cid, p] for cid, p in s.representative_comments
                ],
            }
            for s in topic_summaries
        ],
        "empty_coverage_thresholds": [float(t) for t in curve.empty_coverage],
        "undefined_response_rates": [list(k) for k in undefined_rr],
        "bundle_hashes": dict(bundle_hashes or {}),
        "scorer": dict(scorer_summary or {}),
    }
    (report_dir / "report.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )

    classes = list(POLARITIES)
    for name, cm in (("confusion_train.csv", confusion_train),
                     ("confusion_test.csv", confusion_test)):
        rows = [[classes[i]] + [int(v) for v in cm[i]] for i in range(len(classes))]
        _write_csv(report_dir / name, ["true\\predicted"] + classes, rows)

    _write_csv(
        report_dir / "threshold_curve.csv",
        ["threshold", "coverage", "correctness", "covered_count"],
        [
            [repr(float(t)), repr(float(cov)), repr(float(corr)), int(n)]
            for t, cov, corr, n in zip(curve.thresholds, curve.coverage,
                                       curve.correctness, curve.covered_counts)
        ],
    )

    _write_csv(
        report_dir / "topics.csv",
        ["topic_id", "name", "rank", "word", "weight"],
        [
            [s.topic_id, topic_name(s.topic_id), rank, word, repr(weight)]
            for s in topic_summaries
            for rank, (word, weight) in enumerate(s.top_words)
        ],
    )

    _write_csv(report_dir / "group_scores.csv", _GROUP_HEADER,
               _group_rows(group_scores))
    _write_csv(report_dir / "group_rr.csv", _GROUP_HEADER, _group_rows(group_rr))

    _write_csv(
        report_dir / "response_rates.csv",
        ["subject_code", "period", "kept_comments", "num_students", "rr",
         "exceeds_one"],
        [
            [r.course_key[0], r.course_key[1], r.kept_comments, r.num_students,
             repr(r.rr), int(r.exceeds_one)]
            for r in rates
        ],
    )


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def load_report(report_dir) -> dict:
    """Read a report directory back into one dictionary; raises
    AnalyticsError naming any missing piece."""
    report_dir = Path(report_dir)
    manifest_path = report_dir / "report.json"
    if not manifest_path.exists():
        raise AnalyticsError(f"missing report manifest: {manifest_path}")
    report = json.loads(manifest_path.read_text(encoding="utf-8"))
    if report.get("kind") != REPORT_KIND:
        raise AnalyticsError("not an analytics report manifest")
    for name in ("confusion_train.csv", "confusion_test.csv",
                 "threshold_curve.csv", "topics.csv", "group_scores.csv",
                 "group_rr.csv", "response_rates.csv"):
        path = report_dir / name
        if not path.exists():
            raise AnalyticsError(f"missing report sidecar: {path}")
    for name, key in (("confusion_train.csv", "confusion_train"),
                      ("confusion_test.csv", "confusion_test")):
        _, rows = _read_csv(report_dir / name)
        report[key] = [[int(v) for v in row[1:]] for row in rows]
    _, rows = _read_csv(report_dir / "threshold_curve.csv")
    report["threshold_curve"] = [
        {"threshold": float(r[0]), "coverage": float(r[1]),
         "correctness": float(r[2]), "covered_count": int(r[3])}
        for r in rows
    ]
    for name, key in (("group_scores.csv", "group_scores"),
                      ("group_rr.csv", "group_rr")):
        _, rows = _read_csv(report_dir / name)
        report[key] = [
            {"topic_id": int(r[0]), "polarity": r[1], "count": int(r[2]),
             "min": float(r[3]), "q1": float(r[4]), "median": float(r[5]),
             "q3": float(r[6]), "max": float(r[7]), "mean": float(r[8])}
            for r in rows
        ]
    _, rows = _read_csv(report_dir / "response_rates.csv")
    report["response_rates"] = [
        {"subject_code": r[0], "period": r[1], "kept_comments": int(r[2]),
         "num_students": int(r[3]), "rr": float(r[4]),
         "exceeds_one": bool(int(r[5]))}
        for r in rows
    ]
    return report


def hash_bundles(paths: Mapping[str, str | Path]) -> dict[str, str]:
    """Provenance hashes for the model bundles feeding a report."""
    return {name: bundle_sha256(Path(p)) for name, p in paths.items()}
