"""Corpus handling: data model, CSV ingestion, quality filter, splits, balancing.

Comments arrive as one CSV (``id,subject_code,period,comment``), course
metadata as another, and human polarity labels as a third
(``comment_id,polarity``). Everything downstream consumes the in-memory
types defined here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from operator import itemgetter
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

__all__ = [
    "POLARITIES",
    "EDUCATION_LEVELS",
    "Comment",
    "CourseRecord",
    "DatasetSplit",
    "CorpusError",
    "load_comments",
    "load_courses",
    "load_labels",
    "attach_labels",
    "filter_quality",
    "split",
    "stratified_split_ids",
    "balance_courses",
    "write_comments_csv",
    "write_courses_csv",
    "write_labels_csv",
]

# Fixed class order used everywhere a polarity index appears.
POLARITIES = ("positive", "neutral", "negative")

EDUCATION_LEVELS = ("undergraduate", "postgraduate")

TRAIN_FRACTION = 0.64
TEST_FRACTION = 0.20

COMMENTS_HEADER = ["id", "subject_code", "period", "comment"]
COURSES_HEADER = [
    "subject_code",
    "period",
    "num_students",
    "score_pedagogy",
    "score_evaluation",
    "score_interpersonal",
    "education_level",
]
LABELS_HEADER = ["comment_id", "polarity"]


class CorpusError(Exception):
    """Raised for ingestion problems; the message names the offending row/column."""


@dataclass(frozen=True)
class Comment:
    """One student's free-text opinion about a course."""

    id: str
    subject_code: str
    period: str
    text: str
    label: str | None = None


@dataclass(frozen=True)
class CourseRecord:
    """Per-course metadata: enrollment and the three averaged 1-5 scores."""

    subject_code: str
    period: str
    num_students: int
    score_pedagogy: float
    score_evaluation: float
    score_interpersonal: float
    education_level: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject_code, self.period)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test comment-id lists plus the seed that made them."""

    train: list[str]
    validation: list[str]
    test: list[str]
    seed: int

    def all_ids(self) -> set[str]:
        return set(self.train) | set(self.validation) | set(self.test)


def _read_rows(path: Path, expected_header: list[str]) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise CorpusError(f"{path}: empty file, expected a CSV header")
            missing = [c for c in expected_header if c not in reader.fieldnames]
            if missing:
                raise CorpusError(f"{path}: missing required column(s) {missing}")
            return list(reader)
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not valid UTF-8 ({exc})") from exc


def load_comments(path: Path) -> list[Comment]:
    """Load comments from CSV, one :class:`Comment` per row.

    Raises :class:`CorpusError` naming the row and column for empty ids,
    duplicate ids, or missing fields.
    """
    rows = _read_rows(path, COMMENTS_HEADER)
    comments: list[Comment] = []
    seen: set[str] = set()
    for i, row in enumerate(rows, start=2):  # row 1 is the header
        for col in COMMENTS_HEADER:
            if row.get(col) is None or row[col].strip() == "":
                raise CorpusError(f"{path}: row {i}: missing value for '{col}'")
        cid = row["id"].strip()
        if cid in seen:
            raise CorpusError(f"{path}: row {i}: duplicate comment id '{cid}'")
        seen.add(cid)
        comments.append(
            Comment(
                id=cid,
                subject_code=row["subject_code"].strip(),
                period=row["period"].strip(),
                text=row["comment"],
            )
        )
    return comments


def load_courses(path: Path) -> list[CourseRecord]:
    rows = _read_rows(path, COURSES_HEADER)
    courses: list[CourseRecord] = []
    seen: set[tuple[str, str]] = set()
    for i, row in enumerate(rows, start=2):
        for col in COURSES_HEADER:
            if row.get(col) is None or row[col].strip() == "":
                raise CorpusError(f"{path}: row {i}: missing value for '{col}'")
        try:
            num_students = int(row["num_students"])
            scores = {
                name: float(row[name])
                for name in ("score_pedagogy", "score_evaluation", "score_interpersonal")
            }
        except ValueError as exc:
            raise CorpusError(f"{path}: row {i}: {exc}") from exc
        if num_students < 0:
            raise CorpusError(f"{path}: row {i}: num_students must be >= 0")
        for name, value in scores.items():
            if not 1.0 <= value <= 5.0:
                raise CorpusError(
                    f"{path}: row {i}: {name}={value} outside [1.0, 5.0]"
                )
        level = row["education_level"].strip()
        if level not in EDUCATION_LEVELS:
            raise CorpusError(
                f"{path}: row {i}: education_level must be one of {EDUCATION_LEVELS}"
            )
        key = (row["subject_code"].strip(), row["period"].strip())
        if key in seen:
            raise CorpusError(f"{path}: row {i}: duplicate course {key}")
        seen.add(key)
        courses.append(
            CourseRecord(
                subject_code=key[0],
                period=key[1],
                num_students=num_students,
                education_level=level,
                **scores,
            )
        )
    return courses


def load_labels(path: Path) -> dict[str, str]:
    """Load a ``comment_id,polarity`` CSV into a mapping; later rows win."""
    rows = _read_rows(path, LABELS_HEADER)
    labels: dict[str, str] = {}
    for i, row in enumerate(rows, start=2):
        cid = (row.get("comment_id") or "").strip()
        polarity = (row.get("polarity") or "").strip()
        if not cid:
            raise CorpusError(f"{path}: row {i}: missing value for 'comment_id'")
        if polarity not in POLARITIES:
            raise CorpusError(
                f"{path}: row {i}: polarity '{polarity}' not in {POLARITIES}"
            )
        labels[cid] = polarity
    return labels


def attach_labels(comments: Sequence[Comment], labels: dict[str, str]) -> list[Comment]:
    """Return comments with labels attached where the mapping provides one."""
    return [
        replace(c, label=labels[c.id]) if c.id in labels else c for c in comments
    ]


def filter_quality(
    comments: Sequence[Comment],
) -> tuple[list[Comment], list[Comment]]:
    """Drop comments with fewer than 5 whitespace tokens or 10 characters.

    The character count is taken after trimming surrounding whitespace; the
    word count is over raw whitespace-separated tokens. Returns
    ``(kept, dropped)`` preserving input order.
    """
    kept: list[Comment] = []
    dropped: list[Comment] = []
    for comment in comments:
        if len(comment.text.split()) >= 5 and len(comment.text.strip()) >= 10:
            kept.append(comment)
        else:
            dropped.append(comment)
    return kept, dropped


def _largest_remainder(ideals: list[float], total: int, caps: list[int]) -> list[int]:
    """Integer allocation summing to ``total``: floor the ideals, then hand out
    the remaining slots by descending fractional remainder (ties by position).
    ``caps`` bounds each position."""
    base = [min(math.floor(x), cap) for x, cap in zip(ideals, caps)]
    leftover = total - sum(base)
    order = sorted(
        range(len(ideals)), key=lambda i: (-(ideals[i] - math.floor(ideals[i])), i)
    )
    while leftover > 0:
        progressed = False
        for i in order:
            if leftover == 0:
                break
            if base[i] < caps[i]:
                base[i] += 1
                leftover -= 1
                progressed = True
        if not progressed:
            raise CorpusError("cannot allocate split sizes within class counts")
    return base


def stratified_split_ids(
    ids: Sequence[str], labels: Sequence[str], classes: Sequence[str], seed: int
) -> DatasetSplit:
    """Stratified 64/16/20 train/validation/test split over arbitrary ids.

    Global sizes are exact: ``|train| = round(0.64 N)``, ``|test| =
    round(0.20 N)``, and validation takes the remainder. Per-class
    proportions are preserved up to rounding. Deterministic for a fixed
    seed. Every class must have at least 3 members.
    """
    by_class: dict[str, list[str]] = {c: [] for c in classes}
    for item_id, label in zip(ids, labels):
        if label not in by_class:
            raise CorpusError(f"item '{item_id}' has unknown label '{label}'")
        by_class[label].append(item_id)

    for label, members in by_class.items():
        if len(members) < 3:
            raise CorpusError(
                f"class '{label}' has only {len(members)} labeled items; "
                "need at least 3 per class to stratify"
            )

    n = len(ids)
    n_train = int(round(TRAIN_FRACTION * n))
    n_test = int(round(TEST_FRACTION * n))

    counts = [len(by_class[c]) for c in classes]
    train_alloc = _largest_remainder(
        [c * n_train / n for c in counts], n_train, counts
    )
    remaining = [c - t for c, t in zip(counts, train_alloc)]
    test_alloc = _largest_remainder(
        [c * n_test / n for c in counts], n_test, remaining
    )

    rng = np.random.default_rng(seed)
    train: list[str] = []
    validation: list[str] = []
    test: list[str] = []
    for label, n_tr, n_te in zip(classes, train_alloc, test_alloc):
        members = by_class[label]
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        train.extend(shuffled[:n_tr])
        test.extend(shuffled[n_tr : n_tr + n_te])
        validation.extend(shuffled[n_tr + n_te :])
    return DatasetSplit(train=train, validation=validation, test=test, seed=seed)


def split(comments: Sequence[Comment], seed: int) -> DatasetSplit:
    """Stratified 64/16/20 split of labeled comments; see
    stratified_split_ids for the size and determinism contract."""
    for c in comments:
        if c.label is None:
            raise CorpusError(f"comment '{c.id}' has no label; cannot stratify")
    return stratified_split_ids(
        [c.id for c in comments], [c.label for c in comments], POLARITIES, seed
    )


T = TypeVar("T")


def balance_courses(
    items: Sequence[T],
    pivot: float = 4.4,
    seed: int = 0,
    score: Callable[[T], float] = itemgetter(1),
) -> list[T]:
    """Equalize counts on either side of ``pivot`` by undersampling the majority.

    ``score`` extracts the mean score from an item; by default items are
    ``(features, mean_score)`` pairs. Output preserves input order of the
    surviving items; deterministic for a fixed seed.
    """
    if not items:
        raise CorpusError("cannot balance an empty course list")
    above = [i for i, item in enumerate(items) if score(item) >= pivot]
    below = [i for i, item in enumerate(items) if score(item) < pivot]
    if not above or not below:
        raise CorpusError(
            f"cannot balance around {pivot}: {len(above)} courses above, "
            f"{len(below)} below"
        )
    rng = np.random.default_rng(seed)
    target = min(len(above), len(below))
    majority = above if len(above) > len(below) else below
    chosen = set(rng.choice(len(majority), size=target, replace=False).tolist())
    keep = set(above if majority is below else below)
    keep.update(majority[i] for i in chosen)
    return [item for i, item in enumerate(items) if i in keep]


def write_courses_csv(path: Path, courses: Sequence[CourseRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COURSES_HEADER)
        for r in courses:
            writer.writerow(
                [
                    r.subject_code,
                    r.period,
                    r.num_students,
                    f"{r.score_pedagogy:.2f}",
                    f"{r.score_evaluation:.2f}",
                    f"{r.score_interpersonal:.2f}",
                    r.education_level,
                ]
            )


def write_comments_csv(path: Path, comments: Sequence[Comment]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMMENTS_HEADER)
        for c in comments:
            writer.writerow([c.id, c.subject_code, c.period, c.text])


def write_labels_csv(path: Path, labels: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABELS_HEADER)
        for cid, polarity in labels.items():
            writer.writerow([cid, polarity])
