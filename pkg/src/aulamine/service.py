"""HTTP API for confidence-threshold triage of polarity predictions.

Predictions at or below the threshold are queued for human review, most
uncertain first; confident predictions are accepted automatically, so the
two sets partition the corpus at any threshold. Human labels append to a
replayable JSONL log and export in the corpus labels-CSV format for
retraining.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Sequence

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .analytics import AnalyticsError, load_report
from .corpus import POLARITIES, Comment, write_labels_csv
from .textprep.preprocess import TokenizedDoc, preprocess

__all__ = ["TriageItem", "TriageState", "ServiceError", "create_app",
           "DEFAULT_THRESHOLD"]

# operator setting: where automation stops and human review starts
DEFAULT_THRESHOLD = 0.7


class ServiceError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


@dataclass
class TriageItem:
    comment_id: str
    text: str
    predicted_polarity: str
    confidence: float
    topic_id: int
    human_label: str | None = None

    @property
    def status(self) -> str:
        return "reviewed" if self.human_label is not None else "pending"

    def to_dict(self) -> dict:
        return {
            "comment_id": self.comment_id,
            "text": self.text,
            "predicted_polarity": self.predicted_polarity,
            "confidence": self.confidence,
            "topic_id": self.topic_id,
            "status": self.status,
            "human_label": self.human_label,
        }


@dataclass
class TriageState:
    """All triage items plus the append-only label log behind them."""

    items: dict[str, TriageItem]
    order: list[str]
    label_log_path: Path
    lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def build(
        cls,
        comments: Sequence[Comment],
        polarity_model,
        topic_model,
        label_log_path,
    ) -> "TriageState":
        """Score every comment once, then replay any existing label log."""
        config = polarity_model._config()
        docs = [
            TokenizedDoc(comment_id=c.id, tokens=preprocess(c.text, config).tokens)
            for c in comments
        ]
        predictions = polarity_model.predict_docs(docs)
        items: dict[str, TriageItem] = {}
        order: list[str] = []
        for comment, doc, prediction in zip(comments, docs, predictions):
            topic_id = int(np.argmax(topic_model.doc_topics(doc)))
            items[comment.id] = TriageItem(
                comment_id=comment.id,
                text=comment.text,
                predicted_polarity=prediction.predicted_class,
                confidence=float(prediction.confidence),
                topic_id=topic_id,
            )
            order.append(comment.id)
        state = cls(items=items, order=order,
                    label_log_path=Path(label_log_path))
        state.replay()
        return state

    def replay(self) -> None:
        """Reapply the label log; the latest entry per comment wins.
        Entries for unknown comments are ignored (they may belong to a
        different corpus snapshot)."""
        if not self.label_log_path.exists():
            return
        with self.label_log_path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                item = self.items.get(entry["comment_id"])
                if item is not None and entry["polarity"] in POLARITIES:
                    item.human_label = entry["polarity"]

    def add_label(self, comment_id: str, polarity: str,
                  reviewer: str = "anonymous") -> TriageItem:
        if polarity not in POLARITIES:
            raise ServiceError(
                400, "invalid_polarity",
                f"polarity must be one of {list(POLARITIES)}, got {polarity!r}",
            )
        with self.lock:
            item = self.items.get(comment_id)
            if item is None:
                raise ServiceError(
                    404, "unknown_comment",
                    f"no comment with id {comment_id!r}",
                )
            entry = {
                "comment_id": comment_id,
                "polarity": polarity,
                "timestamp": time.time(),
                "reviewer": reviewer,
            }
            self.label_log_path.parent.mkdir(parents=True, exist_ok=True)
            with self.label_log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            item.human_label = polarity
            return item

    def queue(self, threshold: float, limit: int | None = None) -> list[TriageItem]:
        if not 0.0 < threshold <= 1.0:
            raise ServiceError(
                400, "invalid_threshold",
                f"threshold must lie in (0, 1], got {threshold}",
            )
        if limit is not None and limit < 0:
            raise ServiceError(400, "invalid_limit", "limit must be >= 0")
        pending = [
            item for item in self.items.values()
            if item.status == "pending" and item.confidence <= threshold
        ]
        pending.sort(key=lambda item: (item.confidence, item.comment_id))
        if limit is not None:
            pending = pending[:limit]
        return pending

    def human_labels(self) -> dict[str, str]:
        return {
            cid: item.human_label
            for cid, item in self.items.items()
            if item.human_label is not None
        }


def create_app(state: TriageState, report_dir=None) -> FastAPI:
    """Wire the triage API around prepared state. ``report_dir`` feeds
    /api/stats; when absent or empty that endpoint answers 409."""
    app = FastAPI(title="comment triage service")

    @app.exception_handler(ServiceError)
    async def service_error_handler(_: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": exc.code, "message": exc.message},
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "comments": len(state.items)}

    @app.get("/api/queue")
    def queue(threshold: float = DEFAULT_THRESHOLD, limit: int = 50):
        items = state.queue(threshold, limit)
        return {
            "threshold": threshold,
            "count": len(items),
            "items": [item.to_dict() for item in items],
        }

    @app.get("/api/comments/{comment_id}")
    def get_comment(comment_id: str):
        item = state.items.get(comment_id)
        if item is None:
            raise ServiceError(404, "unknown_comment",
                               f"no comment with id {comment_id!r}")
        return item.to_dict()

    @app.post("/api/labels")
    async def post_label(request: Request):
        body = await request.json()
        comment_id = body.get("comment_id")
        polarity = body.get("polarity")
        reviewer = body.get("reviewer", "anonymous")
        if not isinstance(comment_id, str) or not isinstance(polarity, str):
            raise ServiceError(
                400, "invalid_body",
                "body must contain string fields comment_id and polarity",
            )
        item = state.add_label(comment_id, polarity, reviewer=reviewer)
        return {"status": "ok", "item": item.to_dict()}

    @app.get("/api/export/labels")
    def export_labels():
        labels = state.human_labels()
        buffer = StringIO()
        buffer.write("comment_id,polarity\n")
        for comment_id in sorted(labels):
            buffer.write(f"{comment_id},{labels[comment_id]}\n")
        return PlainTextResponse(buffer.getvalue(), media_type="text/csv")

    @app.get("/api/stats")
    def stats():
        if report_dir is None:
            raise ServiceError(
                409, "report_missing",
                "no report directory configured; build the report first",
            )
        try:
            return load_report(report_dir)
        except AnalyticsError as exc:
            raise ServiceError(
                409, "report_missing",
                f"{exc}; run the report stage to create it",
            )
    return app


def export_labels_csv(state: TriageState, path) -> None:
    """Write the human labels as a corpus labels CSV on disk."""
    write_labels_csv(Path(path), dict(sorted(state.human_labels().items())))
