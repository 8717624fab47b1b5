"""Latent topic discovery over preprocessed comments via collapsed Gibbs
sampling.

Each token carries a topic assignment; one sweep resamples every token
from p(z = k | rest) proportional to (n_dk + alpha) * (n_kw + beta) /
(n_k + V*beta). Documents and topics are summarized from the resulting
count tables. Unseen documents are folded in by resampling only their own
assignments against frozen topic-word counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from .bundles import (
    BundleError,
    read_array,
    read_lines,
    read_manifest,
    write_array,
    write_lines,
    write_manifest,
)
from .seeds import derive_seed
from .textprep.preprocess import TokenizedDoc
from .textprep.vocab import Vocabulary

__all__ = ["TopicSummary", "LatentTopicModel"]

BUNDLE_KIND = "topic-model"
BUNDLE_VERSION = 1


@dataclass(frozen=True)
class TopicSummary:
    """Top words and most-representative comments for one topic."""

    topic_id: int
    top_words: tuple[tuple[str, float], ...]
    representative_comments: tuple[tuple[str, float], ...]


def _coerce(doc) -> tuple[str | None, tuple[str, ...]]:
    if isinstance(doc, TokenizedDoc):
        return doc.comment_id, doc.tokens
    return None, tuple(doc)


class LatentTopicModel(BaseEstimator):
    """LDA fit by collapsed Gibbs sampling.

    Parameters
    ----------
    n_topics : number of latent topics, at least 2.
    alpha : symmetric document-topic prior; None means 50 / n_topics.
    beta : symmetric topic-word prior.
    iterations : Gibbs sweeps over the whole corpus.
    fold_in_sweeps : sweeps used when inferring an unseen document.
    seed : deterministic seed for initialization and sampling.
    """

    def __init__(self, n_topics: int = 5, alpha: float | None = None,
                 beta: float = 0.01, iterations: int = 500,
                 fold_in_sweeps: int = 20, seed: int = 0):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.iterations = iterations
        self.fold_in_sweeps = fold_in_sweeps
        self.seed = seed

    # ------------------------------------------------------------------
    def _effective_alpha(self) -> float:
        return 50.0 / self.n_topics if self.alpha is None else float(self.alpha)

    def fit(self, docs: Sequence) -> "LatentTopicModel":
        if self.n_topics < 2:
            raise ValueError("n_topics must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.beta <= 0 or self._effective_alpha() <= 0:
            raise ValueError("alpha and beta must be positive")

        kept_ids: list[str] = []
        kept_tokens: list[tuple[str, ...]] = []
        for i, doc in enumerate(docs):
            comment_id, tokens = _coerce(doc)
            if len(tokens) == 0:
                continue
            kept_ids.append(comment_id if comment_id is not None else str(i))
            kept_tokens.append(tokens)
        if not kept_tokens:
            raise ValueError("no non-empty documents to fit")

        vocab = Vocabulary.build(kept_tokens, min_count=1)
        self.vocabulary_ = vocab
        self.doc_ids_ = tuple(kept_ids)
        self._doc_row_ = {cid: i for i, cid in enumerate(kept_ids)}

        token_word: list[int] = []
        token_doc: list[int] = []
        for d, tokens in enumerate(kept_tokens):
            for tok in tokens:
                token_word.append(vocab.index[tok])
                token_doc.append(d)
        n_tokens = len(token_word)
        if self.n_topics > n_tokens:
            raise ValueError("n_topics exceeds the total token count")

        n_docs = len(kept_tokens)
        vocab_size = len(vocab.tokens)
        self.token_word_ = np.asarray(token_word, dtype=np.int32)
        self.token_doc_ = np.asarray(token_doc, dtype=np.int32)
        self.doc_topic_ = np.zeros((n_docs, self.n_topics), dtype=np.int32)
        self.topic_word_ = np.zeros((self.n_topics, vocab_size), dtype=np.int32)
        self.topic_totals_ = np.zeros(self.n_topics, dtype=np.int32)
        self.assignments_ = np.zeros(n_tokens, dtype=np.int32)
        log_likelihoods = np.zeros(self.iterations, dtype=np.float64)

        state = _kernels.rng_state_from_seed(derive_seed(self.seed, "topics:fit"))
        _kernels.gibbs_fit(
            self.token_word_, self.token_doc_, n_docs, self.n_topics,
            vocab_size, self._effective_alpha(), float(self.beta),
            int(self.iterations), state, self.doc_topic_, self.topic_word_,
            self.topic_totals_, self.assignments_, log_likelihoods,
        )
        self.log_likelihoods_ = [float(v) for v in log_likelihoods]
        return self

    # ------------------------------------------------------------------
    def check_counts(self) -> None:
        """Verify count tables against the raw assignments; raises on any
        mismatch."""
        n_docs, n_topics = self.doc_topic_.shape
        doc_topic = np.zeros_like(self.doc_topic_)
        topic_word = np.zeros_like(self.topic_word_)
        for i in range(self.assignments_.shape[0]):
            k = self.assignments_[i]
            doc_topic[self.token_doc_[i], k] += 1
            topic_word[k, self.token_word_[i]] += 1
        if not np.array_equal(doc_topic, self.doc_topic_):
            raise AssertionError("document-topic counts do not match assignments")
        if not np.array_equal(topic_word, self.topic_word_):
            raise AssertionError("topic-word counts do not match assignments")
        if not np.array_equal(topic_word.sum(axis=1),
                              self.topic_totals_.astype(np.int64)):
            raise AssertionError("topic totals do not match topic-word counts")
        if int(self.topic_totals_.sum()) != self.assignments_.shape[0]:
            raise AssertionError("topic totals do not sum to the token count")

    # ------------------------------------------------------------------
    def _smooth_rows(self, counts: np.ndarray, prior: float) -> np.ndarray:
        c = counts.astype(np.float64)
        return (c + prior) / (c.sum(axis=-1, keepdims=True)
                              + c.shape[-1] * prior)

    def doc_topics_matrix(self) -> np.ndarray:
        """Topic probabilities for every training document, row per doc."""
        return self._smooth_rows(self.doc_topic_, self._effective_alpha())

    def doc_topics(self, doc) -> np.ndarray:
        """Topic probabilities for one document.

        Training documents (matched by comment id) read their fitted
        counts; anything else is folded in with frozen topic-word counts.
        A document with no in-vocabulary tokens is uniform.
        """
        comment_id, tokens = _coerce(doc)
        if comment_id is not None and comment_id in self._doc_row_:
            row = self.doc_topic_[self._doc_row_[comment_id]]
            return self._smooth_rows(row, self._effective_alpha())
        word_ids = [self.vocabulary_.index[t] for t in tokens
                    if t in self.vocabulary_.index]
        alpha = self._effective_alpha()
        if not word_ids:
            return np.full(self.n_topics, 1.0 / self.n_topics)
        key = "topics:fold-in:" + "\x1f".join(tokens)
        state = _kernels.rng_state_from_seed(derive_seed(self.seed, key))
        counts = _kernels.gibbs_fold_in(
            np.asarray(word_ids, dtype=np.int32), self.n_topics, alpha,
            float(self.beta), self.topic_word_.shape[1], self.topic_word_,
            self.topic_totals_, int(self.fold_in_sweeps), state,
        )
        return self._smooth_rows(counts, alpha)

    # ------------------------------------------------------------------
    def topic_word_probs(self) -> np.ndarray:
        """Smoothed word distribution per topic, row per topic."""
        return self._smooth_rows(self.topic_word_, float(self.beta))

    def summarize(self, top_n_words: int = 10,
                  top_n_docs: int = 3) -> list[TopicSummary]:
        """Top words and highest-probability training comments per topic."""
        word_probs = self.topic_word_probs()
        doc_probs = self.doc_topics_matrix()
        words = self.vocabulary_.tokens
        summaries = []
        for k in range(self.n_topics):
            order = sorted(range(len(words)),
                           key=lambda w: (-word_probs[k, w], words[w]))
            top_words = tuple(
                (words[w], float(word_probs[k, w])) for w in order[:top_n_words]
            )
            doc_order = sorted(range(len(self.doc_ids_)),
                               key=lambda d: (-doc_probs[d, k], self.doc_ids_[d]))
            reps = tuple(
                (self.doc_ids_[d], float(doc_probs[d, k]))
                for d in doc_order[:top_n_docs]
            )
            summaries.append(TopicSummary(
                topic_id=k, top_words=top_words, representative_comments=reps,
            ))
        return summaries

    # ------------------------------------------------------------------
    def vocabulary_hash(self) -> str:
        joined = "\n".join(self.vocabulary_.tokens).encode("utf-8")
        return hashlib.sha256(joined).hexdigest()

    def save(self, bundle_dir) -> None:
        bundle_dir = Path(bundle_dir)
        bundle_dir.mkdir(parents=True, exist_ok=True)
        entries = {
            "vocabulary": write_lines(bundle_dir, "vocabulary",
                                      list(self.vocabulary_.tokens)),
            "doc_ids": write_lines(bundle_dir, "doc_ids", list(self.doc_ids_)),
            "topic_word": write_array(bundle_dir, "topic_word",
                                      self.topic_word_),
            "doc_topic": write_array(bundle_dir, "doc_topic", self.doc_topic_),
            "topic_totals": write_array(bundle_dir, "topic_totals",
                                        self.topic_totals_),
            "assignments": write_array(bundle_dir, "assignments",
                                       self.assignments_),
            "token_word": write_array(bundle_dir, "token_word",
                                      self.token_word_),
            "token_doc": write_array(bundle_dir, "token_doc", self.token_doc_),
        }
        manifest = {
            "kind": BUNDLE_KIND,
            "format_version": BUNDLE_VERSION,
            "n_topics": int(self.n_topics),
            "alpha": self._effective_alpha(),
            "beta": float(self.beta),
            "iterations": int(self.iterations),
            "fold_in_sweeps": int(self.fold_in_sweeps),
            "seed": int(self.seed),
            "vocabulary_hash": self.vocabulary_hash(),
            "log_likelihoods": self.log_likelihoods_,
            "entries": entries,
        }
        write_manifest(bundle_dir, manifest)

    @classmethod
    def load(cls, bundle_dir) -> "LatentTopicModel":
        manifest = read_manifest(bundle_dir, kind=BUNDLE_KIND,
                                 version=BUNDLE_VERSION)
        model = cls(
            n_topics=manifest["n_topics"],
            alpha=manifest["alpha"],
            beta=manifest["beta"],
            iterations=manifest["iterations"],
            fold_in_sweeps=manifest["fold_in_sweeps"],
            seed=manifest["seed"],
        )
        entries = manifest["entries"]
        tokens = tuple(read_lines(bundle_dir, entries["vocabulary"]))
        model.vocabulary_ = Vocabulary(
            tokens=tokens,
            index={t: i for i, t in enumerate(tokens)},
            counts={},
        )
        model.doc_ids_ = tuple(read_lines(bundle_dir, entries["doc_ids"]))
        model._doc_row_ = {cid: i for i, cid in enumerate(model.doc_ids_)}
        model.topic_word_ = read_array(bundle_dir, entries["topic_word"])
        model.doc_topic_ = read_array(bundle_dir, entries["doc_topic"])
        model.topic_totals_ = read_array(bundle_dir, entries["topic_totals"])
        model.assignments_ = read_array(bundle_dir, entries["assignments"])
        model.token_word_ = read_array(bundle_dir, entries["token_word"])
        model.token_doc_ = read_array(bundle_dir, entries["token_doc"])
        model.log_likelihoods_ = [float(v) for v in manifest["log_likelihoods"]]
        expected = (model.n_topics, len(tokens))
        if model.topic_word_.shape != expected:
            raise BundleError(
                f"topic-word table shape {model.topic_word_.shape} does not "
                f"match manifest n_topics and vocabulary ({expected})"
            )
        if model.vocabulary_hash() != manifest["vocabulary_hash"]:
            raise BundleError("vocabulary hash does not match manifest")
        return model
