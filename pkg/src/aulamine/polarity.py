"""Linear bag-of-units polarity classifier over comment text.

A document is embedded as the average of learned vectors for its units:
surface words, character n-grams of each token (with boundary markers), and
optionally adjacent word bigrams. A linear softmax layer maps the averaged
embedding to the three polarity classes. Training runs per-example SGD with
a learning rate that decays linearly to zero over the full schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

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
from .corpus import POLARITIES
from .textprep.preprocess import PreprocessConfig, TokenizedDoc, preprocess
from .textprep.vocab import Vocabulary, char_ngrams, word_bigrams
from .validation import check_equal_length

__all__ = [
    "PolarityPrediction",
    "PolarityClassifier",
    "doc_average",
    "batch_loss",
    "batch_loss_and_gradients",
]

BUNDLE_KIND = "polarity-model"
BUNDLE_VERSION = 1


@dataclass(frozen=True)
class PolarityPrediction:
    """Distribution over polarity classes for one comment."""

    probabilities: tuple[float, ...]
    predicted_class: str
    confidence: float

    @classmethod
    def from_probabilities(cls, probs: Sequence[float],
                           classes: Sequence[str] = POLARITIES) -> "PolarityPrediction":
        arr = [float(p) for p in probs]
        best = int(np.argmax(arr))  # first max wins on ties
        return cls(
            probabilities=tuple(arr),
            predicted_class=classes[best],
            confidence=arr[best],
        )


def doc_average(embeddings: np.ndarray, unit_ids: Sequence[int]) -> np.ndarray:
    """Mean embedding over unit ids (with multiplicity); zeros when empty."""
    dim = embeddings.shape[1]
    if len(unit_ids) == 0:
        return np.zeros(dim, dtype=np.float64)
    rows = embeddings[np.asarray(unit_ids, dtype=np.int64)].astype(np.float64)
    return rows.mean(axis=0)


def _forward(embeddings: np.ndarray, weights: np.ndarray, bias: np.ndarray,
             unit_ids: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    x = doc_average(embeddings, unit_ids)
    logits = weights.astype(np.float64) @ x + bias.astype(np.float64)
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return x, exp / exp.sum()


def batch_loss(embeddings: np.ndarray, weights: np.ndarray, bias: np.ndarray,
               docs: Sequence[Sequence[int]], labels: Sequence[int],
               class_weights: Sequence[float] | None = None) -> float:
    """Mean cross-entropy over encoded documents, all math in float64."""
    check_equal_length("docs", docs, "labels", labels)
    if class_weights is None:
        class_weights = [1.0] * weights.shape[0]
    total = 0.0
    weight_sum = 0.0
    for unit_ids, label in zip(docs, labels):
        _, probs = _forward(embeddings, weights, bias, unit_ids)
        w = float(class_weights[label])
        total += -math.log(probs[label]) * w
        weight_sum += w
    return total / weight_sum if weight_sum else 0.0


def batch_loss_and_gradients(
    embeddings: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    docs: Sequence[Sequence[int]],
    labels: Sequence[int],
    class_weights: Sequence[float] | None = None,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean loss plus analytic gradients for every parameter, in float64.

    Returns (loss, d_embeddings, d_weights, d_bias). Serves as the exact
    reference that the SGD kernel's per-example updates are checked
    against numerically.
    """
    check_equal_length("docs", docs, "labels", labels)
    n_classes = weights.shape[0]
    if class_weights is None:
        class_weights = [1.0] * n_classes
    d_emb = np.zeros_like(embeddings, dtype=np.float64)
    d_weights = np.zeros_like(weights, dtype=np.float64)
    d_bias = np.zeros_like(bias, dtype=np.float64)
    total = 0.0
    weight_sum = float(sum(class_weights[label] for label in labels))
    for unit_ids, label in zip(docs, labels):
        x, probs = _forward(embeddings, weights, bias, unit_ids)
        w = float(class_weights[label])
        total += -math.log(probs[label]) * w
        delta = probs.copy()
        delta[label] -= 1.0
        delta *= w / weight_sum
        d_weights += np.outer(delta, x)
        d_bias += delta
        if len(unit_ids):
            gx = weights.astype(np.float64).T @ delta / len(unit_ids)
            for unit in unit_ids:
                d_emb[unit] += gx
    loss = total / weight_sum if weight_sum else 0.0
    return loss, d_emb, d_weights, d_bias


class PolarityClassifier(BaseEstimator):
    """Averaged-embedding linear softmax classifier for comment polarity.

    Parameters
    ----------
    dim : embedding width.
    learning_rate : initial SGD step size, decayed linearly to zero. On a
        corpus whose classes use disjoint word units the per-epoch mean
        training loss is non-increasing for rates up to about 0.3; shared
        subword units introduce small update interference, so rates above
        about 0.02 may then wobble by ~1e-4 while still trending down.
    epochs : full passes over the training set. Zero passes leave the
        model at its initialization, where every prediction is uniform.
    min_count : minimum occurrences for a word to enter the vocabulary.
    char_ngram_min, char_ngram_max : inclusive character n-gram range over
        boundary-wrapped tokens; (0, 0) disables character n-grams.
    word_ngrams : 1 for unigrams only, 2 to add adjacent word bigrams.
    class_weighting : weight each example by inverse class frequency.
    seed : deterministic seed for init and shuffling.
    preprocess_config : tokenization applied to raw-string inputs; also
        stored in saved bundles. Defaults to the standard pipeline.
    """

    def __init__(self, dim: int = 20, learning_rate: float = 0.1,
                 epochs: int = 25, min_count: int = 1,
                 char_ngram_min: int = 3, char_ngram_max: int = 6,
                 word_ngrams: int = 1, class_weighting: bool = False,
                 seed: int = 0, preprocess_config: PreprocessConfig | None = None):
        self.dim = dim
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.min_count = min_count
        self.char_ngram_min = char_ngram_min
        self.char_ngram_max = char_ngram_max
        self.word_ngrams = word_ngrams
        self.class_weighting = class_weighting
        self.seed = seed
        self.preprocess_config = preprocess_config

    # ------------------------------------------------------------------
    def _validate_params(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.min_count < 1:
            raise ValueError("min_count must be at least 1")
        use_chars = not (self.char_ngram_min == 0 and self.char_ngram_max == 0)
        if use_chars and not (1 <= self.char_ngram_min <= self.char_ngram_max):
            raise ValueError(
                "char n-gram range must satisfy 1 <= min <= max, or be (0, 0)"
            )
        if self.word_ngrams not in (1, 2):
            raise ValueError("word_ngrams must be 1 or 2")

    def _config(self) -> PreprocessConfig:
        return self.preprocess_config if self.preprocess_config is not None \
            else PreprocessConfig()

    def _coerce_tokens(self, doc) -> tuple[str, ...]:
        if isinstance(doc, str):
            return preprocess(doc, self._config()).tokens
        if isinstance(doc, TokenizedDoc):
            return doc.tokens
        return tuple(doc)

    def _use_char_ngrams(self) -> bool:
        return not (self.char_ngram_min == 0 and self.char_ngram_max == 0)

    def encode(self, doc) -> list[int]:
        """Unit ids for one document, with multiplicity, unknown units
        dropped. Unknown words still contribute their known character
        n-grams."""
        tokens = self._coerce_tokens(doc)
        ids: list[int] = []
        for token in tokens:
            word_id = self.word_index_.get(token)
            if word_id is not None:
                ids.append(word_id)
            if self._use_char_ngrams():
                for gram in char_ngrams(token, self.char_ngram_min,
                                        self.char_ngram_max):
                    gram_id = self.ngram_index_.get(gram)
                    if gram_id is not None:
                        ids.append(gram_id)
        if self.word_ngrams == 2:
            for bigram in word_bigrams(tokens):
                bigram_id = self.bigram_index_.get(bigram)
                if bigram_id is not None:
                    ids.append(bigram_id)
        return ids

    # ------------------------------------------------------------------
    def fit(self, docs: Sequence, labels: Sequence[str]) -> "PolarityClassifier":
        self._validate_params()
        check_equal_length("docs", docs, "labels", labels)
        if len(docs) == 0:
            raise ValueError("training set is empty")
        token_docs = [self._coerce_tokens(doc) for doc in docs]
        label_ids = np.empty(len(labels), dtype=np.int32)
        class_index = {c: i for i, c in enumerate(POLARITIES)}
        for i, label in enumerate(labels):
            if label not in class_index:
                raise ValueError(f"unknown polarity label: {label!r}")
            label_ids[i] = class_index[label]
        counts = np.bincount(label_ids, minlength=len(POLARITIES))
        for cls, count in zip(POLARITIES, counts):
            if count == 0:
                raise ValueError(f"training set has no examples of class {cls!r}")

        vocab = Vocabulary.build(token_docs, min_count=self.min_count)
        self.words_ = vocab.tokens
        self.word_index_ = dict(vocab.index)

        ngrams: list[str] = []
        if self._use_char_ngrams():
            seen: set[str] = set()
            for word in self.words_:
                for gram in char_ngrams(word, self.char_ngram_min,
                                        self.char_ngram_max):
                    if gram not in seen:
                        seen.add(gram)
                        ngrams.append(gram)
            ngrams.sort()
        self.ngrams_ = tuple(ngrams)

        bigrams: list[str] = []
        if self.word_ngrams == 2:
            seen_b: set[str] = set()
            for tokens in token_docs:
                for bigram in word_bigrams(tokens):
                    if bigram not in seen_b:
                        seen_b.add(bigram)
                        bigrams.append(bigram)
            bigrams.sort()
        self.bigrams_ = tuple(bigrams)

        n_words = len(self.words_)
        n_ngrams = len(self.ngrams_)
        self.ngram_index_ = {g: n_words + i for i, g in enumerate(self.ngrams_)}
        self.bigram_index_ = {
            b: n_words + n_ngrams + i for i, b in enumerate(self.bigrams_)
        }
        self.n_units_ = n_words + n_ngrams + len(self.bigrams_)
        self.classes_ = POLARITIES

        encoded = [self.encode(tokens) for tokens in token_docs]
        flat = np.fromiter(
            (u for ids in encoded for u in ids), dtype=np.int32,
            count=sum(len(ids) for ids in encoded),
        )
        offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
        np.cumsum([len(ids) for ids in encoded], out=offsets[1:])

        rng = np.random.default_rng(self.seed)
        bound = 1.0 / (2.0 * self.dim)
        self.embeddings_ = rng.uniform(
            -bound, bound, size=(max(self.n_units_, 1), self.dim)
        ).astype(np.float32)
        self.output_weights_ = np.zeros((len(POLARITIES), self.dim),
                                        dtype=np.float32)
        self.output_bias_ = np.zeros(len(POLARITIES), dtype=np.float32)

        if self.class_weighting:
            n = float(len(labels))
            weights = n / (len(POLARITIES) * counts.astype(np.float64))
        else:
            weights = np.ones(len(POLARITIES), dtype=np.float64)
        self.class_weights_ = weights

        state = _kernels.rng_state_from_seed(self.seed)
        losses = _kernels.train_sgd(
            flat, offsets, label_ids, self.embeddings_, self.output_weights_,
            self.output_bias_, float(self.learning_rate), int(self.epochs),
            weights, state,
        )
        self.training_loss_ = [float(v) for v in losses]
        return self

    # ------------------------------------------------------------------
    def predict_proba(self, docs: Sequence) -> np.ndarray:
        """Class probability rows in float64; each row sums to 1."""
        dim = self.embeddings_.shape[1]
        x = np.zeros((len(docs), dim), dtype=np.float64)
        for i, doc in enumerate(docs):
            x[i] = doc_average(self.embeddings_, self.encode(doc))
        logits = x @ self.output_weights_.astype(np.float64).T
        logits += self.output_bias_.astype(np.float64)
        logits -= logits.max(axis=1, keepdims=True)
        np.exp(logits, out=logits)
        logits /= logits.sum(axis=1, keepdims=True)
        return logits

    def predict(self, docs: Sequence) -> list[str]:
        probs = self.predict_proba(docs)
        return [POLARITIES[i] for i in np.argmax(probs, axis=1)]

    def predict_docs(self, docs: Sequence) -> list[PolarityPrediction]:
        probs = self.predict_proba(docs)
        return [PolarityPrediction.from_probabilities(row) for row in probs]

    def predict_one(self, text: str) -> PolarityPrediction:
        """Classify one raw comment through the stored preprocessing."""
        return self.predict_docs([text])[0]

    def embed_doc(self, doc) -> np.ndarray:
        """Averaged unit embedding for one document (float64)."""
        return doc_average(self.embeddings_, self.encode(doc))

    # ------------------------------------------------------------------
    def save(self, bundle_dir) -> None:
        """Write the fitted model as a self-describing bundle directory."""
        bundle_dir = Path(bundle_dir)
        bundle_dir.mkdir(parents=True, exist_ok=True)
        entries = {
            "words": write_lines(bundle_dir, "words", list(self.words_)),
            "ngrams": write_lines(bundle_dir, "ngrams", list(self.ngrams_)),
            "bigrams": write_lines(bundle_dir, "bigrams", list(self.bigrams_)),
            "embeddings": write_array(bundle_dir, "embeddings",
                                      self.embeddings_),
            "output_weights": write_array(bundle_dir, "output_weights",
                                          self.output_weights_),
            "output_bias": write_array(bundle_dir, "output_bias",
                                       self.output_bias_),
        }
        manifest = {
            "kind": BUNDLE_KIND,
            "format_version": BUNDLE_VERSION,
            "dim": int(self.dim),
            "learning_rate": float(self.learning_rate),
            "epochs": int(self.epochs),
            "min_count": int(self.min_count),
            "char_ngram_min": int(self.char_ngram_min),
            "char_ngram_max": int(self.char_ngram_max),
            "word_ngrams": int(self.word_ngrams),
            "class_weighting": bool(self.class_weighting),
            "seed": int(self.seed),
            "classes": list(self.classes_),
            "n_units": int(self.n_units_),
            "class_weights": [float(w) for w in self.class_weights_],
            "training_loss": self.training_loss_,
            "preprocess": self._config().to_dict(),
            "entries": entries,
        }
        write_manifest(bundle_dir, manifest)

    @classmethod
    def load(cls, bundle_dir) -> "PolarityClassifier":
        manifest = read_manifest(bundle_dir, kind=BUNDLE_KIND,
                                 version=BUNDLE_VERSION)
        model = cls(
            dim=manifest["dim"],
            learning_rate=manifest["learning_rate"],
            epochs=manifest["epochs"],
            min_count=manifest["min_count"],
            char_ngram_min=manifest["char_ngram_min"],
            char_ngram_max=manifest["char_ngram_max"],
            word_ngrams=manifest["word_ngrams"],
            class_weighting=manifest["class_weighting"],
            seed=manifest["seed"],
            preprocess_config=PreprocessConfig.from_dict(manifest["preprocess"]),
        )
        entries = manifest["entries"]
        model.classes_ = tuple(manifest["classes"])
        model.words_ = tuple(read_lines(bundle_dir, entries["words"]))
        model.ngrams_ = tuple(read_lines(bundle_dir, entries["ngrams"]))
        model.bigrams_ = tuple(read_lines(bundle_dir, entries["bigrams"]))
        n_words = len(model.words_)
        n_ngrams = len(model.ngrams_)
        model.word_index_ = {w: i for i, w in enumerate(model.words_)}
        model.ngram_index_ = {
            g: n_words + i for i, g in enumerate(model.ngrams_)
        }
        model.bigram_index_ = {
            b: n_words + n_ngrams + i for i, b in enumerate(model.bigrams_)
        }
        model.n_units_ = manifest["n_units"]
        model.class_weights_ = np.asarray(manifest["class_weights"],
                                          dtype=np.float64)
        model.training_loss_ = [float(v) for v in manifest["training_loss"]]
        model.embeddings_ = read_array(bundle_dir, entries["embeddings"])
        model.output_weights_ = read_array(bundle_dir, entries["output_weights"])
        model.output_bias_ = read_array(bundle_dir, entries["output_bias"])
        if model.embeddings_.shape != (max(model.n_units_, 1), model.dim):
            raise BundleError(
                f"embedding table shape {model.embeddings_.shape} does not "
                f"match manifest n_units={model.n_units_}, dim={model.dim}"
            )
        return model


def _as_token_docs(comments: Iterable, config: PreprocessConfig) -> list[tuple[str, ...]]:
    """Tokenize comments once so repeated fits can reuse the result."""
    return [preprocess(c.text, config).tokens for c in comments]
