"""Text normalization pipeline feeding the classifier and the topic model.

The pipeline order is fixed: lowercase, strip punctuation and digits,
split on whitespace, drop stopwords, stem. Accents are preserved by
default (``strip_accents`` exists as an ablation flag); when enabled,
folding happens right after lowercasing so stopword matching sees folded
forms too.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from . import stemmer

__all__ = [
    "PreprocessConfig",
    "TokenizedDoc",
    "default_stopwords",
    "load_stopword_file",
    "preprocess",
    "tokenize_comments",
    "TextPreprocessor",
]

_STOPWORD_FILE = Path(__file__).parent / "data" / "spanish_stopwords.txt"


def load_stopword_file(path: Path) -> frozenset[str]:
    """Read a stopword file: one token per line, ``#`` comments allowed."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        token = line.strip()
        if token and not token.startswith("#"):
            words.append(token)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    return load_stopword_file(_STOPWORD_FILE)


def _fold_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    return unicodedata.normalize(
        "NFC", "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    )


@dataclass(frozen=True)
class TokenizedDoc:
    """A preprocessed comment: ordered stemmed lowercase tokens."""

    comment_id: str | None
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class PreprocessConfig:
    """Settings for :func:`preprocess`; serialized into model bundles so
    inference always reuses training-time normalization."""

    stem: bool = True
    strip_accents: bool = False
    stopwords: frozenset[str] = field(default_factory=default_stopwords)

    def effective_stopwords(self) -> frozenset[str]:
        if self.strip_accents:
            return frozenset(_fold_accents(w) for w in self.stopwords)
        return self.stopwords

    def to_dict(self) -> dict:
        return {
            "stem": self.stem,
            "strip_accents": self.strip_accents,
            "stopwords": sorted(self.stopwords),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PreprocessConfig":
        return cls(
            stem=bool(data["stem"]),
            strip_accents=bool(data["strip_accents"]),
            stopwords=frozenset(data["stopwords"]),
        )


def _strip_non_letters(text: str) -> str:
    return "".join(ch if ch.isalpha() or ch.isspace() else " " for ch in text)


def preprocess(text: str, config: PreprocessConfig | None = None) -> TokenizedDoc:
    """Normalize raw text into a token list; an empty result is valid."""
    if config is None:
        config = PreprocessConfig()
    text = text.lower()
    if config.strip_accents:
        text = _fold_accents(text)
    stopword_set = config.effective_stopwords()
    tokens = [t for t in _strip_non_letters(text).split() if t not in stopword_set]
    if config.stem:
        tokens = [stemmer.stem(t) for t in tokens]
    return TokenizedDoc(comment_id=None, tokens=tuple(tokens))


def tokenize_comments(comments: Iterable, config: PreprocessConfig | None = None) -> list[TokenizedDoc]:
    """Preprocess a batch of :class:`~aulamine.corpus.Comment` objects,
    keeping each comment's id on its tokenized form."""
    if config is None:
        config = PreprocessConfig()
    docs = []
    for comment in comments:
        doc = preprocess(comment.text, config)
        docs.append(TokenizedDoc(comment_id=comment.id, tokens=doc.tokens))
    return docs


class TextPreprocessor(BaseEstimator, TransformerMixin):
    """Stateless transformer from raw strings to token lists.

    Exists so the normalization step composes with sklearn pipelines; all
    behavior lives in :func:`preprocess`.
    """

    def __init__(self, stem: bool = True, strip_accents: bool = False,
                 stopwords: frozenset[str] | None = None):
        self.stem = stem
        self.strip_accents = strip_accents
        self.stopwords = stopwords

    def _config(self) -> PreprocessConfig:
        return PreprocessConfig(
            stem=self.stem,
            strip_accents=self.strip_accents,
            stopwords=self.stopwords if self.stopwords is not None else default_stopwords(),
        )

    def fit(self, X: Sequence[str], y=None):
        return self

    def transform(self, X: Sequence[str]) -> list[list[str]]:
        config = self._config()
        return [list(preprocess(text, config).tokens) for text in X]
