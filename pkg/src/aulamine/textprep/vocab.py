"""Vocabulary and character n-gram extraction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = ["Vocabulary", "char_ngrams", "word_bigrams", "BOUNDARY_LEFT", "BOUNDARY_RIGHT"]

BOUNDARY_LEFT = "<"
BOUNDARY_RIGHT = ">"


def char_ngrams(token: str, n_min: int, n_max: int) -> list[str]:
    """Character n-grams of the boundary-wrapped token, position-major.

    The token is wrapped as ``<token>`` before extraction. For each start
    position, lengths ``n_min..n_max`` are emitted in order. A wrapped
    token shorter than ``n_min`` yields itself as the single n-gram.
    """
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got ({n_min}, {n_max})")
    wrapped = BOUNDARY_LEFT + token + BOUNDARY_RIGHT
    if len(wrapped) < n_min:
        return [wrapped]
    grams = []
    for start in range(len(wrapped)):
        for end in range(start + n_min, min(start + n_max, len(wrapped)) + 1):
            grams.append(wrapped[start:end])
    return grams


def word_bigrams(tokens: Sequence[str]) -> list[str]:
    """Adjacent token pairs joined with a space, in document order."""
    return [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass(frozen=True)
class Vocabulary:
    """Bijection between tokens and dense indices ``[0, V)``.

    Indices are assigned by descending frequency with lexicographic
    tie-breaks, so a vocabulary is fully determined by its counts.
    """

    tokens: tuple[str, ...]
    index: dict[str, int]
    counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def token_at(self, i: int) -> str:
        return self.tokens[i]

    def index_of(self, token: str) -> int:
        return self.index[token]

    @classmethod
    def from_counts(cls, counts: dict[str, int], min_count: int = 1) -> "Vocabulary":
        if min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {min_count}")
        kept = {t: c for t, c in counts.items() if c >= min_count}
        if not kept:
            raise ValueError("empty vocabulary: no token reaches min_count")
        ordered = sorted(kept, key=lambda t: (-kept[t], t))
        return cls(
            tokens=tuple(ordered),
            index={t: i for i, t in enumerate(ordered)},
            counts=kept,
        )

    @classmethod
    def build(cls, docs: Iterable[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        """Build from token sequences, keeping tokens seen >= ``min_count`` times."""
        counts: Counter[str] = Counter()
        for tokens in docs:
            counts.update(tokens)
        return cls.from_counts(dict(counts), min_count)
