"""Shared fixtures: small labeled corpora with known structure."""

from __future__ import annotations

import numpy as np
import pytest

from aulamine.corpus import Comment
from aulamine.textprep.preprocess import TokenizedDoc

# three disjoint vocabularies, one per class, so a linear model can
# separate them perfectly
POSITIVE_TERMS = ["excelente", "genial", "claro", "dedicado", "brillante"]
NEUTRAL_TERMS = ["normal", "regular", "aceptable", "comun", "estandar"]
NEGATIVE_TERMS = ["pesimo", "horrible", "confuso", "aburrido", "desastre"]


def make_disjoint_corpus(n_per_class: int = 10, seed: int = 5):
    """Labeled token docs whose class vocabularies never overlap."""
    rng = np.random.default_rng(seed)
    pools = {
        "positive": POSITIVE_TERMS,
        "neutral": NEUTRAL_TERMS,
        "negative": NEGATIVE_TERMS,
    }
    docs, labels = [], []
    i = 0
    for label, pool in pools.items():
        for _ in range(n_per_class):
            k = int(rng.integers(3, 6))
            tokens = [pool[int(j)] for j in rng.integers(0, len(pool), k)]
            docs.append(TokenizedDoc(comment_id=f"d{i:03d}", tokens=tuple(tokens)))
            labels.append(label)
            i += 1
    return docs, labels


@pytest.fixture
def disjoint_corpus():
    return make_disjoint_corpus()


def make_comments(texts_labels):
    """Build Comment rows from (text, label) pairs with synthetic ids."""
    comments = []
    for i, (text, label) in enumerate(texts_labels):
        comments.append(
            Comment(
                id=f"c{i:04d}",
                subject_code="MAT101",
                period="2024-1",
                text=text,
                label=label,
            )
        )
    return comments
