"""Normalization, tokenization, stopwords, stemming, and vocabularies."""

from .preprocess import (
    PreprocessConfig,
    TextPreprocessor,
    TokenizedDoc,
    default_stopwords,
    load_stopword_file,
    preprocess,
    tokenize_comments,
)
from .stemmer import stem
from .vocab import Vocabulary, char_ngrams, word_bigrams

__all__ = [
    "PreprocessConfig",
    "TextPreprocessor",
    "TokenizedDoc",
    "Vocabulary",
    "char_ngrams",
    "default_stopwords",
    "load_stopword_file",
    "preprocess",
    "stem",
    "tokenize_comments",
    "word_bigrams",
]
