"""Small input-validation helpers shared across estimators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["check_equal_length", "check_in_unit_interval", "check_feature_matrix"]


def check_equal_length(name_a: str, a: Sequence, name_b: str, b: Sequence) -> None:
    if len(a) != len(b):
        raise ValueError(f"{name_a} has {len(a)} items but {name_b} has {len(b)}")


def check_in_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_feature_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 array, optionally enforcing its width."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"feature dimension mismatch: got {X.shape[1]}, expected {n_features}"
        )
    return X
