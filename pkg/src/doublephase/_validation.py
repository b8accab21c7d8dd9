"""Input checks shared by the estimators and the public functions."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_consistent_length

from .grid import GridField


def check_grid_field(X) -> GridField:
    if not isinstance(X, GridField):
        raise TypeError(f"expected a GridField, got {type(X).__name__}")
    return X


def check_same_grid(a: GridField, b: GridField) -> None:
    if a.shape != b.shape or a.domain != b.domain:
        raise ValueError("fields must live on the same grid")


def check_is_fitted_mollifier(est) -> None:
    if not hasattr(est, "stencil_"):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


def check_samples(X, y):
    """Space-time sample points ``(N, n+1)`` (last column is time) and values ``(N,)``."""
    X = check_array(X, ensure_min_samples=2, dtype=float)
    if X.shape[1] < 2:
        raise ValueError("sample points need at least one spatial coordinate and a time column")
    y = np.asarray(y, dtype=float).ravel()
    check_consistent_length(X, y)
    if not np.all(np.isfinite(y)):
        raise ValueError("sampled values must be finite")
    return X, y
