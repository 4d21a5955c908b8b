"""Input validation shared by the estimators and the CLI."""
from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np
from sklearn.utils.validation import check_array


def check_placements(X, n: int) -> np.ndarray:
    """Validate a lemon-indicator matrix of shape ``(n_samples, n)``.

    Entry ``[k, u]`` is 1 when asset ``u`` is a lemon in placement ``k``.
    """
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != n:
        raise ValueError(f"X has {X.shape[1]} features, but the family has {n} assets")
    if not np.isin(X, (0, 1)).all():
        raise ValueError("placement indicators must be 0 or 1")
    return X.astype(np.int16)


def check_histograms(X, r: int) -> np.ndarray:
    """Validate rows of lemon-count histograms ``t_0 .. t_r``."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != r + 1:
        raise ValueError(f"expected {r + 1} count columns for r = {r}, got {X.shape[1]}")
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise ValueError("lemon counts must be integers")
        X = X.astype(np.int64)
    if (X < 0).any():
        raise ValueError("lemon counts must be nonnegative")
    return X


def indicator_rows(placements: Iterable[Iterable[int]], n: int) -> np.ndarray:
    """Lists of lemon indices to an indicator matrix."""
    rows = [sorted(set(p)) for p in placements]
    X = np.zeros((len(rows), n), dtype=np.int16)
    for k, p in enumerate(rows):
        if p and not (0 <= p[0] and p[-1] < n):
            raise IndexError(f"lemon index out of range [0, {n})")
        X[k, p] = 1
    return X


def parse_index_list(text: str) -> Tuple[int, ...]:
    """``"0,3 7"`` to ``(0, 3, 7)``."""
    parts = text.replace(",", " ").split()
    try:
        return tuple(sorted({int(p) for p in parts}))
    except ValueError:
        raise ValueError(f"not a list of integers: {text!r}") from None
