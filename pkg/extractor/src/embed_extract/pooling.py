"""Token-vector pooling.

mean_pool is the single pooling rule used by every backend: the arithmetic
mean of the token vectors, one value per hidden dimension.
"""

from __future__ import annotations

import numpy as np


def mean_pool(token_vectors) -> np.ndarray:
    """Average a (tokens, dim) stack of vectors along the token axis.

    Accepts any 2-D array-like.  The mean is accumulated in float64
    regardless of input dtype so short and long sequences pool with the
    same precision.  Raises ValueError on an empty sequence: there is no
    meaningful embedding for zero tokens.
    """
    arr = np.asarray(token_vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D (tokens, dim) array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("cannot pool an empty token sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite token vector")
    return arr.mean(axis=0)


def masked_mean_pool(hidden: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Mean-pool a padded (batch, tokens, dim) batch.

    mask is (batch, tokens) with 1 for real tokens and 0 for padding;
    padded positions never contribute to the average.
    """
    hidden = np.asarray(hidden, dtype=np.float64)
    mask = np.asarray(mask)
    if hidden.ndim != 3:
        raise ValueError(f"expected a 3-D (batch, tokens, dim) array, got shape {hidden.shape}")
    if mask.shape != hidden.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match batch {hidden.shape[:2]}")
    counts = mask.sum(axis=1)
    if np.any(counts == 0):
        raise ValueError("cannot pool a row with no unmasked tokens")
    weights = mask.astype(np.float64)[:, :, None]
    return (hidden * weights).sum(axis=1) / counts[:, None]
