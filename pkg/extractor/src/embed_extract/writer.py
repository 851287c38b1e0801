"""HAMEMB01 embedding file writer.

Layout: 8-byte ASCII magic "HAMEMB01", then row count and dimension as
little-endian uint32, then the n*d float32 matrix row-major.  Downstream
readers reject non-finite values and zero-norm rows, so writes enforce the
same invariants up front.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"HAMEMB01"
ZERO_NORM_TOL = 1e-12


def write_embeddings(matrix, path) -> None:
    arr = np.asarray(matrix, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D (rows, dim) matrix, got shape {arr.shape}")
    n, d = arr.shape
    if n == 0 or d == 0:
        raise ValueError("refusing to write an empty embedding matrix")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(f"non-finite embedding value at row {bad[0]}, column {bad[1]}")
    norms = np.linalg.norm(arr.astype(np.float64), axis=1)
    if np.any(norms <= ZERO_NORM_TOL):
        row = int(np.argmin(norms))
        raise ValueError(f"zero-norm embedding row {row}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(arr.tobytes(order="C"))
