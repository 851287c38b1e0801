"""Pairwise cosine similarity and m-gram extraction.

The similarity matrix is the adjacency matrix of a complete weighted graph
over the samples: entry (i, j) is the cosine of embedding rows i and j,
with the diagonal pinned to exactly 1.0. Values are computed and stored in
float64 regardless of the float32 embedding storage.

The pairwise product is evaluated with a fixed-order einsum contraction
(no BLAS dispatch), so results are bit-identical across runs, thread
counts, and execution schedules.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus_io import Corpus, EmbeddingMatrix, ZERO_NORM_TOL

SYMMETRY_TOL = 1e-12
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric n x n cosine matrix with unit diagonal, immutable."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_values(cls, values) -> "SimilarityMatrix":
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite similarity value")
        asym = np.abs(arr - arr.T).max()
        if asym > SYMMETRY_TOL:
            raise ValueError(f"matrix is asymmetric (max |M - M^T| = {asym:g})")
        if not np.all(np.diag(arr) == 1.0):
            raise ValueError("diagonal entries must equal 1.0 exactly")
        lo, hi = arr.min(), arr.max()
        if lo < -1.0 - RANGE_TOL or hi > 1.0 + RANGE_TOL:
            raise ValueError(f"entries outside [-1, 1]: range [{lo:g}, {hi:g}]")
        arr.setflags(write=False)
        return cls(values=arr)

    def submatrix(self, indices) -> "SimilarityMatrix":
        """Principal submatrix over the given sample indices."""
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("indices must be a non-empty 1-D sequence")
        sub = np.ascontiguousarray(self.values[np.ix_(idx, idx)])
        sub.setflags(write=False)
        return SimilarityMatrix(values=sub)


def cosine(u, v) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("cosine expects 1-D vectors")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.sqrt(np.einsum("i,i->", a, a)))
    nb = float(np.sqrt(np.einsum("i,i->", b, b)))
    if na <= ZERO_NORM_TOL or nb <= ZERO_NORM_TOL:
        raise ValueError("zero-norm vector")
    value = float(np.einsum("i,i->", a, b)) / (na * nb)
    return min(1.0, max(-1.0, value))


def build_similarity_matrix(E: EmbeddingMatrix) -> SimilarityMatrix:
    """Dense cosine matrix of all embedding rows.

    O(n^2 d) time and O(n^2) memory; at n around 40k the float64 matrix is
    roughly 13 GB, so large corpora should go through the float32 cache.
    """
    V = E.values.astype(np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", V, V))
    zero = np.flatnonzero(norms <= ZERO_NORM_TOL)
    if zero.size:
        raise ValueError(f"zero-norm embedding row {zero[0]}")
    U = V / norms[:, None]
    M = np.einsum("ik,jk->ij", U, U, optimize=False)
    np.clip(M, -1.0, 1.0, out=M)
    np.fill_diagonal(M, 1.0)
    M.setflags(write=False)
    return SimilarityMatrix(values=M)


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on Unicode whitespace; lowercase by default. No punctuation
    stripping."""
    if lowercase:
        text = text.lower()
    return text.split()


@dataclass(frozen=True)
class GramBag:
    """Per-sample multisets of m-token windows."""

    m: int
    grams: tuple[Counter, ...]
    totals: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.grams)

    def total(self) -> int:
        return sum(self.totals)

    def distinct(self) -> int:
        seen = set()
        for bag in self.grams:
            seen.update(bag.keys())
        return len(seen)


def extract_grams(corpus, m: int, lowercase: bool = True) -> GramBag:
    """Collect consecutive m-token windows per sample.

    A sample with t tokens contributes max(0, t - m + 1) grams. ``corpus``
    may be a Corpus or any iterable of strings.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    texts = corpus.texts() if isinstance(corpus, Corpus) else list(corpus)
    grams = []
    totals = []
    for text in texts:
        tokens = tokenize(text, lowercase=lowercase)
        windows = [tuple(tokens[i : i + m]) for i in range(len(tokens) - m + 1)]
        grams.append(Counter(windows))
        totals.append(len(windows))
    return GramBag(m=m, grams=tuple(grams), totals=tuple(totals))
