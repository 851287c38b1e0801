"""Corpus, embedding, similarity-cache and order-file persistence.

File formats:
  - Corpus: JSON Lines, UTF-8, one object per line. The text field defaults
    to "problem" with a fallback to "text"; both are configurable.
  - Embeddings (HAMEMB01): 8 magic bytes, uint32-LE n, uint32-LE d, then
    n*d float32-LE values, row-major.
  - Similarity cache (HAMSIM01): 8 magic bytes, uint32-LE n, then n*n
    float32-LE values, row-major.
  - Order file: JSON object {"indices": [...], "weight": w, "metadata": {...}}.

All loaded objects are read-only after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import FormatError

EMBEDDING_MAGIC = b"HAMEMB01"
SIMILARITY_MAGIC = b"HAMSIM01"

DEFAULT_TEXT_FIELDS = ("problem", "text")
DEFAULT_ID_FIELD = "id"

ZERO_NORM_TOL = 1e-12
WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Sample:
    """One text sample. ``payload`` passes through every source field except
    the text field, so a corpus survives load/save round trips unchanged."""

    id: str
    text: str
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...]
    text_field: str = DEFAULT_TEXT_FIELDS[0]
    id_field: str = DEFAULT_ID_FIELD

    @property
    def n(self) -> int:
        return len(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def texts(self) -> list[str]:
        return [s.text for s in self.samples]

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]


def load_corpus(path, text_field=None, id_field=DEFAULT_ID_FIELD) -> Corpus:
    """Read a JSON-Lines corpus, preserving line order.

    When ``text_field`` is None the first matching default ("problem", then
    "text") found on the first line is used for the whole file. Lines missing
    the resolved field, malformed JSON, duplicate ids and empty files all
    raise FormatError naming the offending line.
    """
    path = Path(path)
    resolved = text_field
    samples = []
    seen_ids = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}: line {lineno}: malformed JSON: {e.msg}")
            if not isinstance(obj, dict):
                raise FormatError(f"{path}: line {lineno}: expected a JSON object")
            if resolved is None:
                for candidate in DEFAULT_TEXT_FIELDS:
                    if candidate in obj:
                        resolved = candidate
                        break
                else:
                    raise FormatError(
                        f"{path}: line {lineno}: no text field among "
                        f"{DEFAULT_TEXT_FIELDS}"
                    )
            if resolved not in obj:
                raise FormatError(
                    f"{path}: line {lineno}: missing text field {resolved!r}"
                )
            text = obj[resolved]
            if not isinstance(text, str) or not text.strip():
                raise FormatError(f"{path}: line {lineno}: empty text")
            payload = {k: v for k, v in obj.items() if k != resolved}
            sample_id = str(obj[id_field]) if id_field in obj else f"row-{len(samples)}"
            if sample_id in seen_ids:
                raise FormatError(
                    f"{path}: line {lineno}: duplicate id {sample_id!r} "
                    f"(first seen on line {seen_ids[sample_id]})"
                )
            seen_ids[sample_id] = lineno
            samples.append(Sample(id=sample_id, text=text, payload=payload))
    if not samples:
        raise FormatError(f"{path}: empty corpus file")
    return Corpus(
        samples=tuple(samples),
        text_field=resolved or DEFAULT_TEXT_FIELDS[0],
        id_field=id_field,
    )


def save_corpus(corpus: Corpus, path) -> None:
    """Write JSON Lines; each sample's payload is emitted unchanged after the
    text field, so loading the result reproduces the corpus content."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus.samples:
            obj = {corpus.text_field: s.text}
            obj.update(s.payload)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """n x d float32 matrix; row i is the embedding of sample i."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_array(cls, values) -> "EmbeddingMatrix":
        arr = np.ascontiguousarray(values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            r, c = bad[0]
            raise ValueError(f"non-finite value at row {r}, column {c}")
        norms = np.sqrt(np.einsum("ij,ij->i", arr.astype(np.float64), arr.astype(np.float64)))
        zero = np.flatnonzero(norms <= ZERO_NORM_TOL)
        if zero.size:
            raise ValueError(f"zero-norm row {zero[0]}")
        arr.setflags(write=False)
        return cls(values=arr)


def write_embeddings(E: EmbeddingMatrix, path) -> None:
    arr = np.ascontiguousarray(E.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<II", E.n, E.d))
        fh.write(arr.tobytes(order="C"))


def read_embeddings(path) -> EmbeddingMatrix:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < 16 or buf[:8] != EMBEDDING_MAGIC:
        raise FormatError(f"{path}: unrecognized format (expected HAMEMB01)")
    n, d = struct.unpack_from("<II", buf, 8)
    expected = 16 + 4 * n * d
    if len(buf) != expected:
        raise FormatError(
            f"{path}: truncated file ({len(buf)} bytes, expected {expected})"
        )
    values = np.frombuffer(buf, dtype="<f4", offset=16).reshape(n, d)
    try:
        return EmbeddingMatrix.from_array(values)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def write_similarity(S, path) -> None:
    """Persist a SimilarityMatrix to a HAMSIM01 cache (float32 storage)."""
    arr = np.ascontiguousarray(S.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(SIMILARITY_MAGIC)
        fh.write(struct.pack("<I", S.n))
        fh.write(arr.tobytes(order="C"))


def read_similarity(path):
    from .similarity import SimilarityMatrix

    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < 12 or buf[:8] != SIMILARITY_MAGIC:
        raise FormatError(f"{path}: unrecognized format (expected HAMSIM01)")
    (n,) = struct.unpack_from("<I", buf, 8)
    expected = 12 + 4 * n * n
    if len(buf) != expected:
        raise FormatError(
            f"{path}: truncated file ({len(buf)} bytes, expected {expected})"
        )
    values = np.frombuffer(buf, dtype="<f4", offset=12).reshape(n, n).astype(np.float64)
    try:
        return SimilarityMatrix.from_values(values)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def _is_permutation(indices) -> bool:
    n = len(indices)
    return sorted(indices) == list(range(n))


@dataclass(frozen=True)
class OrderFile:
    """A stored sample ordering: a permutation, its path weight, and
    provenance metadata (generator, eta, restarts, seed, created)."""

    indices: tuple[int, ...]
    weight: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not _is_permutation(self.indices):
            raise ValueError("indices is not a permutation of 0..n-1")


def created_stamp() -> str:
    """Deterministic creation timestamp. Uses SOURCE_DATE_EPOCH when set,
    otherwise a fixed epoch, so identical runs emit identical bytes."""
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).isoformat()


def save_order(order: OrderFile, path) -> None:
    doc = {
        "indices": [int(i) for i in order.indices],
        "weight": float(order.weight),
        "metadata": order.metadata,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_order(path, M=None) -> OrderFile:
    """Load an order file; when a similarity matrix is supplied, verify the
    stored weight against the recomputed path weight (skipped when metadata
    flags the weight as not computed)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: malformed JSON: {e.msg}")
    if not isinstance(doc, dict) or "indices" not in doc or "weight" not in doc:
        raise FormatError(f"{path}: missing 'indices' or 'weight'")
    indices = tuple(int(i) for i in doc["indices"])
    if not _is_permutation(indices):
        raise FormatError(f"{path}: indices are not a permutation")
    weight = float(doc["weight"])
    metadata = doc.get("metadata", {})
    order = OrderFile(indices=indices, weight=weight, metadata=metadata)
    if M is not None and not metadata.get("weight_unverified", False):
        from .ordering import path_weight

        recomputed = path_weight(indices, M, closed=bool(metadata.get("cycle", False)))
        if not math.isclose(recomputed, weight, rel_tol=0.0, abs_tol=WEIGHT_TOL):
            raise FormatError(
                f"{path}: stored weight {weight} differs from recomputed "
                f"{recomputed} by more than {WEIGHT_TOL}"
            )
    return order


def apply_order(corpus: Corpus, order: OrderFile) -> Corpus:
    """Reorder a corpus so its k-th sample is corpus[order.indices[k]]."""
    if len(order.indices) != corpus.n:
        raise ValueError(
            f"order length {len(order.indices)} != corpus size {corpus.n}"
        )
    if not _is_permutation(order.indices):
        raise ValueError("indices is not a permutation of 0..n-1")
    samples = tuple(corpus.samples[i] for i in order.indices)
    return Corpus(samples=samples, text_field=corpus.text_field, id_field=corpus.id_field)
