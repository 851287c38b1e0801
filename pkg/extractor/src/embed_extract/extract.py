"""Corpus to embedding-file extraction.

The pipeline embeds each distinct text exactly once and scatters the
result to every row that carries that text, so duplicated inputs are
bit-identical in the output by construction.  Distinct texts are embedded
in sorted order with a fixed batch size, which keeps batch composition
(and therefore the numerics) independent of corpus order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .backends import HTTPEndpointBackend, LocalModelBackend
from .corpus import Corpus
from .writer import write_embeddings

DEFAULT_BATCH_SIZE = 32
DEFAULT_MAX_LENGTH = 256


@dataclass(frozen=True)
class ExtractConfig:
    """Settings for one extraction run.

    Exactly one of model (a local transformers checkpoint path or name)
    and endpoint (a remote embedding service URL) must be set.  pooling
    only accepts "mean"; the field exists so configs are explicit about
    what the output contains.
    """

    model: str | None = None
    endpoint: str | None = None
    output_path: str = "embeddings.hamemb"
    pooling: str = "mean"
    batch_size: int = DEFAULT_BATCH_SIZE
    max_length: int = DEFAULT_MAX_LENGTH
    layer: int = -1
    retries: int = 3
    backoff: float = 0.5

    def __post_init__(self):
        if (self.model is None) == (self.endpoint is None):
            raise ValueError("set exactly one of model and endpoint")
        if self.pooling != "mean":
            raise ValueError(f"unsupported pooling {self.pooling!r}; only 'mean' is available")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


def make_backend(config: ExtractConfig):
    if config.model is not None:
        return LocalModelBackend(
            config.model, max_length=config.max_length, layer=config.layer
        )
    return HTTPEndpointBackend(
        config.endpoint,
        max_length=config.max_length,
        retries=config.retries,
        backoff=config.backoff,
    )


def embed_texts(texts, backend, batch_size: int = DEFAULT_BATCH_SIZE) -> np.ndarray:
    """Embed texts in corpus order, one backend call per batch of uniques."""
    texts = list(texts)
    if not texts:
        raise ValueError("no texts to embed")
    unique = sorted(set(texts))
    slot = {t: i for i, t in enumerate(unique)}
    pooled = []
    for lo in range(0, len(unique), batch_size):
        pooled.append(backend.embed(unique[lo : lo + batch_size]))
    dims = {p.shape[1] for p in pooled}
    if len(dims) != 1:
        raise ValueError(f"backend returned inconsistent embedding dimensions: {sorted(dims)}")
    table = np.concatenate(pooled, axis=0)
    return table[[slot[t] for t in texts]]


def _warn_truncation(texts, backend, max_length: int) -> None:
    counter = getattr(backend, "count_tokens", None)
    if counter is None:
        return
    over = 0
    for text in set(texts):
        n = counter(text)
        if n is not None and n > max_length:
            over += 1
    if over:
        warnings.warn(
            f"{over} distinct text(s) exceed max_length={max_length} and were truncated",
            UserWarning,
            stacklevel=3,
        )


def extract(config: ExtractConfig, corpus: Corpus, backend=None) -> np.ndarray:
    """Embed every corpus record and write the matrix to config.output_path.

    Row order matches corpus order.  Returns the float32 matrix that was
    written.  Nothing is written until the whole matrix exists, so a
    backend failure leaves no partial output file.
    """
    if corpus.n == 0:
        raise ValueError("refusing to extract from an empty corpus")
    if backend is None:
        backend = make_backend(config)
    texts = corpus.texts()
    _warn_truncation(texts, backend, config.max_length)
    matrix = embed_texts(texts, backend, batch_size=config.batch_size).astype(np.float32)
    write_embeddings(matrix, config.output_path)
    return matrix
