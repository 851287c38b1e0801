"""embed_extract: mean-pooled sentence embeddings written as HAMEMB01 files."""

from .backends import BackendError, HTTPEndpointBackend, LocalModelBackend
from .corpus import Corpus, CorpusError, Record, load_corpus
from .extract import ExtractConfig, embed_texts, extract, make_backend
from .pooling import masked_mean_pool, mean_pool
from .writer import MAGIC, write_embeddings

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "Corpus",
    "CorpusError",
    "ExtractConfig",
    "HTTPEndpointBackend",
    "LocalModelBackend",
    "MAGIC",
    "Record",
    "embed_texts",
    "extract",
    "load_corpus",
    "make_backend",
    "masked_mean_pool",
    "mean_pool",
    "write_embeddings",
]
