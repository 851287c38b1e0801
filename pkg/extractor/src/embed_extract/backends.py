"""Embedding backends.

LocalModelBackend runs a transformers checkpoint on CPU and mean-pools one
hidden layer (the final layer unless told otherwise).  HTTPEndpointBackend
posts texts to a remote service and expects mean-pooled vectors back,
retrying transient failures with exponential backoff.  Both expose
embed(texts) -> float64 array of shape (len(texts), dim).
"""

from __future__ import annotations

import time

import numpy as np

from .pooling import mean_pool


class BackendError(RuntimeError):
    """Raised when a backend cannot produce embeddings."""


class LocalModelBackend:
    """Mean-pooled embeddings from a local transformers checkpoint.

    Pooling covers exactly the non-padding positions of the selected
    hidden layer.  layer indexes the model's hidden-state stack, so -1 is
    the final layer and 0 is the embedding output.
    """

    def __init__(self, model: str, max_length: int = 256, layer: int = -1):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover - env without torch
            raise BackendError(
                "local model support needs the torch and transformers packages"
            ) from exc
        self._torch = torch
        self.max_length = int(max_length)
        self.layer = int(layer)
        self.tokenizer = AutoTokenizer.from_pretrained(model)
        if self.tokenizer.pad_token is None:
            if self.tokenizer.eos_token is None:
                raise BackendError(f"tokenizer for {model!r} has no pad or eos token")
            self.tokenizer.pad_token = self.tokenizer.eos_token
        self.model = AutoModel.from_pretrained(model)
        self.model.eval()
        n_states = getattr(self.model.config, "num_hidden_layers") + 1
        if not -n_states <= self.layer < n_states:
            raise BackendError(
                f"layer {self.layer} out of range for a stack of {n_states} hidden states"
            )

    @property
    def hidden_size(self) -> int:
        return int(self.model.config.hidden_size)

    def count_tokens(self, text: str) -> int:
        """Unbounded token count, used to detect truncation before it happens."""
        return len(self.tokenizer(text, truncation=False)["input_ids"])

    def embed(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, self.hidden_size), dtype=np.float64)
        enc = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        with self._torch.no_grad():
            out = self.model(**enc, output_hidden_states=True)
        hidden = out.hidden_states[self.layer].cpu().numpy()
        mask = enc["attention_mask"].cpu().numpy()
        rows = np.empty((len(texts), hidden.shape[2]), dtype=np.float64)
        for i in range(len(texts)):
            rows[i] = mean_pool(hidden[i, mask[i] == 1])
        return rows


class HTTPEndpointBackend:
    """Mean-pooled embeddings from a remote HTTP service.

    Sends POST {"texts": [...], "pooling": "mean", "max_length": N} and
    expects {"embeddings": [[...], ...]} with one row per input text.
    Every failure mode (connection error, non-200 status, malformed
    payload) is retried with exponential backoff before giving up.
    """

    def __init__(
        self,
        url: str,
        max_length: int = 256,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        session=None,
    ):
        import requests

        self._requests = requests
        self.url = url
        self.max_length = int(max_length)
        self.retries = int(retries)
        self.backoff = float(backoff)
        self.timeout = float(timeout)
        self._session = session if session is not None else requests.Session()
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    def count_tokens(self, text: str) -> None:
        return None  # tokenization happens server side

    def _parse(self, data, expected: int) -> np.ndarray:
        if not isinstance(data, dict) or "embeddings" not in data:
            raise BackendError("endpoint payload missing 'embeddings' key")
        rows = data["embeddings"]
        if not isinstance(rows, list) or len(rows) != expected:
            got = len(rows) if isinstance(rows, list) else type(rows).__name__
            raise BackendError(f"endpoint returned {got} embeddings for {expected} texts")
        try:
            arr = np.asarray(rows, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise BackendError(f"endpoint embeddings are not numeric: {exc}") from exc
        if arr.ndim != 2:
            raise BackendError("endpoint embeddings have inconsistent dimensions")
        if not np.all(np.isfinite(arr)):
            raise BackendError("endpoint returned non-finite embedding values")
        return arr

    def embed(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, 0), dtype=np.float64)
        payload = {"texts": texts, "pooling": "mean", "max_length": self.max_length}
        last_error = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(self.url, json=payload, timeout=self.timeout)
                if resp.status_code != 200:
                    raise BackendError(f"endpoint returned HTTP {resp.status_code}")
                return self._parse(resp.json(), len(texts))
            except (self._requests.RequestException, ValueError, BackendError) as exc:
                last_error = exc
        raise BackendError(
            f"embedding endpoint failed after {self.retries + 1} attempts: {last_error}"
        )
