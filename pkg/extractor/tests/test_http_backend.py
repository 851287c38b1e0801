"""HTTP backend behavior against a local stub embedding service."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from embed_extract import BackendError, HTTPEndpointBackend, embed_texts


def stub_vector(text):
    # deterministic 3-dim vector so tests can predict responses exactly
    return [float(len(text)), float(sum(map(ord, text)) % 97), 1.0]


class StubHandler(BaseHTTPRequestHandler):
    state = None  # installed by the server fixture

    def log_message(self, *args):
        pass

    def do_POST(self):
        st = self.state
        st["requests"] += 1
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        st["last_payload"] = payload
        if st["fail_next"] > 0:
            st["fail_next"] -= 1
            self.send_response(500)
            self.end_headers()
            return
        mode = st["mode"]
        if mode == "missing-key":
            body = {"vectors": []}
        elif mode == "short":
            body = {"embeddings": [stub_vector(payload["texts"][0])]}
        elif mode == "ragged":
            body = {"embeddings": [[1.0, 2.0], [1.0]] + [[0.0, 0.0]] * (len(payload["texts"]) - 2)}
        elif mode == "nan":
            body = {"embeddings": [[float("nan"), 0.0, 0.0] for _ in payload["texts"]]}
        else:
            body = {"embeddings": [stub_vector(t) for t in payload["texts"]]}
        data = json.dumps(body).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


@pytest.fixture()
def stub_server():
    state = {"requests": 0, "fail_next": 0, "mode": "ok", "last_payload": None}
    handler = type("Handler", (StubHandler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_address[1]}/embed"
    try:
        yield url, state
    finally:
        server.shutdown()
        server.server_close()


def make_backend(url, **kw):
    kw.setdefault("backoff", 0.01)
    return HTTPEndpointBackend(url, **kw)


def test_happy_path_rows_match_stub(stub_server):
    url, state = stub_server
    backend = make_backend(url, max_length=16)
    out = backend.embed(["alpha", "bb"])
    assert out.shape == (2, 3)
    assert np.allclose(out[0], stub_vector("alpha"))
    assert np.allclose(out[1], stub_vector("bb"))
    assert state["last_payload"]["pooling"] == "mean"
    assert state["last_payload"]["max_length"] == 16


def test_retries_transient_500_then_succeeds(stub_server):
    url, state = stub_server
    state["fail_next"] = 2
    backend = make_backend(url, retries=3)
    out = backend.embed(["alpha"])
    assert np.allclose(out[0], stub_vector("alpha"))
    assert state["requests"] == 3


def test_persistent_500_raises_after_all_attempts(stub_server):
    url, state = stub_server
    state["fail_next"] = 100
    backend = make_backend(url, retries=2)
    with pytest.raises(BackendError, match="after 3 attempts"):
        backend.embed(["alpha"])
    assert state["requests"] == 3


def test_missing_embeddings_key_is_an_error(stub_server):
    url, state = stub_server
    state["mode"] = "missing-key"
    with pytest.raises(BackendError, match="missing 'embeddings'"):
        make_backend(url, retries=0).embed(["alpha"])


def test_row_count_mismatch_is_an_error(stub_server):
    url, state = stub_server
    state["mode"] = "short"
    with pytest.raises(BackendError, match="1 embeddings for 2 texts"):
        make_backend(url, retries=0).embed(["alpha", "beta"])


def test_ragged_rows_are_an_error(stub_server):
    url, state = stub_server
    state["mode"] = "ragged"
    with pytest.raises(BackendError, match="inconsistent|not numeric"):
        make_backend(url, retries=0).embed(["alpha", "beta"])


def test_non_finite_values_are_an_error(stub_server):
    url, state = stub_server
    state["mode"] = "nan"
    with pytest.raises(BackendError, match="non-finite"):
        make_backend(url, retries=0).embed(["alpha"])


def test_unreachable_endpoint_raises_backend_error():
    backend = make_backend("http://127.0.0.1:9/embed", retries=1, timeout=0.5)
    with pytest.raises(BackendError, match="after 2 attempts"):
        backend.embed(["alpha"])


def test_embed_texts_duplicates_share_one_request(stub_server):
    url, state = stub_server
    backend = make_backend(url)
    out = embed_texts(["bb", "alpha", "bb", "alpha", "bb"], backend, batch_size=8)
    assert out.shape == (5, 3)
    assert np.array_equal(out[0], out[2])
    assert np.array_equal(out[0], out[4])
    assert np.array_equal(out[1], out[3])
    assert state["requests"] == 1
    assert state["last_payload"]["texts"] == ["alpha", "bb"]  # sorted uniques


def test_embed_texts_batches_respect_batch_size(stub_server):
    url, state = stub_server
    backend = make_backend(url)
    texts = [f"text {k:02d}" for k in range(7)]
    out = embed_texts(texts, backend, batch_size=3)
    assert out.shape == (7, 3)
    assert state["requests"] == 3  # ceil(7 / 3)
    for k, text in enumerate(texts):
        assert np.allclose(out[k], stub_vector(text))
