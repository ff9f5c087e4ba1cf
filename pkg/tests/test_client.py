"""remote_embed against an in-process stub implementing the wire protocol."""

import numpy as np
import pytest
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.testclient import TestClient

from doublecca.client import remote_embed
from doublecca.errors import (
    DimMismatchAcrossBatches,
    HttpError,
    ModelUnknown,
    PayloadTooLarge,
    UsageError,
)

ENDPOINT = "http://testserver"


def make_stub(dim=8, fail_first=0, mismatch_dims=False, max_texts=256, base=0.0):
    """Stub embedding service: vector j of row i encodes the global text index,
    so row order is verifiable end to end."""
    app = FastAPI()
    state = {"requests": 0, "failures_left": fail_first, "seen": 0}

    @app.post("/v1/embed")
    async def embed(request: Request):
        body = await request.json()
        state["requests"] += 1
        if state["failures_left"] > 0:
            state["failures_left"] -= 1
            return JSONResponse(status_code=503, content={"error": "warming up"})
        if body.get("model") != "stub-model":
            return JSONResponse(status_code=404, content={"error": "ModelUnknown"})
        texts = body.get("texts", [])
        if not isinstance(texts, list) or not texts or any(not isinstance(t, str) for t in texts):
            return JSONResponse(status_code=400, content={"error": "malformed"})
        if len(texts) > max_texts:
            return JSONResponse(status_code=413, content={"error": "too many texts"})
        d = dim + (state["requests"] - 1 if mismatch_dims else 0)
        vectors = []
        for _ in texts:
            idx = state["seen"]
            state["seen"] += 1
            vectors.append([float(idx) + base] * d)
        return {"dim": d, "vectors": vectors}

    return app, state


def client_for(app):
    return TestClient(app)


def test_single_text_shape_and_manifest():
    app, _ = make_stub(dim=8)
    e = remote_embed(ENDPOINT, "stub-model", ["hello"], client=client_for(app), backoff=0)
    assert e.matrix.shape == (1, 8)
    assert e.manifest.model_id == "stub-model"


def test_unknown_model():
    app, _ = make_stub()
    with pytest.raises(ModelUnknown):
        remote_embed(ENDPOINT, "other-model", ["x"], client=client_for(app), backoff=0)


def test_batching_arithmetic_and_order():
    app, state = make_stub(dim=4)
    texts = [f"t{i}" for i in range(300)]
    e = remote_embed(ENDPOINT, "stub-model", texts, client=client_for(app), backoff=0)
    assert state["requests"] == 2  # 256 + 44
    assert e.matrix.shape == (300, 4)
    np.testing.assert_array_equal(e.matrix[:, 0], np.arange(300, dtype=float))


def test_retry_on_transient_failure():
    app, state = make_stub(dim=3, fail_first=2)
    e = remote_embed(ENDPOINT, "stub-model", ["a", "b"], client=client_for(app), backoff=0)
    assert e.matrix.shape == (2, 3)
    assert state["requests"] == 3  # two 503s then success


def test_transient_failures_exhaust_attempts():
    app, _ = make_stub(dim=3, fail_first=10)
    with pytest.raises(HttpError) as err:
        remote_embed(ENDPOINT, "stub-model", ["a"], client=client_for(app), backoff=0)
    assert err.value.status == 503


def test_payload_too_large_is_not_retried():
    app, state = make_stub(dim=3, max_texts=10)
    with pytest.raises(PayloadTooLarge):
        remote_embed(ENDPOINT, "stub-model", ["x"] * 50, client=client_for(app), backoff=0)
    assert state["requests"] == 1


def test_dim_mismatch_across_batches():
    app, _ = make_stub(dim=4, mismatch_dims=True)
    with pytest.raises(DimMismatchAcrossBatches):
        remote_embed(ENDPOINT, "stub-model", ["x"] * 300, client=client_for(app), backoff=0)


def test_empty_texts_rejected():
    with pytest.raises(UsageError):
        remote_embed(ENDPOINT, "stub-model", [], backoff=0)


def test_bad_request_maps_to_http_error():
    app, _ = make_stub()
    with pytest.raises(HttpError) as err:
        remote_embed(ENDPOINT, "stub-model", [123], client=client_for(app), backoff=0)  # type: ignore[list-item]
    assert err.value.status == 400
