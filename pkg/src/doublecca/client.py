"""Client for the embedding service wire protocol.

POST {endpoint}/v1/embed with {"model", "texts", "space"} and get back
{"dim", "vectors"}. Requests are chunked to at most 256 texts, retried up to
3 times on transient failures (network errors and 5xx), and reassembled in
input order.
"""

from __future__ import annotations

import time

import httpx
import numpy as np

from .errors import (
    DimMismatchAcrossBatches,
    HttpError,
    ModelUnknown,
    PayloadTooLarge,
    UsageError,
)
from .store import EmbeddingManifest, EmbeddingMatrix

BATCH_LIMIT = 256
MAX_ATTEMPTS = 3


def _post_batch(
    client: httpx.Client,
    endpoint: str,
    model_id: str,
    texts: list[str],
    space: str,
    backoff: float,
) -> dict:
    url = f"{endpoint.rstrip('/')}/v1/embed"
    payload = {"model": model_id, "texts": texts, "space": space}
    last_exc: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        try:
            resp = client.post(url, json=payload)
        except httpx.TransportError as exc:
            last_exc = exc
            if attempt + 1 < MAX_ATTEMPTS and backoff > 0:
                time.sleep(backoff * 2**attempt)
            continue
        if resp.status_code == 200:
            return resp.json()
        if resp.status_code == 404:
            raise ModelUnknown(f"model {model_id!r} unknown to {endpoint}")
        if resp.status_code == 413:
            raise PayloadTooLarge(f"{endpoint} rejected a batch of {len(texts)} texts")
        if resp.status_code >= 500:
            last_exc = HttpError(resp.status_code)
            if attempt + 1 < MAX_ATTEMPTS and backoff > 0:
                time.sleep(backoff * 2**attempt)
            continue
        raise HttpError(resp.status_code)
    if isinstance(last_exc, HttpError):
        raise last_exc
    raise HttpError(0, f"embedding service unreachable: {last_exc}")


def remote_embed(
    endpoint: str,
    model_id: str,
    texts: list[str],
    space: str = "euclidean",
    *,
    client: httpx.Client | None = None,
    backoff: float = 0.25,
    prompt_file: str | None = None,
    seed: int | None = None,
) -> EmbeddingMatrix:
    """Fetch embeddings for texts, batching and retrying as needed."""
    if not texts:
        raise UsageError("texts must be non-empty")
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=60.0)
    try:
        dim: int | None = None
        rows: list[list[float]] = []
        for start in range(0, len(texts), BATCH_LIMIT):
            batch = texts[start : start + BATCH_LIMIT]
            body = _post_batch(client, endpoint, model_id, batch, space, backoff)
            got_dim = int(body["dim"])
            vectors = body["vectors"]
            if len(vectors) != len(batch):
                raise HttpError(0, f"service returned {len(vectors)} rows for {len(batch)} texts")
            if dim is None:
                dim = got_dim
            elif got_dim != dim:
                raise DimMismatchAcrossBatches(f"batch dim {got_dim} != first batch dim {dim}")
            rows.extend(vectors)
    finally:
        if own_client:
            client.close()

    matrix = np.asarray(rows, dtype=np.float64)
    if matrix.shape != (len(texts), dim):
        raise DimMismatchAcrossBatches(
            f"assembled shape {matrix.shape}, expected {(len(texts), dim)}"
        )
    manifest = EmbeddingManifest(
        model_id=model_id, space=space, prompt_file=prompt_file, seed=seed
    )
    return EmbeddingMatrix(matrix=matrix, manifest=manifest)
