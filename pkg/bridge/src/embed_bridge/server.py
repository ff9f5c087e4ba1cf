"""The /v1/embed wire protocol.

POST /v1/embed  {"model": str, "texts": [str], "space": "euclidean"|"hyperbolic"}
  200 -> {"dim": int, "vectors": [[number]]}
  400 malformed request or space mismatch
  404 model unknown
  413 more than 256 texts in one request
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .encoders import EncoderPool, ModelLoadError
from .registry import Registry

MAX_TEXTS = 256


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="embed-bridge", version=__version__)
    pool = EncoderPool()

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "models": registry.ids()}

    @app.post("/v1/embed")
    async def embed(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "malformed JSON body"})
        model_id = body.get("model")
        texts = body.get("texts")
        space = body.get("space", "euclidean")
        if (
            not isinstance(model_id, str)
            or not isinstance(texts, list)
            or not texts
            or any(not isinstance(t, str) for t in texts)
            or space not in ("euclidean", "hyperbolic")
        ):
            return JSONResponse(status_code=400, content={"error": "malformed request"})
        if len(texts) > MAX_TEXTS:
            return JSONResponse(
                status_code=413,
                content={"error": f"at most {MAX_TEXTS} texts per request, got {len(texts)}"},
            )
        entry = registry.get(model_id)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": f"model {model_id!r} unknown"})
        if space != entry.space:
            return JSONResponse(
                status_code=400,
                content={"error": f"model {model_id!r} embeds into {entry.space}, not {space}"},
            )
        try:
            encoder, lock = pool.get(entry)
        except ModelLoadError as exc:
            return JSONResponse(status_code=500, content={"error": str(exc)})
        with lock:
            matrix = encoder.embed_texts(texts)
        return {"dim": int(matrix.shape[1]), "vectors": matrix.tolist()}

    return app
