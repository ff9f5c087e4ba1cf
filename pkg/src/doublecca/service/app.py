"""FastAPI app wrapping the fusion pipeline.

Domain errors come back as JSON bodies {"error", "message", "category"};
usage-category errors map to 400, everything else to 422. Request-validation
failures keep FastAPI's default 422 detail shape.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import DccaError
from . import handlers
from . import schemas as sm


def create_app() -> FastAPI:
    app = FastAPI(title="doublecca", version=handlers.__version__)

    @app.exception_handler(DccaError)
    async def domain_error(request: Request, err: DccaError) -> JSONResponse:
        status = 400 if err.category == "usage" else 422
        return JSONResponse(status_code=status, content=err.to_json())

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, err: FileNotFoundError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": "FileNotFound", "message": str(err), "category": "data"},
        )

    @app.get("/health", response_model=sm.HealthResponse)
    def health() -> sm.HealthResponse:
        return handlers.handle_health()

    @app.post("/v1/prompts", response_model=sm.PromptsResponse)
    def prompts(req: sm.PromptsRequest) -> sm.PromptsResponse:
        return handlers.handle_prompts(req)

    @app.post("/v1/embeddings/fetch", response_model=sm.EmbedFetchResponse)
    def embed_fetch(req: sm.EmbedFetchRequest) -> sm.EmbedFetchResponse:
        return handlers.handle_embed_fetch(req)

    @app.post("/v1/fuse", response_model=sm.FuseResponse)
    def fuse(req: sm.FuseRequest) -> sm.FuseResponse:
        return handlers.handle_fuse(req)

    @app.post("/v1/eval", response_model=sm.EvalResponse)
    def eval_(req: sm.EvalRequest) -> sm.EvalResponse:
        return handlers.handle_eval(req)

    @app.post("/v1/synth", response_model=sm.SynthResponse)
    def synth(req: sm.SynthRequest) -> sm.SynthResponse:
        return handlers.handle_synth(req)

    @app.post("/v1/sweep", response_model=sm.SweepResponse)
    def sweep(req: sm.SweepRequest) -> sm.SweepResponse:
        return handlers.handle_sweep(req)

    return app
