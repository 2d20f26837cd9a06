"""HTTP surface: the provider wire protocol.

    POST /v1/embed        {"model", "texts"}             -> {"dim", "vectors"}
    POST /v1/cross_score  {"model", "query", "passages"} -> {"scores"}
    GET  /healthz                                        -> {"status", "models"}

Errors are JSON bodies of the form {"error": reason}: unknown or
wrong-role model ids map to 404, malformed bodies to 400. Completion
serving is out of scope; clients keep their LLM endpoint separate.
"""

from __future__ import annotations

import math
from typing import Iterable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from kgrank_sidecar.errors import UnknownModelError
from kgrank_sidecar.registry import ModelRegistry


class EmbedRequest(BaseModel):
    model: str
    texts: list[str] = Field(min_length=1)


class EmbedResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


class CrossScoreRequest(BaseModel):
    model: str
    query: str
    passages: list[str] = Field(min_length=1)


class CrossScoreResponse(BaseModel):
    scores: list[float]


def _first_problem(exc: RequestValidationError) -> str:
    errors = exc.errors()
    if not errors:
        return "invalid request body"
    first = errors[0]
    location = ".".join(str(part) for part in first.get("loc", ()) if part != "body")
    message = first.get("msg", "invalid value")
    return f"{location}: {message}" if location else message


def _check_finite(values: Iterable[float]) -> None:
    # A NaN or infinity would serialize as invalid JSON; fail loudly instead.
    if not all(math.isfinite(value) for value in values):
        raise RuntimeError("backend produced a non-finite value")


def create_app(registry: ModelRegistry) -> FastAPI:
    """Wire a registry of loaded models into the protocol endpoints.

    Handlers are synchronous on purpose: FastAPI runs them on a thread
    pool, so a long forward pass does not stall other requests, and the
    backends themselves are stateless.
    """
    app = FastAPI(title="kgrank inference sidecar")

    @app.exception_handler(RequestValidationError)
    async def _malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": _first_problem(exc)})

    @app.exception_handler(UnknownModelError)
    async def _unknown_model(request: Request, exc: UnknownModelError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest) -> EmbedResponse:
        encoder = registry.resolve(request.model, "bi_encoder")
        vectors = encoder.encode(request.texts)
        _check_finite(value for row in vectors for value in row)
        return EmbedResponse(dim=encoder.dim, vectors=vectors)

    @app.post("/v1/cross_score", response_model=CrossScoreResponse)
    def cross_score(request: CrossScoreRequest) -> CrossScoreResponse:
        scorer = registry.resolve(request.model, "cross_encoder")
        scores = scorer.score(request.query, request.passages)
        _check_finite(scores)
        return CrossScoreResponse(scores=scores)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "models": registry.loaded()}

    return app
