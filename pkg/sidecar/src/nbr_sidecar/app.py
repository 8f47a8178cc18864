"""FastAPI application implementing the /embed wire protocol.

POST /embed  {"model": str, "inputs": [{"id","code","title","abstract"}]}
          -> {"model": str, "dim": int, "vectors": [{"id","code","vector"}],
              "truncated": [{"id","code"}]}        (extra field, may be empty)
GET /health -> {"models": [{"name","dim", ...composition/pooling...}]}

Responses echo the request ids in order. Unknown model names get HTTP 400.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .registry import Registry, load_registry

log = logging.getLogger("nbr_sidecar")

MAX_BATCH = 256


class EmbedInput(BaseModel):
    id: str
    code: str
    title: str = ""
    abstract: str = ""


class EmbedRequest(BaseModel):
    model: str
    inputs: list[EmbedInput] = Field(min_length=1)


class EmbedVector(BaseModel):
    id: str
    code: str
    vector: list[float]


class EmbedResponse(BaseModel):
    model: str
    dim: int
    vectors: list[EmbedVector]
    truncated: list[dict[str, str]] = []


def create_app(registry: Registry | None = None) -> FastAPI:
    registry = registry if registry is not None else load_registry()
    app = FastAPI(title="nbr-embed-sidecar")
    app.state.registry = registry

    @app.get("/health")
    def health() -> dict:
        return {"models": [registry.entry(name).describe() for name in registry.names()]}

    @app.post("/embed")
    def embed(request: EmbedRequest) -> EmbedResponse:
        if request.model not in registry.names():
            raise HTTPException(
                status_code=400,
                detail=f"unknown model {request.model!r}; available: {registry.names()}",
            )
        if len(request.inputs) > MAX_BATCH:
            raise HTTPException(
                status_code=400,
                detail=f"batch size {len(request.inputs)} exceeds limit {MAX_BATCH}",
            )
        entry = registry.entry(request.model)
        texts = []
        truncated = []
        for item in request.inputs:
            text, clipped = entry.compose(item.title, item.abstract)
            texts.append(text)
            if clipped:
                truncated.append({"id": item.id, "code": item.code})
        log.info(
            "embed batch: model=%s n=%d pooling=%s separator=%r truncated=%d",
            entry.name, len(texts), entry.pooling, entry.separator, len(truncated),
        )
        matrix = registry.encoder(request.model).encode(texts)
        vectors = [
            EmbedVector(id=item.id, code=item.code, vector=[float(x) for x in row])
            for item, row in zip(request.inputs, matrix)
        ]
        return EmbedResponse(model=entry.name, dim=entry.dim, vectors=vectors, truncated=truncated)

    return app
