"""HTTP clients for the provider wire protocol.

All three capabilities share one JSON-over-HTTP protocol so that the
inference sidecar, hosted APIs, and test servers are interchangeable:

    POST {base}/v1/embed        {"model", "texts"}                        -> {"dim", "vectors"}
    POST {base}/v1/cross_score  {"model", "query", "passages"}            -> {"scores"}
    POST {base}/v1/complete     {"model", "prompt", "temperature",
                                 "max_tokens"}                            -> {"text"}

Base URLs come from KGRANK_EMBED_URL / KGRANK_CROSS_URL / KGRANK_LLM_URL;
KGRANK_LLM_KEY, when set, is sent as a bearer token on completion calls.
"""

from __future__ import annotations

import time
from typing import Callable, Sequence

import requests

from kgrank.errors import EmptyCompletionError, ProtocolError
from kgrank.net import request_json
from kgrank.providers.base import (
    CompletionRequest,
    Vector,
    check_batch_dims,
    check_embed_inputs,
)

ENV_EMBED_URL = "KGRANK_EMBED_URL"
ENV_CROSS_URL = "KGRANK_CROSS_URL"
ENV_LLM_URL = "KGRANK_LLM_URL"
ENV_LLM_KEY = "KGRANK_LLM_KEY"

DEFAULT_EMBED_BATCH = 64


class HttpEmbedder:
    def __init__(
        self,
        base_url: str,
        model_id: str,
        *,
        batch_size: int = DEFAULT_EMBED_BATCH,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self._url = base_url.rstrip("/") + "/v1/embed"
        self._model = model_id
        self._batch = max(1, batch_size)
        self._timeout = timeout
        self._session = session
        self._sleeper = sleeper

    def embed(self, texts: Sequence[str]) -> list[Vector]:
        check_embed_inputs(texts)
        vectors: list[Vector] = []
        for start in range(0, len(texts), self._batch):
            chunk = list(texts[start : start + self._batch])
            body = request_json(
                "POST",
                self._url,
                json_body={"model": self._model, "texts": chunk},
                timeout=self._timeout,
                session=self._session,
                sleeper=self._sleeper,
            )
            vectors.extend(parse_embed_response(body, expected=len(chunk)))
        check_batch_dims(vectors)
        return vectors


class HttpCrossScorer:
    def __init__(
        self,
        base_url: str,
        model_id: str,
        *,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self._url = base_url.rstrip("/") + "/v1/cross_score"
        self._model = model_id
        self._timeout = timeout
        self._session = session
        self._sleeper = sleeper

    def cross_score(self, query: str, passages: Sequence[str]) -> list[float]:
        if len(passages) == 0:
            raise ProtocolError("cross_score requires at least one passage")
        body = request_json(
            "POST",
            self._url,
            json_body={"model": self._model, "query": query, "passages": list(passages)},
            timeout=self._timeout,
            session=self._session,
            sleeper=self._sleeper,
        )
        return parse_cross_score_response(body, expected=len(passages))


class HttpCompleter:
    def __init__(
        self,
        base_url: str,
        *,
        api_key: str | None = None,
        timeout: float = 120.0,
        session: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self._url = base_url.rstrip("/") + "/v1/complete"
        self._key = api_key
        self._timeout = timeout
        self._session = session
        self._sleeper = sleeper

    def complete(self, request: CompletionRequest) -> str:
        headers = {"Authorization": f"Bearer {self._key}"} if self._key else None
        body = request_json(
            "POST",
            self._url,
            json_body={
                "model": request.model_id,
                "prompt": request.prompt,
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            },
            headers=headers,
            timeout=self._timeout,
            session=self._session,
            sleeper=self._sleeper,
        )
        return parse_complete_response(body)


def parse_embed_response(body: dict, *, expected: int) -> list[Vector]:
    if not isinstance(body, dict) or "vectors" not in body or "dim" not in body:
        raise ProtocolError(f"embed response missing fields: {list(body)[:6]}")
    vectors = body["vectors"]
    if not isinstance(vectors, list) or len(vectors) != expected:
        raise ProtocolError(
            f"embed response has {len(vectors) if isinstance(vectors, list) else '?'} "
            f"vectors, expected {expected}"
        )
    dim = body["dim"]
    out = []
    for row in vectors:
        if len(row) != dim:
            raise ProtocolError(f"embed vector length {len(row)} != dim {dim}")
        out.append(Vector.of(row))
    return out


def parse_cross_score_response(body: dict, *, expected: int) -> list[float]:
    if not isinstance(body, dict) or "scores" not in body:
        raise ProtocolError("cross_score response missing 'scores'")
    scores = body["scores"]
    if not isinstance(scores, list) or len(scores) != expected:
        raise ProtocolError(
            f"cross_score response has {len(scores) if isinstance(scores, list) else '?'} "
            f"scores, expected {expected}"
        )
    return [float(s) for s in scores]


def parse_complete_response(body: dict) -> str:
    if not isinstance(body, dict) or "text" not in body:
        raise ProtocolError("complete response missing 'text'")
    text = body["text"]
    if not isinstance(text, str) or not text:
        raise EmptyCompletionError("provider returned an empty completion")
    return text
