"""Shared fixtures: weight-free models, an in-process client, a live server."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Sequence

import pytest
import uvicorn
from fastapi.testclient import TestClient

from kgrank_sidecar.app import create_app
from kgrank_sidecar.encoders import load_bi_encoder, load_cross_encoder
from kgrank_sidecar.registry import ModelRegistry

BI_MODEL = "hashed/bi-64"
CROSS_MODEL = "overlap/cross"


class CountingBiEncoder:
    """Delegates to a bi-encoder while counting calls."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    @property
    def dim(self) -> int:
        return self.inner.dim

    def encode(self, texts: Sequence[str]) -> list[list[float]]:
        self.calls += 1
        return self.inner.encode(texts)


class CountingCrossScorer:
    """Delegates to a cross-encoder while counting calls."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def score(self, query: str, passages: Sequence[str]) -> list[float]:
        self.calls += 1
        return self.inner.score(query, passages)


class ThreadedServer:
    """uvicorn on 127.0.0.1:0 in a daemon thread; yields the base URL."""

    def __init__(self, app):
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def __enter__(self) -> str:
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline or not self._thread.is_alive():
                raise RuntimeError("sidecar server failed to start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        return f"http://127.0.0.1:{port}"

    def __exit__(self, *exc):
        self._server.should_exit = True
        self._thread.join(timeout=5)


@dataclass
class SidecarHandle:
    """A running sidecar plus the instrumented handles behind it."""

    url: str
    bi_model: str
    cross_model: str
    embedder: CountingBiEncoder
    scorer: CountingCrossScorer


def _weight_free_registry() -> tuple[ModelRegistry, CountingBiEncoder, CountingCrossScorer]:
    embedder = CountingBiEncoder(load_bi_encoder(BI_MODEL))
    scorer = CountingCrossScorer(load_cross_encoder(CROSS_MODEL))
    registry = ModelRegistry()
    registry.register(BI_MODEL, "bi_encoder", embedder)
    registry.register(CROSS_MODEL, "cross_encoder", scorer)
    return registry, embedder, scorer


@pytest.fixture(scope="session")
def bi_model() -> str:
    return BI_MODEL


@pytest.fixture(scope="session")
def cross_model() -> str:
    return CROSS_MODEL


@pytest.fixture()
def client() -> TestClient:
    registry, _, _ = _weight_free_registry()
    return TestClient(create_app(registry))


@pytest.fixture(scope="session")
def live_sidecar():
    registry, embedder, scorer = _weight_free_registry()
    server = ThreadedServer(create_app(registry))
    with server as url:
        yield SidecarHandle(
            url=url,
            bi_model=BI_MODEL,
            cross_model=CROSS_MODEL,
            embedder=embedder,
            scorer=scorer,
        )
