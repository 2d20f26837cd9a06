"""Assemble a ProviderSet for a run mode.

live    - call the configured HTTP endpoints directly
record  - call HTTP (or the in-process mocks) and write through to cassettes
replay  - serve exclusively from cassettes; misses are errors
"""

from __future__ import annotations

import os
from pathlib import Path

from kgrank.errors import ConfigError
from kgrank.providers import http as http_providers
from kgrank.providers.base import ProviderSet
from kgrank.providers.cassette import (
    RecordingCompleter,
    RecordingCrossScorer,
    RecordingEmbedder,
    ReplayCompleter,
    ReplayCrossScorer,
    ReplayEmbedder,
    load_cassette,
)
from kgrank.providers.mock import MockCompleter, MockCrossScorer, MockEmbedder, MockKnowledge

MODES = ("live", "record", "replay")
PROVIDER_BACKENDS = ("http", "mock")


def build_providers(
    *,
    mode: str,
    backend: str = "http",
    cassette_dir: str | None = None,
    embed_url: str | None = None,
    cross_url: str | None = None,
    llm_url: str | None = None,
    llm_key: str | None = None,
    embed_model: str = "default",
    cross_model: str = "default",
    llm_model: str = "default",
    mock_knowledge: str | None = None,
    mock_dim: int = 32,
) -> ProviderSet:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if backend not in PROVIDER_BACKENDS:
        raise ConfigError(f"providers backend must be one of {PROVIDER_BACKENDS}")

    if mode == "replay":
        if not cassette_dir:
            raise ConfigError("replay mode requires a cassette directory")
        cdir = Path(cassette_dir)
        if not cdir.is_dir():
            raise ConfigError(f"cassette directory does not exist: {cdir}")
        return ProviderSet(
            embedder=ReplayEmbedder(load_cassette(cdir, "embed"), embed_model),
            scorer=ReplayCrossScorer(load_cassette(cdir, "cross_score"), cross_model),
            completer=ReplayCompleter(load_cassette(cdir, "complete")),
            embed_model=embed_model,
            cross_model=cross_model,
            llm_model=llm_model,
        )

    if backend == "mock":
        knowledge = MockKnowledge.from_file(mock_knowledge) if mock_knowledge else None
        embedder = MockEmbedder(dim=mock_dim)
        scorer = MockCrossScorer()
        completer = MockCompleter(knowledge)
    else:
        embed_url = embed_url or os.environ.get(http_providers.ENV_EMBED_URL)
        cross_url = cross_url or os.environ.get(http_providers.ENV_CROSS_URL)
        llm_url = llm_url or os.environ.get(http_providers.ENV_LLM_URL)
        llm_key = llm_key or os.environ.get(http_providers.ENV_LLM_KEY)
        missing = [
            name
            for name, value in (
                ("embed url", embed_url),
                ("cross_score url", cross_url),
                ("llm url", llm_url),
            )
            if not value
        ]
        if missing:
            raise ConfigError(
                "http providers need endpoints for: " + ", ".join(missing)
            )
        embedder = http_providers.HttpEmbedder(embed_url, embed_model)
        scorer = http_providers.HttpCrossScorer(cross_url, cross_model)
        completer = http_providers.HttpCompleter(llm_url, api_key=llm_key)

    if mode == "record":
        if not cassette_dir:
            raise ConfigError("record mode requires a cassette directory")
        cdir = Path(cassette_dir)
        cdir.mkdir(parents=True, exist_ok=True)
        embedder = RecordingEmbedder(embedder, load_cassette(cdir, "embed"), cdir, embed_model)
        scorer = RecordingCrossScorer(scorer, load_cassette(cdir, "cross_score"), cdir, cross_model)
        completer = RecordingCompleter(completer, load_cassette(cdir, "complete"), cdir)

    return ProviderSet(
        embedder=embedder,
        scorer=scorer,
        completer=completer,
        embed_model=embed_model,
        cross_model=cross_model,
        llm_model=llm_model,
    )
