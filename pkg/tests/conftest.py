"""Shared fixtures: canonical paths and replay provider sets."""

from __future__ import annotations

from pathlib import Path

import pytest

from kgrank.config import DEFAULT_CROSS_MODEL, DEFAULT_EMBED_MODEL, DEFAULT_LLM_MODEL
from kgrank.kg.client import build_kg_client
from kgrank.providers.factory import build_providers

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def dataset_path() -> Path:
    return FIXTURES / "fixture5.jsonl"


@pytest.fixture(scope="session")
def cassettes_dir() -> Path:
    return FIXTURES / "cassettes"


@pytest.fixture(scope="session")
def kg_fixtures_dir() -> Path:
    return FIXTURES / "kg"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return FIXTURES / "golden"


@pytest.fixture(scope="session")
def mock_knowledge_path() -> Path:
    return FIXTURES / "mock_knowledge.json"


@pytest.fixture()
def replay_providers(cassettes_dir):
    # cassettes were recorded under the default model names
    return build_providers(
        mode="replay",
        cassette_dir=str(cassettes_dir),
        embed_model=DEFAULT_EMBED_MODEL,
        cross_model=DEFAULT_CROSS_MODEL,
        llm_model=DEFAULT_LLM_MODEL,
    )


@pytest.fixture()
def fixture_kg(kg_fixtures_dir):
    return build_kg_client("umls", fixture_dir=str(kg_fixtures_dir))
