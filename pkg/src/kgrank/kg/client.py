"""Facade over the KG backends with caching and preconditions."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Protocol

from kgrank.errors import ConfigError, ValidationError
from kgrank.kg.cache import DiskCache, FixtureStore, ResponseStore
from kgrank.kg.dbpedia import DbpediaBackend
from kgrank.kg.types import KG_SOURCES, ConceptRef, Triple
from kgrank.kg.umls import ENV_API_KEY, UmlsBackend

DEFAULT_RETRIEVAL_CAP = 1000


class KgBackend(Protocol):
    source: str

    def map_entity(self, mention: str, store: ResponseStore) -> ConceptRef | None: ...

    def one_hop(self, concept: ConceptRef, limit: int, store: ResponseStore) -> list[Triple]: ...


class KgClient:
    def __init__(self, backend: KgBackend, store: ResponseStore):
        self.backend = backend
        self.store = store

    @property
    def source(self) -> str:
        return self.backend.source

    def map_entity(self, mention: str) -> ConceptRef | None:
        if not mention or not mention.strip():
            raise ValidationError("entity mention must be non-empty")
        return self.backend.map_entity(mention, self.store)

    def fetch_one_hop(self, concept: ConceptRef, limit: int = DEFAULT_RETRIEVAL_CAP) -> list[Triple]:
        if limit < 1:
            raise ValidationError("limit must be >= 1")
        if concept.source != self.backend.source:
            raise ValidationError(
                f"concept source {concept.source!r} does not match backend {self.backend.source!r}"
            )
        triples = self.backend.one_hop(concept, limit, self.store)
        return triples[:limit]


def build_kg_client(
    source: str,
    *,
    cache_dir: str | Path | None = None,
    fixture_dir: str | Path | None = None,
    umls_api_key: str | None = None,
) -> KgClient:
    if source not in KG_SOURCES:
        raise ConfigError(f"kg source must be one of {KG_SOURCES}, got {source!r}")
    if fixture_dir is not None:
        fdir = Path(fixture_dir)
        if not fdir.is_dir():
            raise ConfigError(f"kg fixture directory does not exist: {fdir}")
        store: ResponseStore = FixtureStore(fdir)
    elif cache_dir is not None:
        store = DiskCache(cache_dir)
    else:
        raise ConfigError("kg client needs a cache directory or a fixture directory")
    if source == "umls":
        backend: KgBackend = UmlsBackend(api_key=umls_api_key or os.environ.get(ENV_API_KEY))
    else:
        backend = DbpediaBackend()
    return KgClient(backend, store)
