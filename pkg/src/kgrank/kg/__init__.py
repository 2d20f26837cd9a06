from kgrank.kg.cache import DiskCache, FixtureStore, cache_key, write_fixture
from kgrank.kg.client import DEFAULT_RETRIEVAL_CAP, KgClient, build_kg_client
from kgrank.kg.dbpedia import DbpediaBackend
from kgrank.kg.types import KG_SOURCES, ConceptRef, Triple
from kgrank.kg.umls import UmlsBackend

__all__ = [
    "DEFAULT_RETRIEVAL_CAP",
    "DbpediaBackend",
    "DiskCache",
    "FixtureStore",
    "KG_SOURCES",
    "KgClient",
    "ConceptRef",
    "Triple",
    "UmlsBackend",
    "build_kg_client",
    "cache_key",
    "write_fixture",
]
