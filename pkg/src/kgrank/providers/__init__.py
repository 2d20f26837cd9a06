from kgrank.providers.base import (
    Completer,
    CompletionRequest,
    CrossScorer,
    Embedder,
    ProviderSet,
    Vector,
    canonical_text,
    cross_score_fingerprint,
    embed_fingerprint,
    fingerprint,
)
from kgrank.providers.cassette import Cassette, load_cassette, save_cassette
from kgrank.providers.factory import build_providers

__all__ = [
    "Cassette",
    "Completer",
    "CompletionRequest",
    "CrossScorer",
    "Embedder",
    "ProviderSet",
    "Vector",
    "build_providers",
    "canonical_text",
    "cross_score_fingerprint",
    "embed_fingerprint",
    "fingerprint",
    "load_cassette",
    "save_cassette",
]
