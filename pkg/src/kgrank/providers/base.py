"""Core provider types and interfaces.

Three capabilities are used by the rest of the engine: text embedding,
cross-encoder scoring of (query, passage) pairs, and chat completion.
Every implementation (HTTP, cassette replay, in-process mock) satisfies
the same three protocols so they are interchangeable.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from kgrank.errors import ProtocolError, ValidationError

_WS_RUN = re.compile(r"\s+")


def canonical_text(text: str) -> str:
    """Collapse whitespace runs and trim; used for request identity only."""
    return _WS_RUN.sub(" ", text).strip()


def canonical_json(obj: object) -> str:
    """Deterministic JSON rendering: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fingerprint(kind: str, model_id: str, payload: dict) -> str:
    """Stable identity of one logical provider request.

    Text fields in ``payload`` must already be canonicalized by the caller;
    field order is irrelevant because the JSON rendering sorts keys.
    """
    body = canonical_json({"kind": kind, "model": model_id, "payload": payload})
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Vector:
    """A fixed-dimension embedding."""

    components: tuple[float, ...]

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValidationError("vector must have dim >= 1")
        if not all(math.isfinite(c) for c in self.components):
            raise ValidationError("vector components must be finite")
        object.__setattr__(self, "components", tuple(float(c) for c in self.components))

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Vector":
        return cls(tuple(values))


@dataclass(frozen=True)
class CompletionRequest:
    """One chat-completion call. Temperature defaults to 0 (greedy decoding)."""

    prompt: str
    temperature: float = 0.0
    max_tokens: int = 1024
    model_id: str = "default"

    def __post_init__(self):
        if not self.prompt:
            raise ValidationError("completion prompt must be non-empty")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValidationError("max_tokens must be >= 1")

    def fingerprint(self) -> str:
        return fingerprint(
            "complete",
            self.model_id,
            {
                "prompt": canonical_text(self.prompt),
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            },
        )


def embed_fingerprint(model_id: str, text: str) -> str:
    return fingerprint("embed", model_id, {"text": canonical_text(text)})


def cross_score_fingerprint(model_id: str, query: str, passage: str) -> str:
    return fingerprint(
        "cross_score",
        model_id,
        {"query": canonical_text(query), "passage": canonical_text(passage)},
    )


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[Vector]:
        """One vector per input text, identical dims, order preserved."""
        ...


class CrossScorer(Protocol):
    def cross_score(self, query: str, passages: Sequence[str]) -> list[float]:
        """One relevance score per passage, order preserved; higher is better."""
        ...


class Completer(Protocol):
    def complete(self, request: CompletionRequest) -> str:
        """Non-empty completion text."""
        ...


def check_embed_inputs(texts: Sequence[str]) -> None:
    if len(texts) == 0:
        raise ValidationError("embed requires at least one text")
    for t in texts:
        if not t.strip():
            raise ValidationError("embed texts must be non-empty after trim")


def check_batch_dims(vectors: Sequence[Vector]) -> None:
    dims = {v.dim for v in vectors}
    if len(dims) > 1:
        raise ProtocolError(f"embedding batch has mixed dims: {sorted(dims)}")


@dataclass
class ProviderSet:
    """The three capabilities bundled for one pipeline run."""

    embedder: Embedder
    scorer: CrossScorer
    completer: Completer
    embed_model: str = "default"
    cross_model: str = "default"
    llm_model: str = "default"
    extras: dict = field(default_factory=dict)
