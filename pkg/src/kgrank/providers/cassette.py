"""Deterministic record/replay of provider calls.

A cassette is one JSON file per provider kind under a directory, keyed by
request fingerprint. Recording wraps any inner provider and writes through;
replay serves from disk only and a miss is always an error, never a silent
passthrough. Entries are never overwritten once written (append-only), so
cassette files stay diff-able across recording sessions.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from kgrank.errors import CassetteMissError, EmptyCompletionError, ValidationError
from kgrank.providers.base import (
    Completer,
    CompletionRequest,
    CrossScorer,
    Embedder,
    Vector,
    canonical_json,
    check_batch_dims,
    check_embed_inputs,
    cross_score_fingerprint,
    embed_fingerprint,
)

log = logging.getLogger(__name__)

PROVIDER_KINDS = ("embed", "cross_score", "complete")


@dataclass
class Cassette:
    """Recorded responses for one provider kind."""

    provider_kind: str
    entries: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if self.provider_kind not in PROVIDER_KINDS:
            raise ValidationError(f"unknown provider kind {self.provider_kind!r}")

    def get(self, fp: str, describe: str) -> dict:
        try:
            return self.entries[fp]["response"]
        except KeyError:
            raise CassetteMissError(
                f"cassette miss ({self.provider_kind}): no recording for {describe}"
            ) from None

    def put(self, fp: str, request: dict, response: dict) -> bool:
        """Store an entry; returns False (and keeps the original) on repeats."""
        if fp in self.entries:
            if self.entries[fp]["response"] != response:
                log.warning(
                    "cassette %s: fingerprint %s re-recorded with different "
                    "response; keeping first",
                    self.provider_kind,
                    fp,
                )
            return False
        self.entries[fp] = {"request": request, "response": response}
        return True


def cassette_path(directory: str | Path, kind: str) -> Path:
    return Path(directory) / f"{kind}.json"


def load_cassette(directory: str | Path, kind: str) -> Cassette:
    path = cassette_path(directory, kind)
    if not path.exists():
        return Cassette(provider_kind=kind)
    data = json.loads(path.read_text(encoding="utf-8"))
    return Cassette(provider_kind=data["provider_kind"], entries=data["entries"])


def save_cassette(cassette: Cassette, directory: str | Path) -> Path:
    path = cassette_path(directory, cassette.provider_kind)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"provider_kind": cassette.provider_kind, "entries": cassette.entries}
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".cassette-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


class RecordingEmbedder:
    """Write-through recorder storing one entry per text.

    Per-text granularity makes replay independent of how callers batch.
    """

    def __init__(self, inner: Embedder, cassette: Cassette, directory: str | Path, model_id: str):
        self._inner = inner
        self._cassette = cassette
        self._dir = directory
        self._model = model_id
        self._lock = threading.Lock()

    def embed(self, texts: Sequence[str]) -> list[Vector]:
        vectors = self._inner.embed(texts)
        check_batch_dims(vectors)
        with self._lock:
            changed = False
            for text, vec in zip(texts, vectors):
                fp = embed_fingerprint(self._model, text)
                request = {"model": self._model, "text": text}
                response = {"dim": vec.dim, "vector": list(vec.components)}
                changed |= self._cassette.put(fp, request, response)
            if changed:
                save_cassette(self._cassette, self._dir)
        return vectors


class ReplayEmbedder:
    def __init__(self, cassette: Cassette, model_id: str):
        self._cassette = cassette
        self._model = model_id

    def embed(self, texts: Sequence[str]) -> list[Vector]:
        check_embed_inputs(texts)
        vectors = []
        for text in texts:
            fp = embed_fingerprint(self._model, text)
            rec = self._cassette.get(fp, f"embed text {text!r}")
            vectors.append(Vector.of(rec["vector"]))
        check_batch_dims(vectors)
        return vectors


class RecordingCrossScorer:
    def __init__(self, inner: CrossScorer, cassette: Cassette, directory: str | Path, model_id: str):
        self._inner = inner
        self._cassette = cassette
        self._dir = directory
        self._model = model_id
        self._lock = threading.Lock()

    def cross_score(self, query: str, passages: Sequence[str]) -> list[float]:
        scores = self._inner.cross_score(query, passages)
        with self._lock:
            changed = False
            for passage, score in zip(passages, scores):
                fp = cross_score_fingerprint(self._model, query, passage)
                request = {"model": self._model, "query": query, "passage": passage}
                changed |= self._cassette.put(fp, request, {"score": score})
            if changed:
                save_cassette(self._cassette, self._dir)
        return scores


class ReplayCrossScorer:
    def __init__(self, cassette: Cassette, model_id: str):
        self._cassette = cassette
        self._model = model_id

    def cross_score(self, query: str, passages: Sequence[str]) -> list[float]:
        if len(passages) == 0:
            raise ValidationError("cross_score requires at least one passage")
        scores = []
        for passage in passages:
            fp = cross_score_fingerprint(self._model, query, passage)
            rec = self._cassette.get(fp, f"pair ({query!r}, {passage!r})")
            scores.append(float(rec["score"]))
        return scores


class RecordingCompleter:
    def __init__(self, inner: Completer, cassette: Cassette, directory: str | Path):
        self._inner = inner
        self._cassette = cassette
        self._dir = directory
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        text = self._inner.complete(request)
        fp = request.fingerprint()
        req_payload = {
            "model": request.model_id,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        with self._lock:
            if self._cassette.put(fp, req_payload, {"text": text}):
                save_cassette(self._cassette, self._dir)
        return text


class ReplayCompleter:
    def __init__(self, cassette: Cassette):
        self._cassette = cassette

    def complete(self, request: CompletionRequest) -> str:
        rec = self._cassette.get(
            request.fingerprint(), f"prompt starting {request.prompt[:60]!r}"
        )
        text = rec["text"]
        if not text:
            raise EmptyCompletionError("provider returned an empty completion")
        return text


def canonical_cassette_bytes(cassette: Cassette) -> bytes:
    """Byte-stable rendering, used by tests comparing recordings."""
    return canonical_json(
        {"provider_kind": cassette.provider_kind, "entries": cassette.entries}
    ).encode("utf-8")
