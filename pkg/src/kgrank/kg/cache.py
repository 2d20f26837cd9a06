"""Read-through disk cache and fixture store for KG backend responses.

Layout: ``<dir>/<source>/<cache_key>.json`` holding the request descriptor,
the raw backend response, and a fetch timestamp. Fixture mode uses the same
layout but never touches the network: a missing file is an error. Cached
files are valid fixtures, so recorded live traffic doubles as test data.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Protocol

from kgrank.errors import KgFixtureMissError
from kgrank.providers.base import canonical_json, canonical_text


def canonical_descriptor(obj: object) -> object:
    """Normalize every string leaf so whitespace variants share a key."""
    if isinstance(obj, str):
        return canonical_text(obj)
    if isinstance(obj, dict):
        return {k: canonical_descriptor(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical_descriptor(v) for v in obj]
    return obj


def cache_key(descriptor: dict) -> str:
    """Stable hash of a fully-specified request descriptor."""
    body = canonical_json(canonical_descriptor(descriptor))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class ResponseStore(Protocol):
    def get(self, descriptor: dict, fetch: Callable[[], dict]) -> dict:
        """Return the raw backend response for the descriptor."""
        ...


class DiskCache:
    """Read-through cache; concurrent writers produce identical content, so
    last-writer-wins via atomic rename is safe."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, descriptor: dict) -> Path:
        source = descriptor.get("source", "unknown")
        return self.directory / source / f"{cache_key(descriptor)}.json"

    def get(self, descriptor: dict, fetch: Callable[[], dict]) -> dict:
        path = self.path_for(descriptor)
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        response = fetch()
        payload = {
            "request": canonical_descriptor(descriptor),
            "response": response,
            "fetched_at": datetime.now(timezone.utc).isoformat(),
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".cache-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return response

    def delete(self, descriptor: dict) -> bool:
        path = self.path_for(descriptor)
        if path.exists():
            path.unlink()
            return True
        return False


class FixtureStore:
    """Serves only from disk; a miss is an error, never a network call."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, descriptor: dict) -> Path:
        source = descriptor.get("source", "unknown")
        return self.directory / source / f"{cache_key(descriptor)}.json"

    def get(self, descriptor: dict, fetch: Callable[[], dict]) -> dict:
        path = self.path_for(descriptor)
        if not path.exists():
            raise KgFixtureMissError(
                f"no KG fixture for descriptor {canonical_json(canonical_descriptor(descriptor))} "
                f"(expected {path})"
            )
        return json.loads(path.read_text(encoding="utf-8"))["response"]


def write_fixture(
    directory: str | Path,
    descriptor: dict,
    response: dict,
    fetched_at: str = "2025-01-01T00:00:00+00:00",
) -> Path:
    """Author a fixture file in the cache layout (used by fixture generators)."""
    store = FixtureStore(directory)
    path = store.path_for(descriptor)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "request": canonical_descriptor(descriptor),
        "response": response,
        "fetched_at": fetched_at,
    }
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path
