"""Deterministic JSON serialization and atomic file writes.

Every artifact the engine writes goes through these helpers so that
identical data always produces identical bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def dumps_stable(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never observe
    a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_json(path: str | Path, obj) -> None:
    atomic_write_text(path, dumps_stable(obj))


def read_json(path: str | Path):
    with Path(path).open(encoding="utf-8") as handle:
        return json.load(handle)
