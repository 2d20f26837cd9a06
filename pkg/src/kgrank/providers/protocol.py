"""Wire-protocol conformance checks, reusable against any server.

Any service claiming to implement the provider protocol (the bundled mock
server, the inference sidecar, a hosted gateway) should pass
``check_embed_endpoint`` / ``check_cross_score_endpoint``. These issue real
HTTP requests and verify schema, ordering, and determinism.
"""

from __future__ import annotations

import math

import requests

from kgrank.errors import ProtocolError


def _post(base_url: str, path: str, body: dict, timeout: float = 30.0) -> dict:
    resp = requests.post(base_url.rstrip("/") + path, json=body, timeout=timeout)
    if resp.status_code != 200:
        raise ProtocolError(f"{path} returned {resp.status_code}: {resp.text[:200]}")
    return resp.json()


def check_embed_endpoint(base_url: str, model: str, *, tol: float = 1e-6) -> int:
    """Validate /v1/embed; returns the embedding dim."""
    texts = ["myopia", "a longer sentence about insulin storage", "myopia"]
    body = _post(base_url, "/v1/embed", {"model": model, "texts": texts})
    if set(body) < {"dim", "vectors"}:
        raise ProtocolError(f"embed response fields {sorted(body)} != ['dim', 'vectors']")
    dim, vectors = body["dim"], body["vectors"]
    if not isinstance(dim, int) or dim < 1:
        raise ProtocolError(f"embed dim must be a positive int, got {dim!r}")
    if len(vectors) != len(texts):
        raise ProtocolError(f"expected {len(texts)} vectors, got {len(vectors)}")
    for row in vectors:
        if len(row) != dim:
            raise ProtocolError(f"vector length {len(row)} != dim {dim}")
        if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in row):
            raise ProtocolError("vector components must be finite numbers")
    if any(abs(a - b) > tol for a, b in zip(vectors[0], vectors[2])):
        raise ProtocolError("identical texts produced different vectors")
    again = _post(base_url, "/v1/embed", {"model": model, "texts": texts})
    for r1, r2 in zip(vectors, again["vectors"]):
        if any(abs(a - b) > tol for a, b in zip(r1, r2)):
            raise ProtocolError("embed response not deterministic across requests")
    return dim


def check_cross_score_endpoint(base_url: str, model: str, *, tol: float = 1e-6) -> None:
    """Validate /v1/cross_score: schema, order preservation, determinism."""
    query = "how should insulin be stored"
    passages = [
        "insulin requires refrigeration before first use",
        "the opera house opened in 1973",
        "insulin requires refrigeration before first use",
    ]
    body = _post(
        base_url, "/v1/cross_score", {"model": model, "query": query, "passages": passages}
    )
    if "scores" not in body:
        raise ProtocolError(f"cross_score response fields {sorted(body)} missing 'scores'")
    scores = body["scores"]
    if len(scores) != len(passages):
        raise ProtocolError(f"expected {len(passages)} scores, got {len(scores)}")
    if not all(isinstance(s, (int, float)) and math.isfinite(s) for s in scores):
        raise ProtocolError("scores must be finite numbers")
    if abs(scores[0] - scores[2]) > tol:
        raise ProtocolError("duplicate passages got different scores")
    reversed_body = _post(
        base_url,
        "/v1/cross_score",
        {"model": model, "query": query, "passages": passages[::-1]},
    )
    if any(abs(a - b) > tol for a, b in zip(reversed_body["scores"], scores[::-1])):
        raise ProtocolError("scores are not a pure function of (query, passage)")


def check_error_contract(base_url: str, *, unknown_model: str = "no-such-model") -> None:
    """Unknown model must map to 404 and malformed bodies to 400."""
    resp = requests.post(
        base_url.rstrip("/") + "/v1/embed",
        json={"model": unknown_model, "texts": ["x"]},
        timeout=30.0,
    )
    if resp.status_code != 404:
        raise ProtocolError(f"unknown model returned {resp.status_code}, expected 404")
    resp = requests.post(
        base_url.rstrip("/") + "/v1/embed",
        data="{not json",
        headers={"Content-Type": "application/json"},
        timeout=30.0,
    )
    if resp.status_code != 400:
        raise ProtocolError(f"malformed body returned {resp.status_code}, expected 400")
