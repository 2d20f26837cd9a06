"""Embedding and relevance-scoring backends.

Two families serve the same interfaces. Weight-free backends derive
everything from the request text (hashed word features for embeddings,
word overlap for relevance) and exist so the server can run where no
model weights are available: tests, sandboxes, protocol debugging.
Transformer backends load real weights through the optional ``models``
extra (torch + transformers) and are what production deployments use.

The model id selects the family: ``hashed/bi-<dim>`` and
``overlap/cross`` build the weight-free backends; every other id is
loaded from transformers, as a hub name or a local path.
"""

from __future__ import annotations

import hashlib
import math
import re
from typing import Protocol, Sequence

from kgrank_sidecar.errors import ModelLoadError

HASHED_BI_ID = re.compile(r"^hashed/bi-([0-9]+)$")
OVERLAP_CROSS_ID = "overlap/cross"

# Both weight-free schemes are reserved so a typo like "hashed/bi64"
# fails at startup instead of going to the transformers loader.
WEIGHT_FREE_PREFIXES = ("hashed/", "overlap/")

_WORD = re.compile(r"[a-z0-9]+")


class BiEncoder(Protocol):
    @property
    def dim(self) -> int: ...

    def encode(self, texts: Sequence[str]) -> list[list[float]]: ...


class CrossEncoder(Protocol):
    def score(self, query: str, passages: Sequence[str]) -> list[float]: ...


def _words(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def _hashed_features(word: str, dim: int) -> list[float]:
    """dim floats in [-1, 1) that depend only on the word text."""
    raw = hashlib.shake_128(word.encode("utf-8")).digest(4 * dim)
    return [int.from_bytes(raw[4 * i : 4 * i + 4], "big") / 2**31 - 1.0 for i in range(dim)]


class HashedBiEncoder:
    """Mean-pooled hashed word features, L2-normalized.

    Vectors carry lexical overlap only, no semantics, but they are a pure
    function of the text: stable across processes, platforms, and library
    versions.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ModelLoadError("hashed encoder dim must be >= 1")
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def encode(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._encode(t) for t in texts]

    def _encode(self, text: str) -> list[float]:
        # Blank input still gets a unit vector so every request is servable.
        words = _words(text) or ["\x00blank"]
        acc = [0.0] * self._dim
        for word in words:
            for i, value in enumerate(_hashed_features(word, self._dim)):
                acc[i] += value
        acc = [value / len(words) for value in acc]
        norm = math.sqrt(sum(value * value for value in acc))
        if norm == 0.0:
            # Word hashes cancelling out exactly is effectively impossible,
            # but a zero vector cannot be normalized.
            acc = _hashed_features("\x00zero", self._dim)
            norm = math.sqrt(sum(value * value for value in acc))
        return [value / norm for value in acc]


class OverlapCrossScorer:
    """Jaccard overlap between query and passage word sets.

    A lexical stand-in for a trained relevance head: scores are in [0, 1],
    a pure function of the (query, passage) pair, and rank passages that
    share words with the query above passages that do not.
    """

    def score(self, query: str, passages: Sequence[str]) -> list[float]:
        query_words = set(_words(query))
        scores = []
        for passage in passages:
            passage_words = set(_words(passage))
            union = query_words | passage_words
            scores.append(len(query_words & passage_words) / len(union) if union else 0.0)
        return scores


def _import_torch(model_id: str):
    try:
        import torch
    except ImportError as exc:
        raise ModelLoadError(
            f"loading {model_id!r} requires the 'models' extra (torch + transformers)"
        ) from exc
    return torch


class TransformerBiEncoder:
    """Masked mean pooling over the last hidden layer, L2-normalized.

    Pooling averages only real tokens (padding is masked out), so a text's
    vector does not depend on what else is in the batch.
    """

    def __init__(self, tokenizer, model, device: str = "cpu"):
        self._tokenizer = tokenizer
        self._model = model.to(device).eval()
        self._device = device
        self._dim = int(model.config.hidden_size)

    @classmethod
    def from_pretrained(cls, model_id: str, device: str = "cpu") -> "TransformerBiEncoder":
        _import_torch(model_id)
        from transformers import AutoModel, AutoTokenizer

        try:
            tokenizer = AutoTokenizer.from_pretrained(model_id)
            model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ModelLoadError(f"could not load bi-encoder {model_id!r}: {exc}") from exc
        return cls(tokenizer, model, device=device)

    @property
    def dim(self) -> int:
        return self._dim

    def encode(self, texts: Sequence[str]) -> list[list[float]]:
        import torch

        batch = self._tokenizer(
            list(texts), padding=True, truncation=True, return_tensors="pt"
        ).to(self._device)
        with torch.no_grad():
            hidden = self._model(**batch).last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        pooled = torch.nn.functional.normalize(pooled, p=2, dim=1)
        return pooled.tolist()


class TransformerCrossScorer:
    """Sequence-classification head scored per (query, passage) pair."""

    def __init__(self, tokenizer, model, device: str = "cpu"):
        self._tokenizer = tokenizer
        self._model = model.to(device).eval()
        self._device = device

    @classmethod
    def from_pretrained(cls, model_id: str, device: str = "cpu") -> "TransformerCrossScorer":
        _import_torch(model_id)
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        try:
            tokenizer = AutoTokenizer.from_pretrained(model_id)
            model = AutoModelForSequenceClassification.from_pretrained(model_id)
        except Exception as exc:
            raise ModelLoadError(f"could not load cross-encoder {model_id!r}: {exc}") from exc
        return cls(tokenizer, model, device=device)

    def score(self, query: str, passages: Sequence[str]) -> list[float]:
        import torch

        batch = self._tokenizer(
            [query] * len(passages),
            list(passages),
            padding=True,
            truncation=True,
            return_tensors="pt",
        ).to(self._device)
        with torch.no_grad():
            logits = self._model(**batch).logits
        if logits.shape[-1] == 1:
            scores = logits.squeeze(-1)
        else:
            # Multi-class relevance heads put the positive class last.
            scores = logits[:, -1]
        return [float(s) for s in scores.tolist()]


def load_bi_encoder(model_id: str, device: str = "cpu") -> BiEncoder:
    match = HASHED_BI_ID.match(model_id)
    if match:
        dim = int(match.group(1))
        if dim < 1:
            raise ModelLoadError(f"invalid bi-encoder id {model_id!r}: dim must be >= 1")
        return HashedBiEncoder(dim)
    if model_id.startswith(WEIGHT_FREE_PREFIXES):
        raise ModelLoadError(
            f"unrecognized weight-free bi-encoder id {model_id!r}; expected hashed/bi-<dim>"
        )
    return TransformerBiEncoder.from_pretrained(model_id, device=device)


def load_cross_encoder(model_id: str, device: str = "cpu") -> CrossEncoder:
    if model_id == OVERLAP_CROSS_ID:
        return OverlapCrossScorer()
    if model_id.startswith(WEIGHT_FREE_PREFIXES):
        raise ModelLoadError(
            f"unrecognized weight-free cross-encoder id {model_id!r}; expected {OVERLAP_CROSS_ID}"
        )
    return TransformerCrossScorer.from_pretrained(model_id, device=device)
