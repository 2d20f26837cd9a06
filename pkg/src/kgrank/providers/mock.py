"""Deterministic in-process providers.

These stand in for the three hosted capabilities during tests, fixture
recording, and offline demos. Every output is a pure function of the
request, derived from SHA-256 so it is stable across processes, platforms,
and library versions.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from kgrank.providers.base import (
    CompletionRequest,
    Vector,
    canonical_text,
    check_embed_inputs,
)

_QUESTION_LINE = re.compile(r"^Question: (.*)$", re.MULTILINE)
_FACT_LINE = re.compile(r"^- ", re.MULTILINE)


def _feature_values(feature: str, dim: int) -> list[float]:
    """dim floats in [-1, 1) derived from the feature string alone."""
    raw = hashlib.shake_256(feature.encode("utf-8")).digest(8 * dim)
    out = []
    for i in range(dim):
        chunk = int.from_bytes(raw[8 * i : 8 * i + 8], "big")
        out.append(chunk / 2**63 - 1.0)
    return out


def _tokens(text: str) -> list[str]:
    return canonical_text(text).lower().split()


class MockEmbedder:
    """Mean-pooled hashed token features, L2-normalized."""

    def __init__(self, dim: int = 32):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[Vector]:
        check_embed_inputs(texts)
        return [self._encode(t) for t in texts]

    def _encode(self, text: str) -> Vector:
        tokens = _tokens(text)
        acc = [0.0] * self.dim
        for tok in tokens:
            for i, v in enumerate(_feature_values(tok, self.dim)):
                acc[i] += v
        n = max(len(tokens), 1)
        acc = [v / n for v in acc]
        norm = math.sqrt(sum(v * v for v in acc))
        if norm == 0.0:
            # Token hashes cancelling out exactly is effectively impossible,
            # but a zero vector breaks cosine downstream.
            acc = _feature_values("\x00fallback", self.dim)
            norm = math.sqrt(sum(v * v for v in acc))
        return Vector.of(v / norm for v in acc)


class MockCrossScorer:
    """Unigram-overlap F1 between query and passage."""

    def cross_score(self, query: str, passages: Sequence[str]) -> list[float]:
        if len(passages) == 0:
            raise ValueError("cross_score requires at least one passage")
        q = set(_tokens(query))
        scores = []
        for passage in passages:
            p = set(_tokens(passage))
            if not q or not p:
                scores.append(0.0)
                continue
            overlap = len(q & p)
            prec = overlap / len(p)
            rec = overlap / len(q)
            scores.append(0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec))
        return scores


@dataclass
class MockKnowledge:
    """Optional lookup tables keyed by the exact question text."""

    entities: dict[str, list[str]] = field(default_factory=dict)
    drafts: dict[str, str] = field(default_factory=dict)
    answers: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "MockKnowledge":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            entities=data.get("entities", {}),
            drafts=data.get("drafts", {}),
            answers=data.get("answers", {}),
        )


class MockCompleter:
    """Scripted completions keyed off the bundled prompt templates.

    The prompt kind is detected from template markers; the question is read
    from the "Question:" line. Unknown prompts get a deterministic
    hash-derived reply, so any request still succeeds.
    """

    def __init__(self, knowledge: MockKnowledge | None = None):
        self.knowledge = knowledge or MockKnowledge()

    def complete(self, request: CompletionRequest) -> str:
        prompt = request.prompt
        question = self._question(prompt)
        if 'Reply with a line "Winner:' in prompt:
            return self._judge(prompt)
        if "comma-separated list of entity names" in prompt:
            return self._ner(question)
        if "Draft answer:" in prompt:
            return self._draft(question)
        if "Short answer:" in prompt:
            return self._short_answer(question, prompt)
        if "Facts:" in prompt:
            return self._kg_answer(question, prompt)
        return f"mock reply {_digest(prompt)}"

    @staticmethod
    def _question(prompt: str) -> str:
        m = _QUESTION_LINE.search(prompt)
        return m.group(1).strip() if m else ""

    def _ner(self, question: str) -> str:
        ents = self.knowledge.entities.get(question)
        if ents is None:
            return "none"
        return ", ".join(ents) if ents else "none"

    def _draft(self, question: str) -> str:
        draft = self.knowledge.drafts.get(question)
        if draft is not None:
            return draft
        return f"Draft notes on this question ({_digest(question)})."

    def _short_answer(self, question: str, prompt: str) -> str:
        answer = self.knowledge.answers.get(question)
        return answer if answer is not None else _digest(question or prompt)

    def _kg_answer(self, question: str, prompt: str) -> str:
        n_facts = len(_FACT_LINE.findall(prompt))
        base = self.knowledge.answers.get(question)
        if base is None:
            base = f"A careful answer to this question ({_digest(question or prompt)})."
        if n_facts:
            return f"{base} This answer takes {n_facts} retrieved facts into account."
        return f"{base} No external facts were available for this answer."

    @staticmethod
    def _judge(prompt: str) -> str:
        return "Winner: Tie\nRationale: Both answers address the question comparably."


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:10]
