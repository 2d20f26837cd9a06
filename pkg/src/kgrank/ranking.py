"""Triple ranking: similarity, answer expansion, MMR, and cross-encoder re-rank.

All strategies are pure functions over already-computed embeddings. Ties
are always broken by the original candidate index so that rankings are
reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kgrank.errors import ProtocolError, ValidationError
from kgrank.kg.types import Triple
from kgrank.prompts import PromptTemplate, load_template
from kgrank.providers.base import Completer, CompletionRequest, CrossScorer, Embedder, Vector
from kgrank.errors import EmptyCompletionError

DEFAULT_TOP_P = 30
DEFAULT_POOL_SIZE = 60
DEFAULT_MMR_W_BASE = 0.1
DEFAULT_MMR_DELTA = 0.01

Candidate = tuple[Triple, Vector]


@dataclass(frozen=True)
class RankedTriple:
    triple: Triple
    score: float
    rank: int

    def to_dict(self) -> dict:
        return {"triple": self.triple.to_dict(), "score": self.score, "rank": self.rank}

    @classmethod
    def from_dict(cls, data: dict) -> "RankedTriple":
        return cls(triple=Triple.from_dict(data["triple"]), score=data["score"], rank=data["rank"])


@dataclass(frozen=True)
class MmrParams:
    """Redundancy-penalty schedule: the weight grows by `delta` for every
    triple already selected, starting from `w_base`."""

    w_base: float = DEFAULT_MMR_W_BASE
    delta: float = DEFAULT_MMR_DELTA
    k: int = DEFAULT_POOL_SIZE

    def __post_init__(self):
        if self.w_base < 0 or self.delta < 0:
            raise ValidationError("mmr weights must be >= 0")
        if self.k < 1:
            raise ValidationError("mmr k must be >= 1")


def textualize(triple: Triple) -> str:
    """Render a triple as encoder-friendly text; underscores in the relation
    become spaces."""
    relation = triple.relation.replace("_", " ")
    return f"{triple.head.preferred_name} {relation} {triple.tail.preferred_name}"


def cosine(u: Vector, v: Vector) -> float:
    if u.dim != v.dim:
        raise ValidationError(f"cosine dim mismatch: {u.dim} != {v.dim}")
    a = np.asarray(u.components, dtype=np.float64)
    b = np.asarray(v.components, dtype=np.float64)
    aa = float(np.dot(a, a))
    bb = float(np.dot(b, b))
    if aa == 0.0 or bb == 0.0:
        raise ValidationError("cosine is undefined for a zero vector")
    # sqrt(aa*bb) keeps cosine(x, x) exactly 1.0
    value = float(np.dot(a, b)) / float(np.sqrt(aa * bb))
    return max(-1.0, min(1.0, value))


def rank_similarity(q: Vector, candidates: Sequence[Candidate]) -> list[RankedTriple]:
    """Sort candidates by cosine similarity to the query embedding."""
    _check_candidates(q, candidates)
    scores = [cosine(q, vec) for _, vec in candidates]
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
    return [
        RankedTriple(triple=candidates[i][0], score=scores[i], rank=pos)
        for pos, i in enumerate(order)
    ]


def rank_mmr(q: Vector, candidates: Sequence[Candidate], params: MmrParams) -> list[RankedTriple]:
    """Greedy selection balancing query relevance against redundancy.

    The first pick is the candidate most similar to the query. Each later
    pick maximizes ``sim(q, r) - w * mean(sim(r, selected))`` where
    ``w = w_base + delta * n`` and ``n`` counts the already-selected
    triples. Recorded scores are the adjusted scores at selection time, so
    they need not decrease monotonically.
    """
    _check_candidates(q, candidates)
    n = len(candidates)
    vectors = [vec for _, vec in candidates]
    sims_q = [cosine(q, vec) for vec in vectors]
    pair_cache: dict[tuple[int, int], float] = {}

    def pair_sim(i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in pair_cache:
            pair_cache[key] = cosine(vectors[i], vectors[j])
        return pair_cache[key]

    remaining = list(range(n))
    picks: list[tuple[int, float]] = []
    k = min(params.k, n)
    while len(picks) < k:
        if not picks:
            best = min(remaining, key=lambda i: (-sims_q[i], i))
            picks.append((best, sims_q[best]))
        else:
            selected = [i for i, _ in picks]
            w = params.w_base + params.delta * len(selected)
            adjusted = {}
            for i in remaining:
                redundancy = sum(pair_sim(i, j) for j in selected) / len(selected)
                adjusted[i] = sims_q[i] - w * redundancy
            best = min(remaining, key=lambda i: (-adjusted[i], i))
            picks.append((best, adjusted[best]))
        remaining.remove(best)
    return [
        RankedTriple(triple=candidates[i][0], score=score, rank=pos)
        for pos, (i, score) in enumerate(picks)
    ]


def rerank_top_p(
    question: str,
    ordered: Sequence[RankedTriple],
    p: int,
    scorer: CrossScorer,
    pool_size: int | None = None,
) -> list[RankedTriple]:
    """Re-score the head of an existing ranking with a cross-encoder.

    The first ``pool_size`` triples (default 2*p) are re-scored against the
    question; the best ``p`` are returned, ties broken by incoming rank.
    """
    if len(ordered) == 0:
        raise ValidationError("rerank requires a non-empty ranking")
    if p < 1:
        raise ValidationError("p must be >= 1")
    if pool_size is None:
        pool_size = 2 * p
    pool = list(ordered[: min(pool_size, len(ordered))])
    scores = scorer.cross_score(question, [textualize(rt.triple) for rt in pool])
    if len(scores) != len(pool):
        raise ProtocolError(f"scorer returned {len(scores)} scores for {len(pool)} passages")
    order = sorted(range(len(pool)), key=lambda i: (-scores[i], i))
    top = order[: min(p, len(pool))]
    return [
        RankedTriple(triple=pool[i].triple, score=float(scores[i]), rank=pos)
        for pos, i in enumerate(top)
    ]


@dataclass(frozen=True)
class AnswerExpansionRanking:
    """Ranking plus the provenance of the expansion step."""

    ranked: list[RankedTriple]
    expanded_answer: str
    fell_back_to_question: bool


def rank_answer_expansion(
    question: str,
    candidates: Sequence[Candidate],
    llm: Completer,
    embedder: Embedder,
    *,
    template: PromptTemplate | None = None,
    llm_model: str = "default",
    max_tokens: int = 512,
) -> AnswerExpansionRanking:
    """Rank against the question expanded with a provisional LLM answer.

    The LLM drafts an answer from the question alone; question and draft
    are embedded together and candidates are ranked by similarity to that
    combined text. An empty draft falls back to ranking by the question
    embedding alone, flagged for provenance.
    """
    if len(candidates) == 0:
        raise ValidationError("rank_answer_expansion requires candidates")
    tmpl = template or load_template("answer_expansion")
    prompt = tmpl.render(question=question)
    fell_back = False
    try:
        answer = llm.complete(
            CompletionRequest(prompt=prompt, temperature=0.0, max_tokens=max_tokens, model_id=llm_model)
        )
    except EmptyCompletionError:
        answer = ""
    if answer.strip():
        expanded_text = f"{question} {answer}"
    else:
        expanded_text = question
        answer = ""
        fell_back = True
    t = embedder.embed([expanded_text])[0]
    return AnswerExpansionRanking(
        ranked=rank_similarity(t, candidates),
        expanded_answer=answer,
        fell_back_to_question=fell_back,
    )


def _check_candidates(q: Vector, candidates: Sequence[Candidate]) -> None:
    if len(candidates) == 0:
        raise ValidationError("ranking requires at least one candidate")
    for _, vec in candidates:
        if vec.dim != q.dim:
            raise ValidationError(f"candidate dim {vec.dim} != query dim {q.dim}")
