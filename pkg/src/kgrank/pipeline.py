"""End-to-end question answering: entity extraction, KG retrieval, ranking,
re-ranking, prompt assembly, and generation.

Each question produces one AnswerRecord with full provenance: the mentions
and concepts found, every ranked triple, the exact prompt, and the chosen
answer. Records serialize deterministically so replayed runs can be
compared byte for byte.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from kgrank.config import RunConfig
from kgrank.datasets import QAPair
from kgrank.errors import EmptyCompletionError, KgNotFoundError, KgRankError, StageError, ValidationError
from kgrank.jsonio import atomic_write_json, read_json
from kgrank.kg.client import KgClient
from kgrank.kg.types import ConceptRef, Triple
from kgrank.prompts import PromptTemplate, load_template
from kgrank.providers.base import CompletionRequest, ProviderSet
from kgrank.ranking import (
    MmrParams,
    RankedTriple,
    rank_answer_expansion,
    rank_mmr,
    rank_similarity,
    rerank_top_p,
    textualize,
)

NO_FACTS_LINE = "(no external facts retrieved)"
NER_MAX_TOKENS = 256
DRAFT_MAX_TOKENS = 512

_NONE_SENTINEL = re.compile(r"^none\.?$", re.IGNORECASE)
_UNSAFE_ID = re.compile(r"[^A-Za-z0-9._-]")


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    question: str
    mentions: tuple[str, ...]
    concepts: tuple[ConceptRef, ...]
    retrieved_count: int
    ranked: tuple[RankedTriple, ...]
    selected: tuple[RankedTriple, ...]
    prompt: str
    answer: str
    config_snapshot: dict
    timings: dict
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "question": self.question,
            "mentions": list(self.mentions),
            "concepts": [c.to_dict() for c in self.concepts],
            "retrieved_count": self.retrieved_count,
            "ranked": [rt.to_dict() for rt in self.ranked],
            "selected": [rt.to_dict() for rt in self.selected],
            "prompt": self.prompt,
            "answer": self.answer,
            "config_snapshot": self.config_snapshot,
            "timings": self.timings,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnswerRecord":
        return cls(
            question_id=data["question_id"],
            question=data["question"],
            mentions=tuple(data["mentions"]),
            concepts=tuple(ConceptRef.from_dict(c) for c in data["concepts"]),
            retrieved_count=data["retrieved_count"],
            ranked=tuple(RankedTriple.from_dict(rt) for rt in data["ranked"]),
            selected=tuple(RankedTriple.from_dict(rt) for rt in data["selected"]),
            prompt=data["prompt"],
            answer=data["answer"],
            config_snapshot=data["config_snapshot"],
            timings=data["timings"],
            warnings=tuple(data["warnings"]),
        )


def parse_entity_completion(text: str) -> list[str]:
    """Comma/newline-separated mention list; "none" is the empty sentinel.
    Duplicates are dropped case-insensitively, first occurrence kept."""
    cleaned = text.strip()
    if not cleaned or _NONE_SENTINEL.match(cleaned):
        return []
    mentions: list[str] = []
    seen: set[str] = set()
    for part in re.split(r"[,\n]", cleaned):
        mention = part.strip().strip("-*").strip()
        if not mention or _NONE_SENTINEL.match(mention):
            continue
        key = mention.casefold()
        if key in seen:
            continue
        seen.add(key)
        mentions.append(mention)
    return mentions


def extract_entities(
    question: str,
    llm,
    *,
    llm_model: str = "default",
    templates_dir: str | Path | None = None,
) -> list[str]:
    """Ask the LLM for entity mentions in the question."""
    if not question.strip():
        raise ValidationError("question must be non-empty")
    template = load_template("ner", templates_dir)
    prompt = template.render(question=question)
    completion = llm.complete(
        CompletionRequest(prompt=prompt, temperature=0.0, max_tokens=NER_MAX_TOKENS, model_id=llm_model)
    )
    return parse_entity_completion(completion)


def build_prompt(template: PromptTemplate, question: str, selected: Sequence[RankedTriple]) -> str:
    """Render the answer prompt; triples appear one per line in rank order."""
    if selected:
        triples_block = "\n".join(f"- {textualize(rt.triple)}" for rt in selected)
    else:
        triples_block = NO_FACTS_LINE
    return template.render(question=question, triples=triples_block)


@contextmanager
def _stage(name: str, timings: dict, clock: Callable[[], float]):
    start = clock()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc), exc) from exc
    finally:
        timings[name] = clock() - start


def answer(
    pair: QAPair,
    *,
    providers: ProviderSet,
    kg: KgClient | None,
    config: RunConfig,
    templates_dir: str | Path | None = None,
    zero_timings: bool = False,
) -> AnswerRecord:
    """Run the full pipeline for one question.

    When no entities map to concepts or no triples come back, the record
    falls back to a zero-shot prompt instead of failing, so every dataset
    row still yields an answer.
    """
    # Zeroed timings keep replayed records byte-identical across runs.
    clock: Callable[[], float] = (lambda: 0.0) if zero_timings else time.perf_counter
    timings: dict = {}
    warnings: list[str] = []
    question = pair.question

    mentions: list[str] = []
    concepts: list[ConceptRef] = []
    triples: list[Triple] = []

    if config.strategy != "zs":
        if kg is None:
            raise StageError("entity-mapping", "no KG client configured")
        with _stage("ner", timings, clock):
            template = load_template("ner", templates_dir)
            completion = providers.completer.complete(
                CompletionRequest(
                    prompt=template.render(question=question),
                    temperature=0.0,
                    max_tokens=NER_MAX_TOKENS,
                    model_id=config.llm_model,
                )
            )
            mentions = parse_entity_completion(completion)
            if completion.strip() and not mentions and not _NONE_SENTINEL.match(completion.strip()):
                warnings.append("entity completion yielded no mentions")

        with _stage("entity-mapping", timings, clock):
            seen_ids: set[str] = set()
            for mention in mentions:
                try:
                    concept = kg.map_entity(mention)
                except KgNotFoundError:
                    concept = None
                if concept is None:
                    warnings.append(f"no concept found for mention {mention!r}")
                    continue
                if concept.id not in seen_ids:
                    seen_ids.add(concept.id)
                    concepts.append(concept)

        with _stage("kg-retrieval", timings, clock):
            seen_keys: set[tuple] = set()
            for concept in concepts:
                remaining = config.retrieval_cap - len(triples)
                if remaining <= 0:
                    break
                for triple in kg.fetch_one_hop(concept, limit=remaining):
                    if triple.key() not in seen_keys:
                        seen_keys.add(triple.key())
                        triples.append(triple)

    retrieved_count = len(triples)
    ranked: list[RankedTriple] = []
    selected: list[RankedTriple] = []

    if config.strategy != "zs" and not triples:
        warnings.append("zero-shot fallback: no knowledge graph facts available")

    if triples:
        texts = [textualize(t) for t in triples]
        if config.strategy in ("sim", "mmr"):
            with _stage("embedding", timings, clock):
                vectors = providers.embedder.embed([question] + texts)
                q_vec, cand_vecs = vectors[0], vectors[1:]
                candidates = list(zip(triples, cand_vecs))
            with _stage("ranking", timings, clock):
                if config.strategy == "sim":
                    ranked = rank_similarity(q_vec, candidates)
                else:
                    params = MmrParams(
                        w_base=config.mmr_w_base, delta=config.mmr_delta, k=len(candidates)
                    )
                    ranked = rank_mmr(q_vec, candidates, params)
        else:  # ae
            with _stage("embedding", timings, clock):
                cand_vecs = providers.embedder.embed(texts)
                candidates = list(zip(triples, cand_vecs))
            with _stage("ranking", timings, clock):
                expansion = rank_answer_expansion(
                    question,
                    candidates,
                    providers.completer,
                    providers.embedder,
                    template=load_template("answer_expansion", templates_dir),
                    llm_model=config.llm_model,
                    max_tokens=DRAFT_MAX_TOKENS,
                )
                ranked = expansion.ranked
                if expansion.fell_back_to_question:
                    warnings.append("answer expansion fell back to the question embedding")

        if config.rerank:
            with _stage("rerank", timings, clock):
                selected = rerank_top_p(
                    question, ranked, config.p, providers.scorer, pool_size=config.pool_size
                )
        else:
            selected = list(ranked[: config.p])

    with _stage("prompt", timings, clock):
        template = load_template(config.answer_template, templates_dir)
        prompt = build_prompt(template, question, selected)

    with _stage("generation", timings, clock):
        try:
            answer_text = providers.completer.complete(
                CompletionRequest(
                    prompt=prompt,
                    temperature=config.temperature,
                    max_tokens=config.max_tokens,
                    model_id=config.llm_model,
                )
            )
        except EmptyCompletionError as exc:
            raise KgRankError(f"empty completion for question {pair.id!r}") from exc

    return AnswerRecord(
        question_id=pair.id,
        question=question,
        mentions=tuple(mentions),
        concepts=tuple(concepts),
        retrieved_count=retrieved_count,
        ranked=tuple(ranked),
        selected=tuple(selected),
        prompt=prompt,
        answer=answer_text,
        config_snapshot=config.snapshot(),
        timings=timings,
        warnings=tuple(warnings),
    )


def record_filename(question_id: str) -> str:
    return _UNSAFE_ID.sub("_", question_id) + ".json"


@dataclass
class RunOutcome:
    records: list[AnswerRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        total = len(self.records) + len(self.failures)
        return {
            "total": total,
            "succeeded": len(self.records),
            "failed": len(self.failures),
            "failures": sorted(self.failures, key=lambda f: f["id"]),
        }


def run_pipeline(
    pairs: Sequence[QAPair],
    config: RunConfig,
    *,
    providers: ProviderSet,
    kg: KgClient | None,
    run_dir: str | Path,
    templates_dir: str | Path | None = None,
) -> RunOutcome:
    """Answer every pair, writing one record file per question plus a run
    summary. Per-question failures are collected, not fatal."""
    run_dir = Path(run_dir)
    answers_dir = run_dir / "answers"
    answers_dir.mkdir(parents=True, exist_ok=True)
    zero_timings = config.mode == "replay"

    def one(pair: QAPair):
        return answer(
            pair,
            providers=providers,
            kg=kg,
            config=config,
            templates_dir=templates_dir,
            zero_timings=zero_timings,
        )

    outcome = RunOutcome()
    if config.parallelism == 1:
        results = [(pair, _capture(one, pair)) for pair in pairs]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            futures = [(pair, pool.submit(_capture, one, pair)) for pair in pairs]
            results = [(pair, future.result()) for pair, future in futures]

    for pair, (record, error) in results:
        if record is not None:
            outcome.records.append(record)
            atomic_write_json(answers_dir / record_filename(pair.id), record.to_dict())
        else:
            stage = error.stage if isinstance(error, StageError) else None
            outcome.failures.append({"id": pair.id, "stage": stage, "error": str(error)})
    atomic_write_json(run_dir / "summary.json", outcome.summary)
    return outcome


def _capture(fn, pair):
    try:
        return fn(pair), None
    except KgRankError as exc:
        return None, exc


def load_run_answers(run_dir: str | Path) -> dict[str, str]:
    """Map question id to answer text for every record in a run directory."""
    answers_dir = Path(run_dir) / "answers"
    if not answers_dir.is_dir():
        raise ValidationError(f"no answers directory under {run_dir}")
    answers: dict[str, str] = {}
    for path in sorted(answers_dir.glob("*.json")):
        record = AnswerRecord.from_dict(read_json(path))
        answers[record.question_id] = record.answer
    if not answers:
        raise ValidationError(f"no answer records under {answers_dir}")
    return answers
