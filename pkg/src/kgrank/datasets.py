"""Normalized QA dataset loading, corpus statistics, and short-answer matching.

Datasets are stored as JSONL, one object per line:

    {"id": str, "question": str, "references": [str], "field": str, "dataset": str}

Converters from upstream source formats are documented in docs/datasets.md;
this module only ever sees the normalized form.
"""

from __future__ import annotations

import dataclasses
import json
import re
from pathlib import Path
from typing import Iterable, Sequence

from kgrank.errors import DatasetError, ValidationError

# Splitting on terminal punctuation is deliberately abbreviation-unaware;
# corpus statistics are approximate by contract.
_SENTENCE_SPLIT = re.compile(r"[.!?]+")
_PUNCT = re.compile(r"[^\w\s]")
_ARTICLES = frozenset({"a", "an", "the"})


@dataclasses.dataclass(frozen=True)
class QAPair:
    id: str
    question: str
    references: tuple[str, ...]
    field: str
    dataset: str

    def __post_init__(self):
        if not self.question.strip():
            raise ValidationError(f"pair {self.id!r}: question must be non-empty")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "references": list(self.references),
            "field": self.field,
            "dataset": self.dataset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QAPair":
        return cls(
            id=data["id"],
            question=data["question"],
            references=tuple(data["references"]),
            field=data["field"],
            dataset=data["dataset"],
        )


@dataclasses.dataclass(frozen=True)
class DatasetStats:
    avg_sentences_q: float
    avg_words_q: float
    avg_sentences_a: float
    avg_words_a: float

    def to_dict(self) -> dict:
        return {
            "avg_sentences_q": self.avg_sentences_q,
            "avg_words_q": self.avg_words_q,
            "avg_sentences_a": self.avg_sentences_a,
            "avg_words_a": self.avg_words_a,
        }


_REQUIRED_FIELDS = (
    ("id", str),
    ("question", str),
    ("references", list),
    ("field", str),
    ("dataset", str),
)


def _parse_line(line: str, line_no: int, path: Path) -> QAPair:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DatasetError(f"{path}:{line_no}: expected an object, got {type(obj).__name__}")
    for name, kind in _REQUIRED_FIELDS:
        if name not in obj:
            raise DatasetError(f"{path}:{line_no}: missing field {name!r}")
        if not isinstance(obj[name], kind):
            raise DatasetError(f"{path}:{line_no}: field {name!r} must be {kind.__name__}")
    for ref in obj["references"]:
        if not isinstance(ref, str):
            raise DatasetError(f"{path}:{line_no}: references must be strings")
    try:
        return QAPair.from_dict(obj)
    except ValidationError as exc:
        raise DatasetError(f"{path}:{line_no}: {exc}") from exc


def load(path: str | Path, *, dataset: str | None = None, field: str | None = None) -> list[QAPair]:
    """Load a JSONL dataset, optionally filtered by dataset name or field tag."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    pairs: list[QAPair] = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            pair = _parse_line(line, line_no, path)
            if dataset is not None and pair.dataset != dataset:
                continue
            if field is not None and pair.field != field:
                continue
            pairs.append(pair)
    if not pairs:
        raise DatasetError(f"no pairs loaded from {path}")
    seen: set[str] = set()
    for pair in pairs:
        if pair.id in seen:
            raise DatasetError(f"duplicate pair id {pair.id!r} in {path}")
        seen.add(pair.id)
    return pairs


def save(pairs: Iterable[QAPair], path: str | Path) -> None:
    path = Path(path)
    lines = [json.dumps(pair.to_dict(), sort_keys=True) for pair in pairs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def count_words(text: str) -> int:
    return len(text.split())


def count_sentences(text: str) -> int:
    segments = [seg for seg in _SENTENCE_SPLIT.split(text) if seg.strip()]
    return len(segments)


def stats(pairs: Sequence[QAPair]) -> DatasetStats:
    """Average sentence and word counts over all questions and all references."""
    if not pairs:
        raise ValidationError("stats requires a non-empty dataset")
    questions = [pair.question for pair in pairs]
    answers = [ref for pair in pairs for ref in pair.references]
    avg_sentences_q = sum(count_sentences(q) for q in questions) / len(questions)
    avg_words_q = sum(count_words(q) for q in questions) / len(questions)
    if answers:
        avg_sentences_a = sum(count_sentences(a) for a in answers) / len(answers)
        avg_words_a = sum(count_words(a) for a in answers) / len(answers)
    else:
        avg_sentences_a = 0.0
        avg_words_a = 0.0
    return DatasetStats(
        avg_sentences_q=avg_sentences_q,
        avg_words_q=avg_words_q,
        avg_sentences_a=avg_sentences_a,
        avg_words_a=avg_words_a,
    )


def normalize_answer(text: str) -> list[str]:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    lowered = _PUNCT.sub(" ", text.lower())
    return [tok for tok in lowered.split() if tok not in _ARTICLES]


def match_short_answer(prediction: str, gold: str) -> bool:
    """True when the normalized gold equals the normalized prediction or
    appears in it as a contiguous token run."""
    if not prediction.strip() or not gold.strip():
        raise ValidationError("match_short_answer requires non-empty texts")
    pred = normalize_answer(prediction)
    want = normalize_answer(gold)
    if not want:
        return False
    if pred == want:
        return True
    span = len(want)
    return any(pred[i : i + span] == want for i in range(len(pred) - span + 1))
