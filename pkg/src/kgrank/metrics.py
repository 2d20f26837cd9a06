"""Answer scoring: ROUGE-1/2/L, short-answer accuracy, and pairwise LLM judging.

ROUGE uses lowercased whitespace tokens with no stemming or stopword
removal, and ROUGE-L takes the longest common subsequence over the whole
text. Both choices are simple defensible defaults and are documented in
the README for comparability.
"""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from kgrank.datasets import QAPair, match_short_answer
from kgrank.errors import EvaluationError, ValidationError
from kgrank.jsonio import atomic_write_json, atomic_write_text
from kgrank.prompts import load_text, render_body
from kgrank.providers.base import Completer, CompletionRequest

METRIC_NAMES = ("rouge_1", "rouge_2", "rouge_l", "accuracy")
JUDGE_CRITERIA_VERSION = "pairwise-v1"

_WINNER_LINE = re.compile(r"^\s*Winner:\s*(A|B|Tie)\s*$", re.IGNORECASE | re.MULTILINE)
_RATIONALE_LINE = re.compile(r"^\s*Rationale:\s*(.+)$", re.IGNORECASE | re.MULTILINE)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _prf(precision: float, recall: float) -> PRF:
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return PRF(precision=precision, recall=recall, f1=f1)


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> PRF:
    if n not in (1, 2):
        raise ValidationError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand = _ngrams(tokenize(candidate), n)
    ref = _ngrams(tokenize(reference), n)
    total_cand = sum(cand.values())
    total_ref = sum(ref.values())
    if total_cand == 0 or total_ref == 0:
        return PRF(0.0, 0.0, 0.0)
    overlap = sum((cand & ref).values())
    return _prf(overlap / total_cand, overlap / total_ref)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Classic quadratic DP, rolling row."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> PRF:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return PRF(0.0, 0.0, 0.0)
    lcs = lcs_length(cand, ref)
    return _prf(lcs / len(cand), lcs / len(ref))


def score_metric(metric: str, candidate: str, reference: str) -> PRF:
    if metric == "rouge_1":
        return rouge_n(candidate, reference, 1)
    if metric == "rouge_2":
        return rouge_n(candidate, reference, 2)
    if metric == "rouge_l":
        return rouge_l(candidate, reference)
    if metric == "accuracy":
        if not candidate.strip() or not reference.strip():
            return PRF(0.0, 0.0, 0.0)
        hit = 1.0 if match_short_answer(candidate, reference) else 0.0
        return PRF(hit, hit, hit)
    raise ValidationError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")


@dataclass(frozen=True)
class JudgeVerdict:
    winner: str  # "a", "b", or "tie"
    rationale: str
    criteria_version: str
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.winner not in ("a", "b", "tie"):
            raise ValidationError(f"winner must be a, b, or tie, got {self.winner!r}")
        if not self.rationale:
            raise ValidationError("rationale must be non-empty")

    def to_dict(self) -> dict:
        return {
            "winner": self.winner,
            "rationale": self.rationale,
            "criteria_version": self.criteria_version,
            "warnings": list(self.warnings),
        }


def parse_judge_completion(text: str) -> tuple[str | None, str]:
    """Extract (winner, rationale) from a judge completion; winner is None
    when no verdict line is found."""
    match = _WINNER_LINE.search(text)
    winner = match.group(1).lower() if match else None
    rationale_match = _RATIONALE_LINE.search(text)
    rationale = rationale_match.group(1).strip() if rationale_match else text.strip()
    return winner, rationale


def judge_pairwise(
    question: str,
    answer_a: str,
    answer_b: str,
    llm: Completer,
    *,
    llm_model: str = "default",
    max_tokens: int = 512,
    order_swap: bool = True,
    templates_dir: str | None = None,
) -> JudgeVerdict:
    """Adjudicate two answers with an LLM judge.

    With order_swap (the default) the judge is queried twice with the
    answers swapped and a non-tie winner stands only when both orderings
    agree; disagreement or an unparseable verdict yields a tie. The
    single-pass variant is kept for comparison with judges that do not
    guard against position bias.
    """
    if not answer_a.strip() or not answer_b.strip():
        raise ValidationError("judge_pairwise requires two non-empty answers")
    body = load_text("judge_pairwise.txt", templates_dir=templates_dir)

    def ask(first: str, second: str) -> tuple[str | None, str]:
        prompt = render_body(body, {"question": question, "answer_a": first, "answer_b": second})
        completion = llm.complete(
            CompletionRequest(prompt=prompt, temperature=0.0, max_tokens=max_tokens, model_id=llm_model)
        )
        return parse_judge_completion(completion)

    warnings: list[str] = []
    verdict1, rationale1 = ask(answer_a, answer_b)
    if verdict1 is None:
        warnings.append("pass 1: no verdict line found")
    # map positional verdicts to the underlying answers
    first = {"a": "a", "b": "b", "tie": "tie", None: None}[verdict1]
    if not order_swap:
        winner = first if first is not None else "tie"
        return JudgeVerdict(
            winner=winner,
            rationale=rationale1 or "(no rationale)",
            criteria_version=JUDGE_CRITERIA_VERSION,
            warnings=tuple(warnings),
        )
    verdict2, rationale2 = ask(answer_b, answer_a)
    if verdict2 is None:
        warnings.append("pass 2: no verdict line found")
    second = {"a": "b", "b": "a", "tie": "tie", None: None}[verdict2]
    if first is not None and first == second:
        winner = first
    else:
        winner = "tie"
        if first is not None and second is not None and first != second:
            warnings.append("orderings disagreed")
    rationale = " / ".join(part for part in (rationale1, rationale2) if part) or "(no rationale)"
    return JudgeVerdict(
        winner=winner,
        rationale=rationale,
        criteria_version=JUDGE_CRITERIA_VERSION,
        warnings=tuple(warnings),
    )


def evaluate_run(
    answers: Mapping[str, str],
    pairs: Sequence[QAPair],
    metric_set: Sequence[str] = ("rouge_1", "rouge_2", "rouge_l"),
) -> dict:
    """Score answers against references; multi-reference questions take the
    best score per metric (by f1). Returns the full report structure."""
    for metric in metric_set:
        if metric not in METRIC_NAMES:
            raise ValidationError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    if not answers:
        raise EvaluationError("no answers to evaluate")
    by_id = {pair.id: pair for pair in pairs}
    missing = sorted(set(answers) - set(by_id))
    if missing:
        raise EvaluationError(f"answer ids not in dataset: {', '.join(missing)}")

    per_question: list[dict] = []
    for qid in sorted(answers):
        candidate = answers[qid]
        references = by_id[qid].references
        row: dict = {"id": qid}
        for metric in metric_set:
            scored = [score_metric(metric, candidate, ref) for ref in references]
            best = max(scored, key=lambda s: s.f1) if scored else PRF(0.0, 0.0, 0.0)
            row[metric] = best.to_dict()
        per_question.append(row)

    corpus: dict = {}
    count = len(per_question)
    for metric in metric_set:
        corpus[metric] = {
            "precision": sum(row[metric]["precision"] for row in per_question) / count,
            "recall": sum(row[metric]["recall"] for row in per_question) / count,
            "f1": sum(row[metric]["f1"] for row in per_question) / count,
        }
    return {
        "count": count,
        "metrics": list(metric_set),
        "per_question": per_question,
        "corpus": corpus,
    }


def render_report_csv(report: dict) -> str:
    buffer = io.StringIO()
    metrics = report["metrics"]
    header = ["id"]
    for metric in metrics:
        header += [f"{metric}_precision", f"{metric}_recall", f"{metric}_f1"]
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in report["per_question"]:
        out = [row["id"]]
        for metric in metrics:
            prf = row[metric]
            out += [f"{prf['precision']:.6f}", f"{prf['recall']:.6f}", f"{prf['f1']:.6f}"]
        writer.writerow(out)
    mean_row = ["mean"]
    for metric in metrics:
        prf = report["corpus"][metric]
        mean_row += [f"{prf['precision']:.6f}", f"{prf['recall']:.6f}", f"{prf['f1']:.6f}"]
    writer.writerow(mean_row)
    return buffer.getvalue()


def write_reports(
    report: dict,
    answers: Mapping[str, str],
    pairs: Sequence[QAPair],
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write report.csv, report.json, and the export file for external
    model-based scorers."""
    out_dir = Path(out_dir)
    by_id = {pair.id: pair for pair in pairs}
    paths = {
        "json": out_dir / "report.json",
        "csv": out_dir / "report.csv",
        "export": out_dir / "export_for_external_scorers.jsonl",
    }
    atomic_write_json(paths["json"], report)
    atomic_write_text(paths["csv"], render_report_csv(report))
    export_lines = [
        json.dumps(
            {"id": qid, "candidate": answers[qid], "references": list(by_id[qid].references)},
            sort_keys=True,
            ensure_ascii=False,
        )
        for qid in sorted(answers)
    ]
    atomic_write_text(paths["export"], "\n".join(export_lines) + "\n")
    return paths
