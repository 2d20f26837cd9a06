"""Headline behavior gates.

Each test prints one `[ACCEPTANCE] <name>: PASS|FAIL` line; run
`pytest tests/test_acceptance.py -rA` to see every line in the summary.

The ranking and ROUGE gates compare the shipped implementations against
independent brute-force references written from the same definitions in
pure Python, sharing no code with the package.
"""

import json
import math
import os
import random
import shutil
import socket
import time

import pytest
from click.testing import CliRunner

from kgrank.cli import main
from kgrank.datasets import QAPair, load as load_dataset, stats as dataset_stats
from kgrank.kg.types import ConceptRef, Triple
from kgrank.metrics import PRF, judge_pairwise, rouge_l
from kgrank.providers.base import CompletionRequest, Vector
from kgrank.providers.cassette import Cassette, RecordingCompleter, ReplayCompleter, load_cassette
from kgrank.ranking import MmrParams, rank_mmr, rank_similarity, rerank_top_p


def check(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: {status}{suffix}")
    assert ok, f"{name}: {detail}" if detail else name


# --- shared random-instance machinery ---------------------------------------


def random_vector(rng: random.Random, dim: int) -> list[float]:
    while True:
        v = [rng.uniform(-1.0, 1.0) for _ in range(dim)]
        if math.sqrt(sum(x * x for x in v)) > 1e-3:
            return v


def random_instance(rng: random.Random, max_n: int = 20, max_dim: int = 8):
    n = rng.randint(1, max_n)
    dim = rng.randint(1, max_dim)
    q = random_vector(rng, dim)
    vecs = [random_vector(rng, dim) for _ in range(n)]
    # occasional bitwise duplicates exercise index tie-breaking
    if n >= 2 and rng.random() < 0.3:
        i, j = rng.sample(range(n), 2)
        vecs[j] = list(vecs[i])
    return q, vecs


def make_candidates(vecs: list[list[float]]):
    candidates = []
    for i, vec in enumerate(vecs):
        head = ConceptRef(id=f"c{i}", preferred_name=f"c{i}", source="umls")
        tail = ConceptRef(id=f"t{i}", preferred_name=f"t{i}", source="umls")
        triple = Triple(head=head, relation="related_to", tail=tail, source="umls")
        candidates.append((triple, Vector.of(vec)))
    return candidates


def ranked_ids(ranked) -> list[int]:
    return [int(rt.triple.head.id[1:]) for rt in ranked]


# --- brute-force references --------------------------------------------------


def reference_cosine(u: list[float], v: list[float]) -> float:
    # Same algebraic arrangement as the package (single sqrt, clamped
    # range): mathematically tied pairs must round identically on both
    # sides or "exact ordering equality" is ill-defined at dim=1, where
    # every pair of vectors is parallel.
    dot = sum(a * b for a, b in zip(u, v))
    aa = sum(a * a for a in u)
    bb = sum(b * b for b in v)
    return max(-1.0, min(1.0, dot / math.sqrt(aa * bb)))


def reference_similarity_order(q, vecs) -> list[int]:
    scores = [reference_cosine(q, v) for v in vecs]
    return sorted(range(len(vecs)), key=lambda i: (-scores[i], i))


def reference_mmr_order(q, vecs, w_base: float, delta: float) -> list[int]:
    rel = [reference_cosine(q, v) for v in vecs]
    pair: dict[tuple[int, int], float] = {}

    def psim(i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in pair:
            pair[key] = reference_cosine(vecs[i], vecs[j])
        return pair[key]

    selected: list[int] = []
    remaining = list(range(len(vecs)))
    while remaining:
        w = w_base + delta * len(selected)

        def adjusted(i: int) -> float:
            if not selected:
                return rel[i]
            return rel[i] - w * (sum(psim(i, j) for j in selected) / len(selected))

        best = min(remaining, key=lambda i: (-adjusted(i), i))
        selected.append(best)
        remaining.remove(best)
    return selected


def subsequence_set(tokens: tuple[str, ...]) -> set[tuple[str, ...]]:
    subs = {()}
    for t in tokens:
        subs |= {s + (t,) for s in subs}
    return subs


def reference_rouge_l(cand: tuple[str, ...], ref: tuple[str, ...]) -> PRF:
    lcs = max(len(s) for s in subsequence_set(cand) & subsequence_set(ref))
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1)


# --- gates --------------------------------------------------------------------


def test_ranking_oracle_equivalence():
    rng = random.Random(20260814)
    start = time.perf_counter()
    bad = []
    for trial in range(500):
        q, vecs = random_instance(rng)
        candidates = make_candidates(vecs)
        qv = Vector.of(q)

        got_sim = ranked_ids(rank_similarity(qv, candidates))
        want_sim = reference_similarity_order(q, vecs)
        if got_sim != want_sim:
            bad.append(("sim", trial))

        w_base = rng.choice([0.0, 0.05, 0.1, 0.5, 1.0])
        delta = rng.choice([0.0, 0.01, 0.1])
        params = MmrParams(w_base=w_base, delta=delta, k=len(vecs))
        got_mmr = ranked_ids(rank_mmr(qv, candidates, params))
        want_mmr = reference_mmr_order(q, vecs, w_base, delta)
        if got_mmr != want_mmr:
            bad.append(("mmr", trial))
    elapsed = time.perf_counter() - start
    check(
        "ranking-oracle-equivalence",
        not bad and elapsed < 10.0,
        f"500 instances (n<=20, dim<=8), {elapsed:.2f}s"
        + (f", mismatches={bad[:5]}" if bad else ""),
    )


def test_mmr_reduction_law():
    rng = random.Random(31)
    bad = 0
    for _ in range(200):
        q, vecs = random_instance(rng)
        candidates = make_candidates(vecs)
        qv = Vector.of(q)
        plain = ranked_ids(rank_similarity(qv, candidates))
        zeroed = ranked_ids(
            rank_mmr(qv, candidates, MmrParams(w_base=0.0, delta=0.0, k=len(vecs)))
        )
        if plain != zeroed:
            bad += 1
    check("mmr-reduction-law", bad == 0, f"200 instances, {bad} ordering mismatches")


def test_mmr_hand_case():
    candidates = make_candidates([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    ranked = rank_mmr(
        Vector.of([1.0, 0.0]), candidates, MmrParams(w_base=0.1, delta=0.01, k=3)
    )
    order_ok = ranked_ids(ranked) == [0, 1, 2]
    expected = [1.0, 0.89, 0.0]
    scores_ok = all(abs(rt.score - want) <= 1e-9 for rt, want in zip(ranked, expected))
    check(
        "mmr-hand-case",
        order_ok and scores_ok,
        f"order={ranked_ids(ranked)}, scores={[round(rt.score, 12) for rt in ranked]}",
    )


def test_rouge_oracle():
    alphabet = ("a", "b", "c")
    short_strings = []
    for length in range(1, 5):
        grid = [()]
        for _ in range(length):
            grid = [s + (t,) for s in grid for t in alphabet]
        short_strings.extend(grid)
    subs = {s: subsequence_set(s) for s in short_strings}

    def agree(cand: tuple[str, ...], ref: tuple[str, ...]) -> bool:
        got = rouge_l(" ".join(cand), " ".join(ref))
        lcs = max(len(s) for s in subs.get(cand, subsequence_set(cand))
                  & subs.get(ref, subsequence_set(ref)))
        precision = lcs / len(cand)
        recall = lcs / len(ref)
        f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
        return got == PRF(precision, recall, f1)

    exhaustive_bad = sum(
        0 if agree(cand, ref) else 1 for cand in short_strings for ref in short_strings
    )

    rng = random.Random(5)
    sampled_bad = 0
    for _ in range(2000):
        cand = tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
        ref = tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
        if not agree(cand, ref):
            sampled_bad += 1

    identity_ok = all(
        rouge_l(text, text).f1 == 1.0
        for text in (" ".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
                     for _ in range(50))
    )
    hand_ok = rouge_l("the cat sat", "the cat").f1 == 0.8

    check(
        "rouge-oracle",
        exhaustive_bad == 0 and sampled_bad == 0 and identity_ok and hand_ok,
        f"{len(short_strings) ** 2} exhaustive pairs (len<=4), 2000 sampled pairs (len<=12), "
        f"identity and hand case {'ok' if identity_ok and hand_ok else 'FAILED'}",
    )


STRATEGY_MATRIX = [
    ("zs", "zs", False),
    ("sim", "sim", False),
    ("ae", "ae", False),
    ("mmr", "mmr", False),
    ("sim-rr", "sim", True),
]


def tree_bytes(run_dir):
    return {
        p.relative_to(run_dir).as_posix(): p.read_bytes()
        for p in sorted(run_dir.rglob("*"))
        if p.is_file() and p.name != "config.json"
    }


def test_deterministic_end_to_end(
    dataset_path, fixtures_dir, golden_dir, tmp_path, monkeypatch
):
    def deny(*args, **kwargs):
        raise RuntimeError("network access attempted during offline run")

    monkeypatch.setattr(socket, "create_connection", deny)
    monkeypatch.setattr(socket.socket, "connect", deny)

    runner = CliRunner()
    start = time.perf_counter()
    problems = []
    for run_id, strategy, rerank in STRATEGY_MATRIX:
        trees = {}
        for label in ("x", "y"):
            out = tmp_path / label
            args = [
                "run",
                "--dataset", str(dataset_path),
                "--strategy", strategy,
                "--p", "3",
                "--mode", "replay",
                "--cassettes", str(fixtures_dir / "cassettes"),
                "--kg-fixtures", str(fixtures_dir / "kg"),
                "--out", str(out),
                "--run-id", run_id,
            ]
            if rerank:
                args.append("--rerank")
            result = runner.invoke(main, args)
            if result.exit_code != 0:
                problems.append(f"{run_id}/{label}: run exit {result.exit_code}")
                continue
            result = runner.invoke(
                main, ["eval", str(out / run_id), "--dataset", str(dataset_path)]
            )
            if result.exit_code != 0:
                problems.append(f"{run_id}/{label}: eval exit {result.exit_code}")
                continue
            trees[label] = tree_bytes(out / run_id)
        if set(trees) != {"x", "y"}:
            continue
        if trees["x"] != trees["y"]:
            problems.append(f"{run_id}: run-to-run byte drift")
        if trees["x"] != tree_bytes(golden_dir / run_id):
            problems.append(f"{run_id}: differs from committed golden")
    elapsed = time.perf_counter() - start
    check(
        "deterministic-end-to-end",
        not problems and elapsed < 30.0,
        f"5 strategies x 2 runs + eval, {elapsed:.2f}s, offline"
        + (f", problems={problems}" if problems else ""),
    )


class ArithScorer:
    """Deterministic stand-in cross-encoder for fuzzing."""

    def cross_score(self, query, passages):
        return [((sum(map(ord, p)) * 31 + len(p)) % 101) / 10.0 for p in passages]


def test_permutation_fuzz():
    rng = random.Random(77)
    scorer = ArithScorer()
    bad = []
    for trial in range(1000):
        q, vecs = random_instance(rng)
        n = len(vecs)
        candidates = make_candidates(vecs)
        qv = Vector.of(q)

        sim = rank_similarity(qv, candidates)
        if sorted(ranked_ids(sim)) != list(range(n)):
            bad.append(("sim", trial))
        if [rt.rank for rt in sim] != list(range(n)):
            bad.append(("sim-rank", trial))

        params = MmrParams(
            w_base=rng.uniform(0.0, 1.0), delta=rng.uniform(0.0, 0.1), k=n
        )
        mmr = rank_mmr(qv, candidates, params)
        if sorted(ranked_ids(mmr)) != list(range(n)):
            bad.append(("mmr", trial))

        p = rng.randint(1, n + 2)
        pool_ids = set(ranked_ids(sim)[: min(2 * p, n)])
        rr = rerank_top_p("query text", sim, p, scorer)
        rr_ids = ranked_ids(rr)
        if len(rr_ids) != min(p, len(pool_ids)) or len(set(rr_ids)) != len(rr_ids):
            bad.append(("rerank-size", trial))
        if not set(rr_ids) <= pool_ids:
            bad.append(("rerank-subset", trial))
        if [rt.rank for rt in rr] != list(range(len(rr_ids))):
            bad.append(("rerank-rank", trial))
    check(
        "permutation-fuzz",
        not bad,
        "1000 instances x {similarity, mmr, rerank}"
        + (f", violations={bad[:5]}" if bad else ""),
    )


# published sentence/word averages for the LiveQA test set:
# (sentences/question, words/question, sentences/answer, words/answer)
LIVEQA_EXPECTED = (1.15, 14.76, 6.96, 141.02)


def test_stats_fixture(tmp_path):
    rows = [
        {
            "id": "s1",
            "question": "How are you?",
            "references": ["Fine. Thanks."],
            "field": "med",
            "dataset": "hand",
        },
        {
            "id": "s2",
            "question": "Is it safe? Really?",
            "references": ["Yes it is safe.", "No. Maybe. Ask a doctor."],
            "field": "med",
            "dataset": "hand",
        },
        {
            "id": "s3",
            "question": "Take two pills daily",
            "references": ["Take with food."],
            "field": "med",
            "dataset": "hand",
        },
    ]
    dataset = tmp_path / "hand.jsonl"
    dataset.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    result = CliRunner().invoke(main, ["stats", str(dataset)])
    payload = json.loads(result.output) if result.exit_code == 0 else {}
    # hand counts: questions 1/2/1 sentences and 3/4/4 words;
    # references 2/1/3/1 sentences and 2/4/5/3 words, pooled
    expected = {
        "avg_sentences_q": (1 + 2 + 1) / 3,
        "avg_words_q": (3 + 4 + 4) / 3,
        "avg_sentences_a": (2 + 1 + 3 + 1) / 4,
        "avg_words_a": (2 + 4 + 5 + 3) / 4,
        "count": 3,
    }
    fixture_ok = result.exit_code == 0 and payload == expected

    liveqa_path = os.environ.get("KGRANK_LIVEQA_PATH")
    if liveqa_path:
        live = dataset_stats(load_dataset(liveqa_path))
        got = (live.avg_sentences_q, live.avg_words_q, live.avg_sentences_a, live.avg_words_a)
        liveqa_ok = all(
            abs(g - e) <= 0.05 * e for g, e in zip(got, LIVEQA_EXPECTED)
        )
        liveqa_note = f"LiveQA averages {tuple(round(g, 2) for g in got)} vs {LIVEQA_EXPECTED} +/-5%"
    else:
        liveqa_ok = True
        liveqa_note = "LiveQA set not supplied (KGRANK_LIVEQA_PATH unset); comparison skipped"
    check(
        "stats-fixture",
        fixture_ok and liveqa_ok,
        f"hand fixture {'exact' if fixture_ok else 'MISMATCH ' + repr(payload)}; {liveqa_note}",
    )


class PositionBiasedJudge:
    """Always prefers whichever answer is presented first."""

    def complete(self, request: CompletionRequest) -> str:
        return "Winner: A\nRationale: The first answer reads best."


class LengthJudge:
    """Prefers the longer answer slot; ties on equal length."""

    def complete(self, request: CompletionRequest) -> str:
        import re

        a = re.search(r"Answer A:\n(.*?)\n\nAnswer B:", request.prompt, re.DOTALL).group(1)
        b = re.search(r"Answer B:\n(.*?)\n\nReply with", request.prompt, re.DOTALL).group(1)
        if len(a) > len(b):
            return "Winner: A\nRationale: More complete."
        if len(b) > len(a):
            return "Winner: B\nRationale: More complete."
        return "Winner: Tie\nRationale: Equivalent answers."


def test_judge_symmetry(tmp_path):
    answers = [
        "Aspirin reduces fever.",
        "Take metformin with meals to limit stomach upset.\nDiscuss dosing with a clinician.",
        "Yes.",
    ]
    identical_ok = True
    for judge in (PositionBiasedJudge(), LengthJudge()):
        for text in answers:
            verdict = judge_pairwise("Is this safe?", text, text, judge)
            identical_ok = identical_ok and verdict.winner == "tie"

    # replaying a recorded biased judge: swapped orderings disagree -> tie
    cassette_dir = tmp_path / "judge"
    recorder = RecordingCompleter(
        PositionBiasedJudge(), Cassette(provider_kind="complete"), cassette_dir
    )
    live = judge_pairwise("Which answer is right?", "alpha", "beta", recorder)
    replayed = judge_pairwise(
        "Which answer is right?",
        "alpha",
        "beta",
        ReplayCompleter(load_cassette(cassette_dir, "complete")),
    )
    replay_ok = (
        live.winner == "tie"
        and replayed.winner == "tie"
        and "orderings disagreed" in replayed.warnings
    )
    check(
        "judge-symmetry",
        identical_ok and replay_ok,
        f"identical-answer ties {'ok' if identical_ok else 'FAILED'}; "
        f"replayed order-swap disagreement -> {replayed.winner}",
    )
