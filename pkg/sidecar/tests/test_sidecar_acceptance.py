"""Headline behavior gates for the sidecar.

Each test prints one PASS/FAIL line. Run with:

    pytest sidecar/tests/test_sidecar_acceptance.py -rA
"""

from __future__ import annotations

import json
from pathlib import Path

import requests
from click.testing import CliRunner

from kgrank.cli import main as kgrank_main
from kgrank.providers.mock import MockCompleter, MockKnowledge
from kgrank.providers.mock_server import MockProviderServer
from kgrank.providers.protocol import (
    check_cross_score_endpoint,
    check_embed_endpoint,
    check_error_contract,
)

REPO_ROOT = Path(__file__).resolve().parents[2]
FIXTURES = REPO_ROOT / "tests" / "fixtures"


def check(name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[ACCEPTANCE] {name}: {status} ({detail})")
    assert ok, f"{name}: {detail}"


def test_protocol_conformance(live_sidecar):
    dim = check_embed_endpoint(live_sidecar.url, live_sidecar.bi_model)
    check_cross_score_endpoint(live_sidecar.url, live_sidecar.cross_model)
    check_error_contract(live_sidecar.url)
    check(
        "sidecar-protocol-conformance",
        True,
        f"embed dim {dim}; schema, ordering, and 404/400 contract checks passed",
    )


def test_identical_requests_identical_responses(live_sidecar):
    embed_body = {
        "model": live_sidecar.bi_model,
        "texts": ["insulin storage", "", "how should insulin be stored"],
    }
    cross_body = {
        "model": live_sidecar.cross_model,
        "query": "how should insulin be stored",
        "passages": ["insulin requires refrigeration", "the opera house opened in 1973"],
    }
    embed_runs = [
        requests.post(live_sidecar.url + "/v1/embed", json=embed_body, timeout=30).json()
        for _ in range(2)
    ]
    cross_runs = [
        requests.post(live_sidecar.url + "/v1/cross_score", json=cross_body, timeout=30).json()
        for _ in range(2)
    ]
    embed_delta = max(
        abs(a - b)
        for row_a, row_b in zip(embed_runs[0]["vectors"], embed_runs[1]["vectors"])
        for a, b in zip(row_a, row_b)
    )
    score_delta = max(
        abs(a - b) for a, b in zip(cross_runs[0]["scores"], cross_runs[1]["scores"])
    )
    ok = (
        embed_runs[0]["dim"] == embed_runs[1]["dim"]
        and embed_delta <= 1e-6
        and score_delta <= 1e-6
    )
    check(
        "sidecar-determinism",
        ok,
        f"repeat-request deltas: embed {embed_delta:.1e}, cross_score {score_delta:.1e} (tol 1e-6)",
    )


def test_live_run_of_five_question_fixture(live_sidecar, tmp_path):
    knowledge = MockKnowledge.from_file(FIXTURES / "mock_knowledge.json")
    embed_before = live_sidecar.embedder.calls
    cross_before = live_sidecar.scorer.calls
    with MockProviderServer(completer=MockCompleter(knowledge)) as llm:
        result = CliRunner().invoke(
            kgrank_main,
            [
                "run",
                "--dataset", str(FIXTURES / "fixture5.jsonl"),
                "--mode", "live",
                "--strategy", "sim",
                "--rerank",
                "--embed-url", live_sidecar.url,
                "--cross-url", live_sidecar.url,
                "--llm-url", llm.url,
                "--embed-model", live_sidecar.bi_model,
                "--cross-model", live_sidecar.cross_model,
                "--kg", "umls",
                "--kg-fixtures", str(FIXTURES / "kg"),
                "--out", str(tmp_path),
                "--run-id", "live-sidecar",
            ],
        )
    embed_served = live_sidecar.embedder.calls - embed_before
    cross_served = live_sidecar.scorer.calls - cross_before
    answers = sorted((tmp_path / "live-sidecar" / "answers").glob("*.json"))
    non_empty = sum(
        1 for path in answers if json.loads(path.read_text(encoding="utf-8"))["answer"]
    )
    ok = (
        result.exit_code == 0
        and "answered 5/5 questions (0 failed)" in result.output
        and len(answers) == 5
        and non_empty == 5
        and embed_served > 0
        and cross_served > 0
    )
    check(
        "sidecar-live-run",
        ok,
        f"exit {result.exit_code}; {len(answers)} answer records; "
        f"{embed_served} embed and {cross_served} cross_score requests served",
    )
