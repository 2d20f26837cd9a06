"""Regenerate the committed test fixtures from scratch.

Produces, under tests/fixtures/:
  - fixture5.jsonl           five-question dataset (four medical, one general)
  - mock_knowledge.json      lookup tables for the deterministic mock providers
  - kg/umls/*.json           KG fixtures in the response-cache layout
  - cassettes/*.json         provider cassettes covering every strategy
  - golden/<run_id>/...      frozen replay outputs and evaluation reports

Run from the repository root:  python3 scripts/regen_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from kgrank.config import build_config  # noqa: E402
from kgrank.kg.cache import write_fixture  # noqa: E402
from kgrank.kg.client import build_kg_client  # noqa: E402
from kgrank.kg.umls import UmlsBackend  # noqa: E402
from kgrank.metrics import evaluate_run, write_reports  # noqa: E402
from kgrank.pipeline import load_run_answers, run_pipeline  # noqa: E402
from kgrank.providers.factory import build_providers  # noqa: E402
from kgrank import datasets  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

DATASET_ROWS = [
    {
        "id": "q1",
        "question": "Can high blood sugar cause nearsightedness?",
        "references": [
            "High blood sugar can cause temporary nearsightedness by changing the lens shape.",
            "Yes. Hyperglycemia can induce a transient myopic shift.",
        ],
        "field": "med",
        "dataset": "fixture",
    },
    {
        "id": "q2",
        "question": "How should metformin be taken with meals?",
        "references": [
            "Metformin is usually taken with meals to reduce gastrointestinal side effects.",
        ],
        "field": "med",
        "dataset": "fixture",
    },
    {
        "id": "q3",
        "question": "What are the common symptoms of influenza?",
        "references": [
            "Common flu symptoms include fever, cough, sore throat, body aches, and fatigue.",
        ],
        "field": "med",
        "dataset": "fixture",
    },
    {
        "id": "q4",
        "question": "Is aspirin safe for children with a fever?",
        "references": [
            "Children with a fever should not take aspirin because of the risk of Reye syndrome.",
        ],
        "field": "med",
        "dataset": "fixture",
    },
    {
        "id": "q5",
        "question": "What city hosted the 1900 Summer Olympics?",
        "references": ["Paris"],
        "field": "gen",
        "dataset": "fixture",
    },
]

MOCK_KNOWLEDGE = {
    "entities": {
        "Can high blood sugar cause nearsightedness?": ["hyperglycemia", "myopia"],
        "How should metformin be taken with meals?": ["metformin"],
        "What are the common symptoms of influenza?": ["influenza"],
        "Is aspirin safe for children with a fever?": ["aspirin", "fever"],
        "What city hosted the 1900 Summer Olympics?": [],
    },
    "drafts": {
        "Can high blood sugar cause nearsightedness?": (
            "Acute hyperglycemia can cause lens swelling and a temporary myopic shift."
        ),
        "How should metformin be taken with meals?": (
            "Metformin is taken with food to limit gastrointestinal upset."
        ),
        "What are the common symptoms of influenza?": (
            "Influenza typically presents with fever, cough, sore throat, myalgia, and fatigue."
        ),
        "Is aspirin safe for children with a fever?": (
            "Aspirin in febrile children is associated with Reye syndrome and should be avoided."
        ),
        "What city hosted the 1900 Summer Olympics?": (
            "The 1900 Summer Olympics were held in Paris, France."
        ),
    },
    "answers": {
        "Can high blood sugar cause nearsightedness?": (
            "High blood sugar can change the shape of the lens and cause temporary "
            "nearsightedness, which usually resolves once glucose is controlled."
        ),
        "How should metformin be taken with meals?": (
            "Metformin should be taken with meals to reduce stomach upset."
        ),
        "What are the common symptoms of influenza?": (
            "Influenza commonly causes fever, cough, sore throat, and muscle aches."
        ),
        "Is aspirin safe for children with a fever?": (
            "Aspirin is not recommended for children with a fever because of the risk "
            "of Reye syndrome."
        ),
        "What city hosted the 1900 Summer Olympics?": "Paris.",
    },
}

# CUI, preferred name, and one-hop relation rows in upstream response shape.
CONCEPTS = {
    "hyperglycemia": ("C0020456", "Hyperglycemia"),
    "myopia": ("C0027092", "Myopia"),
    "metformin": ("C0025598", "Metformin"),
    "influenza": ("C0021400", "Influenza"),
    "aspirin": ("C0004057", "Aspirin"),
    "fever": ("C0015967", "Fever"),
}

CUI_URL = "https://uts-ws.nlm.nih.gov/rest/content/current/CUI"

RELATION_ROWS = {
    "C0020456": [
        ("clinically_associated_with", "C0027092", "Myopia"),
        ("associated_finding_of", "C0011849", "Diabetes Mellitus"),
        # relationLabel-only row: exercises the label fallback
        ("", "C0085602", "Polydipsia"),
        # self-loop row: must be skipped by the parser
        ("related_to", "C0020456", "Hyperglycemia"),
    ],
    "C0027092": [
        ("clinically_associated_with", "C0020456", "HYPERGLYCEMIA"),
        ("isa", "C0034951", "Refractive Errors"),
        ("may_be_treated_by", "C0042905", "Corrective Lenses"),
    ],
    "C0025598": [
        ("may_treat", "C0011860", "Diabetes Mellitus, Non-Insulin-Dependent"),
        ("isa", "C0005996", "Biguanides"),
        ("has_contraindicated_finding", "C0022658", "Kidney Diseases"),
    ],
    "C0021400": [
        ("associated_with", "C0015967", "Fever"),
        ("has_finding_site", "C0024109", "Lung"),
        ("isa", "C0042769", "Virus Diseases"),
    ],
    "C0004057": [
        ("may_treat", "C0015967", "Fever"),
        ("may_treat", "C0018681", "Headache"),
        ("induces", "C0035021", "Reye Syndrome"),
    ],
    "C0015967": [
        ("associated_finding_of", "C0021400", "Influenza"),
        ("may_be_treated_by", "C0004057", "Aspirin"),
    ],
}

STRATEGY_RUNS = [
    # (run_id, strategy, rerank)
    ("zs", "zs", False),
    ("sim", "sim", False),
    ("ae", "ae", False),
    ("mmr", "mmr", False),
    ("sim-rr", "sim", True),
]


def search_response(rows: list[tuple[str, str, float | None]]) -> dict:
    results = []
    for ui, name, score in rows:
        item = {"ui": ui, "name": name, "rootSource": "MTH", "uri": f"{CUI_URL}/{ui}"}
        if score is not None:
            item["score"] = score
        results.append(item)
    if not results:
        results = [{"ui": "NONE", "name": "NO RESULTS"}]
    return {
        "pageSize": 25,
        "pageNumber": 1,
        "result": {"classType": "searchResults", "results": results},
    }


def relations_response(rows: list[tuple[str, str, str]]) -> dict:
    result = []
    for i, (additional, related_cui, related_name) in enumerate(rows, start=1):
        result.append(
            {
                "ui": f"R{i:07d}",
                "relationLabel": "RO",
                "additionalRelationLabel": additional,
                "relatedId": f"{CUI_URL}/{related_cui}",
                "relatedIdName": related_name,
            }
        )
    return {"pageSize": 100, "pageNumber": 1, "pageCount": 1, "result": result}


def write_dataset() -> Path:
    path = FIXTURES / "fixture5.jsonl"
    lines = [json.dumps(row, sort_keys=True, ensure_ascii=False) for row in DATASET_ROWS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_mock_knowledge() -> Path:
    path = FIXTURES / "mock_knowledge.json"
    path.write_text(
        json.dumps(MOCK_KNOWLEDGE, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def write_kg_fixtures(kg_dir: Path) -> None:
    backend = UmlsBackend()
    for mention, (cui, name) in CONCEPTS.items():
        rows = [(cui, name, None)]
        if mention == "aspirin":
            # scored rows: exercises the explicit-score ranking path
            rows = [(cui, name, 9.1), ("C0004058", "Aspirin Allergy", 4.0)]
        write_fixture(kg_dir, backend.search_descriptor(mention), search_response(rows))
        write_fixture(
            kg_dir,
            backend.relations_descriptor(cui, 1),
            relations_response(RELATION_ROWS[cui]),
        )
    # a mention with no hits at all
    write_fixture(kg_dir, backend.search_descriptor("zzqx-nonsense-token"), search_response([]))


def base_overrides(dataset: Path, run_id: str, strategy: str, rerank: bool) -> dict:
    return {
        "dataset": str(dataset),
        "strategy": strategy,
        "rerank": rerank,
        "run_id": run_id,
        "p": 3,
        "kg": "umls",
        "kg_fixtures": str(FIXTURES / "kg"),
        "cassettes": str(FIXTURES / "cassettes"),
        "mock_knowledge": str(FIXTURES / "mock_knowledge.json"),
    }


def record_cassettes(dataset: Path) -> None:
    pairs = datasets.load(dataset)
    with tempfile.TemporaryDirectory() as scratch:
        for run_id, strategy, rerank in STRATEGY_RUNS:
            overrides = base_overrides(dataset, run_id, strategy, rerank)
            overrides.update({"mode": "record", "backend": "mock"})
            config = build_config(overrides=overrides)
            providers = build_providers(
                mode="record",
                backend="mock",
                cassette_dir=config.cassettes,
                embed_model=config.embed_model,
                cross_model=config.cross_model,
                llm_model=config.llm_model,
                mock_knowledge=config.mock_knowledge,
            )
            kg = build_kg_client(config.kg, fixture_dir=config.kg_fixtures)
            outcome = run_pipeline(
                pairs, config, providers=providers, kg=kg, run_dir=Path(scratch) / run_id
            )
            if outcome.failures:
                raise RuntimeError(f"recording {run_id} failed: {outcome.failures}")


def freeze_goldens(dataset: Path) -> None:
    pairs = datasets.load(dataset)
    golden_root = FIXTURES / "golden"
    for run_id, strategy, rerank in STRATEGY_RUNS:
        overrides = base_overrides(dataset, run_id, strategy, rerank)
        overrides["mode"] = "replay"
        config = build_config(overrides=overrides)
        providers = build_providers(
            mode="replay",
            cassette_dir=config.cassettes,
            embed_model=config.embed_model,
            cross_model=config.cross_model,
            llm_model=config.llm_model,
        )
        kg = build_kg_client(config.kg, fixture_dir=config.kg_fixtures)
        run_dir = golden_root / run_id
        outcome = run_pipeline(pairs, config, providers=providers, kg=kg, run_dir=run_dir)
        if outcome.failures:
            raise RuntimeError(f"golden {run_id} failed: {outcome.failures}")
        answers = load_run_answers(run_dir)
        report = evaluate_run(answers, pairs, ("rouge_1", "rouge_2", "rouge_l"))
        write_reports(report, answers, pairs, run_dir)


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for stale in ("kg", "cassettes", "golden"):
        shutil.rmtree(FIXTURES / stale, ignore_errors=True)
    dataset = write_dataset()
    write_mock_knowledge()
    write_kg_fixtures(FIXTURES / "kg")
    record_cassettes(dataset)
    freeze_goldens(dataset)
    print(f"fixtures regenerated under {FIXTURES}")


if __name__ == "__main__":
    main()
