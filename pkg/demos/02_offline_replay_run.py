"""
Replaying a full pipeline run offline
=====================================

Answers the bundled 5-question dataset end to end without any network
access: provider calls replay from recorded cassettes and KG lookups come
from committed fixtures. Run from the repository root:
python3 demos/02_offline_replay_run.py
"""

import tempfile
from pathlib import Path

from kgrank import datasets
from kgrank.config import build_config
from kgrank.kg.client import build_kg_client
from kgrank.pipeline import run_pipeline
from kgrank.providers.factory import build_providers

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

# The same configuration the CLI would build from
#   kgrank run --dataset ... --strategy mmr --p 3 --mode replay ...
config = build_config(
    overrides={
        "dataset": str(FIXTURES / "fixture5.jsonl"),
        "strategy": "mmr",
        "p": 3,
        "mode": "replay",
        "cassettes": str(FIXTURES / "cassettes"),
        "kg_fixtures": str(FIXTURES / "kg"),
    }
)

pairs = datasets.load(config.dataset)
providers = build_providers(
    mode=config.mode,
    cassette_dir=config.cassettes,
    embed_model=config.embed_model,
    cross_model=config.cross_model,
    llm_model=config.llm_model,
)
kg = build_kg_client(config.kg, fixture_dir=config.kg_fixtures)

with tempfile.TemporaryDirectory() as scratch:
    outcome = run_pipeline(pairs, config, providers=providers, kg=kg, run_dir=scratch)

    # Each record carries full provenance: mentions, mapped concepts,
    # every ranked triple, the exact prompt, and the answer.
    for record in outcome.records:
        print(f"\n=== {record.question_id}: {record.question}")
        print(f"  mentions:  {list(record.mentions) or '(none)'}")
        print(f"  concepts:  {[c.id for c in record.concepts] or '(none)'}")
        print(f"  retrieved: {record.retrieved_count} facts, kept {len(record.selected)}")
        for warning in record.warnings:
            print(f"  warning:   {warning}")
        print(f"  answer:    {record.answer}")

    print(f"\nsummary: {outcome.summary['succeeded']}/{outcome.summary['total']} answered")
