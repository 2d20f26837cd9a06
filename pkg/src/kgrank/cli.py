"""Command-line interface.

Subcommands: run, record, eval, stats, cache. Exit codes: 0 success,
1 partial per-question failures, 2 configuration or input errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from kgrank import __version__
from kgrank.config import ANSWER_TEMPLATES, STRATEGIES, build_config
from kgrank.errors import KgRankError
from kgrank.jsonio import atomic_write_json, dumps_stable
from kgrank.kg.client import build_kg_client
from kgrank.kg.types import KG_SOURCES
from kgrank.metrics import METRIC_NAMES, evaluate_run, write_reports
from kgrank.pipeline import load_run_answers, run_pipeline
from kgrank.providers.factory import MODES, PROVIDER_BACKENDS, build_providers
from kgrank import datasets

EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_CONFIG)


@click.group()
@click.version_option(version=__version__, prog_name="kgrank")
def main():
    """Knowledge-graph-augmented question answering."""


_RUN_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file."),
    click.option("--dataset", default=None, help="JSONL dataset path."),
    click.option("--strategy", type=click.Choice(STRATEGIES), default=None),
    click.option("--rerank/--no-rerank", default=None, help="Cross-encoder re-ranking of the top pool."),
    click.option("--p", type=int, default=None, help="Triples injected into the prompt."),
    click.option("--p-pre", type=int, default=None, help="Re-ranking pool size (default 2*p)."),
    click.option("--mmr-w-base", type=float, default=None),
    click.option("--mmr-delta", type=float, default=None),
    click.option("--kg", type=click.Choice(KG_SOURCES), default=None),
    click.option("--cassettes", default=None, help="Cassette directory for record/replay."),
    click.option("--kg-fixtures", default=None, help="KG fixture directory (offline)."),
    click.option("--kg-cache", default=None, help="KG response cache directory."),
    click.option("--out", default=None, help="Parent directory for run output."),
    click.option("--parallelism", type=int, default=None),
    click.option("--run-id", default=None),
    click.option("--backend", type=click.Choice(PROVIDER_BACKENDS), default=None),
    click.option("--embed-url", default=None),
    click.option("--cross-url", default=None),
    click.option("--llm-url", default=None),
    click.option("--embed-model", default=None),
    click.option("--cross-model", default=None),
    click.option("--llm-model", default=None),
    click.option("--temperature", type=float, default=None),
    click.option("--max-tokens", type=int, default=None),
    click.option("--answer-template", type=click.Choice(ANSWER_TEMPLATES), default=None),
    click.option("--mock-knowledge", default=None, help="Lookup table for the mock backend."),
    click.option("--retrieval-cap", type=int, default=None),
]


def _with_run_options(fn):
    for option in reversed(_RUN_OPTIONS):
        fn = option(fn)
    return fn


def _execute_run(config_path, overrides) -> None:
    try:
        config = build_config(config_file=config_path, overrides=overrides)
    except KgRankError as exc:
        _fail(str(exc))
    if not config.dataset:
        _fail("no dataset given (use --dataset or the config file)")
    try:
        pairs = datasets.load(config.dataset)
    except KgRankError as exc:
        _fail(str(exc))
    try:
        providers = build_providers(
            mode=config.mode,
            backend=config.backend,
            cassette_dir=config.cassettes,
            embed_url=config.embed_url,
            cross_url=config.cross_url,
            llm_url=config.llm_url,
            embed_model=config.embed_model,
            cross_model=config.cross_model,
            llm_model=config.llm_model,
            mock_knowledge=config.mock_knowledge,
        )
        kg = None
        if config.strategy != "zs":
            kg = build_kg_client(
                config.kg, cache_dir=config.kg_cache, fixture_dir=config.kg_fixtures
            )
    except KgRankError as exc:
        _fail(str(exc))

    run_dir = Path(config.out) / config.resolved_run_id()
    run_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_json(run_dir / "config.json", config.to_dict())
    outcome = run_pipeline(pairs, config, providers=providers, kg=kg, run_dir=run_dir)
    for failure in outcome.summary["failures"]:
        click.echo(
            f"failed {failure['id']} at stage {failure['stage']}: {failure['error']}", err=True
        )
    summary = outcome.summary
    click.echo(
        f"answered {summary['succeeded']}/{summary['total']} questions "
        f"({summary['failed']} failed) -> {run_dir}"
    )
    if summary["failed"]:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.option("--mode", type=click.Choice(MODES), default=None)
@_with_run_options
def run(config_path, mode, **overrides):
    """Answer every question in a dataset."""
    overrides["mode"] = mode
    _execute_run(config_path, overrides)


@main.command()
@_with_run_options
def record(config_path, **overrides):
    """Run live and capture provider cassettes for later replay."""
    overrides["mode"] = "record"
    if not overrides.get("cassettes"):
        _fail("record requires --cassettes")
    _execute_run(config_path, overrides)


@main.command()
@click.argument("run_dir", type=click.Path())
@click.option("--dataset", required=True, help="JSONL dataset with reference answers.")
@click.option(
    "--metrics",
    default="rouge_1,rouge_2,rouge_l",
    show_default=True,
    help=f"Comma-separated subset of {', '.join(METRIC_NAMES)}.",
)
def eval(run_dir, dataset, metrics):
    """Score a finished run against reference answers."""
    metric_set = tuple(m.strip() for m in metrics.split(",") if m.strip())
    try:
        answers = load_run_answers(run_dir)
        pairs = datasets.load(dataset)
        report = evaluate_run(answers, pairs, metric_set)
    except KgRankError as exc:
        _fail(str(exc))
    write_reports(report, answers, pairs, run_dir)
    for metric in metric_set:
        corpus = report["corpus"][metric]
        click.echo(
            f"{metric}: f1={corpus['f1']:.4f} "
            f"precision={corpus['precision']:.4f} recall={corpus['recall']:.4f}"
        )


@main.command()
@click.argument("dataset_file", type=click.Path())
@click.option("--field", default=None, help="Keep only pairs with this field tag.")
@click.option("--dataset-name", default=None, help="Keep only pairs from this dataset.")
@click.option("--out", type=click.Path(), default=None, help="Also write the stats as JSON here.")
def stats(dataset_file, field, dataset_name, out):
    """Average sentence and word counts for questions and references."""
    try:
        pairs = datasets.load(dataset_file, dataset=dataset_name, field=field)
        result = datasets.stats(pairs)
    except KgRankError as exc:
        _fail(str(exc))
    payload = result.to_dict()
    payload["count"] = len(pairs)
    click.echo(dumps_stable(payload), nl=False)
    if out:
        atomic_write_json(out, payload)


@main.group()
def cache():
    """Inspect or clear the knowledge-graph response cache."""


@cache.command("inspect")
@click.option("--dir", "directory", required=True, type=click.Path())
def cache_inspect(directory):
    """Entry counts and sizes per KG source."""
    root = Path(directory)
    if not root.is_dir():
        _fail(f"cache directory not found: {root}")
    payload = {}
    for source_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(source_dir.glob("*.json"))
        payload[source_dir.name] = {
            "entries": len(files),
            "bytes": sum(f.stat().st_size for f in files),
        }
    click.echo(dumps_stable(payload), nl=False)


@cache.command("clear")
@click.option("--dir", "directory", required=True, type=click.Path())
@click.option("--source", type=click.Choice(KG_SOURCES), default=None, help="Only this source.")
def cache_clear(directory, source):
    """Delete cached KG responses."""
    root = Path(directory)
    if not root.is_dir():
        _fail(f"cache directory not found: {root}")
    sources = [source] if source else [p.name for p in sorted(root.iterdir()) if p.is_dir()]
    removed = 0
    for name in sources:
        for path in sorted((root / name).glob("*.json")):
            path.unlink()
            removed += 1
    click.echo(f"removed {removed} cached entries")


if __name__ == "__main__":
    main()
