"""Start the sidecar: load two models, then serve the wire protocol."""

from __future__ import annotations

import sys

import click
import uvicorn

from kgrank_sidecar import __version__
from kgrank_sidecar.app import create_app
from kgrank_sidecar.errors import SidecarError
from kgrank_sidecar.registry import build_registry

DEFAULT_BI_ENCODER = "GanjinZero/UMLSBert_ENG"
DEFAULT_CROSS_ENCODER = "ncbi/MedCPT-Cross-Encoder"


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="kgrank-sidecar")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option(
    "--bi-encoder",
    "bi_encoder",
    default=DEFAULT_BI_ENCODER,
    show_default=True,
    help="Embedding model id; hashed/bi-<dim> serves hashed features without weights.",
)
@click.option(
    "--cross-encoder",
    "cross_encoder",
    default=DEFAULT_CROSS_ENCODER,
    show_default=True,
    help="Relevance model id; overlap/cross serves word overlap without weights.",
)
@click.option("--device", default="cpu", show_default=True, help="Torch device for transformer backends.")
def main(host: str, port: int, bi_encoder: str, cross_encoder: str, device: str) -> None:
    """Serve /v1/embed and /v1/cross_score for the configured models."""
    try:
        registry = build_registry(bi_encoder, cross_encoder, device=device)
    except SidecarError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for entry in registry.loaded():
        click.echo(f"loaded {entry['kind']}: {entry['model']}")
    uvicorn.run(create_app(registry), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
