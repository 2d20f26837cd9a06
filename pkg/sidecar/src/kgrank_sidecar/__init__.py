"""Inference sidecar for the kgrank provider wire protocol."""

__version__ = "0.1.0"

from kgrank_sidecar.app import create_app
from kgrank_sidecar.encoders import load_bi_encoder, load_cross_encoder
from kgrank_sidecar.registry import ModelRegistry, build_registry

__all__ = [
    "ModelRegistry",
    "build_registry",
    "create_app",
    "load_bi_encoder",
    "load_cross_encoder",
]
