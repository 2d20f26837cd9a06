"""Loaded-model bookkeeping: model id to (kind, handle).

Every request names a model id; only ids registered at startup are
served, and an id answers only for the role it was loaded as. Anything
else is rejected, which the HTTP layer maps to 404.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from kgrank_sidecar.encoders import load_bi_encoder, load_cross_encoder
from kgrank_sidecar.errors import ModelLoadError, UnknownModelError

KINDS = ("bi_encoder", "cross_encoder")


@dataclass(frozen=True)
class RegisteredModel:
    model_id: str
    kind: str
    handle: Any


class ModelRegistry:
    """Models available to serve; requests for anything else are rejected."""

    def __init__(self):
        self._models: dict[str, RegisteredModel] = {}

    def register(self, model_id: str, kind: str, handle: Any) -> None:
        if kind not in KINDS:
            raise ModelLoadError(f"kind must be one of {KINDS}, got {kind!r}")
        if not model_id:
            raise ModelLoadError("model id must be non-empty")
        if model_id in self._models:
            # Resolution is by id alone, so one id cannot serve two roles.
            raise ModelLoadError(f"model id {model_id!r} is already registered")
        self._models[model_id] = RegisteredModel(model_id, kind, handle)

    def resolve(self, model_id: str, kind: str) -> Any:
        entry = self._models.get(model_id)
        if entry is None or entry.kind != kind:
            raise UnknownModelError(f"no {kind} named {model_id!r} is loaded")
        return entry.handle

    def loaded(self) -> list[dict]:
        return [
            {"model": entry.model_id, "kind": entry.kind}
            for entry in sorted(self._models.values(), key=lambda entry: entry.model_id)
        ]


def build_registry(bi_encoder: str, cross_encoder: str, device: str = "cpu") -> ModelRegistry:
    """Load the two configured models and register them under their ids."""
    registry = ModelRegistry()
    registry.register(bi_encoder, "bi_encoder", load_bi_encoder(bi_encoder, device=device))
    registry.register(
        cross_encoder, "cross_encoder", load_cross_encoder(cross_encoder, device=device)
    )
    return registry
