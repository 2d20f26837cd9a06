"""Run configuration: defaults, config-file loading, and flag precedence.

Precedence is flags > config file > built-in defaults. The effective
config is echoed into the run directory, and the snapshot embedded in each
answer record covers only the knobs that affect the answer itself, so
replayed runs stay byte-identical regardless of where their outputs live.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from kgrank.errors import ConfigError
from kgrank.kg.client import DEFAULT_RETRIEVAL_CAP
from kgrank.kg.types import KG_SOURCES
from kgrank.providers.factory import MODES, PROVIDER_BACKENDS
from kgrank.ranking import DEFAULT_MMR_DELTA, DEFAULT_MMR_W_BASE, DEFAULT_TOP_P

STRATEGIES = ("zs", "sim", "ae", "mmr")
ANSWER_TEMPLATES = ("kg_answer", "kg_answer_mintaka")

DEFAULT_EMBED_MODEL = "GanjinZero/UMLSBert_ENG"
DEFAULT_CROSS_MODEL = "ncbi/MedCPT-Cross-Encoder"
DEFAULT_LLM_MODEL = "gpt-4"


@dataclasses.dataclass(frozen=True)
class RunConfig:
    dataset: str | None = None
    kg: str = "umls"
    strategy: str = "sim"
    rerank: bool = False
    p: int = DEFAULT_TOP_P
    p_pre: int | None = None
    mmr_w_base: float = DEFAULT_MMR_W_BASE
    mmr_delta: float = DEFAULT_MMR_DELTA
    mode: str = "replay"
    backend: str = "http"
    cassettes: str | None = None
    kg_fixtures: str | None = None
    kg_cache: str | None = None
    out: str = "runs"
    run_id: str | None = None
    parallelism: int = 1
    embed_url: str | None = None
    cross_url: str | None = None
    llm_url: str | None = None
    embed_model: str = DEFAULT_EMBED_MODEL
    cross_model: str = DEFAULT_CROSS_MODEL
    llm_model: str = DEFAULT_LLM_MODEL
    temperature: float = 0.0
    max_tokens: int = 1024
    answer_template: str = "kg_answer"
    mock_knowledge: str | None = None
    retrieval_cap: int = DEFAULT_RETRIEVAL_CAP

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.kg not in KG_SOURCES:
            raise ConfigError(f"kg must be one of {KG_SOURCES}, got {self.kg!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.backend not in PROVIDER_BACKENDS:
            raise ConfigError(f"backend must be one of {PROVIDER_BACKENDS}")
        if self.answer_template not in ANSWER_TEMPLATES:
            raise ConfigError(f"answer_template must be one of {ANSWER_TEMPLATES}")
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if self.p_pre is not None and self.p_pre < 1:
            raise ConfigError("p_pre must be >= 1")
        if self.mmr_w_base < 0 or self.mmr_delta < 0:
            raise ConfigError("mmr weights must be >= 0")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")
        if self.retrieval_cap < 1:
            raise ConfigError("retrieval_cap must be >= 1")

    @property
    def pool_size(self) -> int:
        """Cross-encoder candidate pool; 2*p unless set explicitly."""
        return self.p_pre if self.p_pre is not None else 2 * self.p

    def resolved_run_id(self) -> str:
        if self.run_id:
            return self.run_id
        return f"{self.strategy}-rr" if self.rerank else self.strategy

    def snapshot(self) -> dict:
        """The answer-affecting knobs only; execution details (mode, paths,
        parallelism) are excluded on purpose."""
        return {
            "strategy": self.strategy,
            "rerank": self.rerank,
            "p": self.p,
            "pool_size": self.pool_size,
            "mmr_w_base": self.mmr_w_base,
            "mmr_delta": self.mmr_delta,
            "kg": self.kg,
            "answer_template": self.answer_template,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "embed_model": self.embed_model,
            "cross_model": self.cross_model,
            "llm_model": self.llm_model,
            "retrieval_cap": self.retrieval_cap,
        }

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES: dict[str, dict] = {
    "dataset": {"type": ["string", "null"]},
    "kg": {"enum": list(KG_SOURCES)},
    "strategy": {"enum": list(STRATEGIES)},
    "rerank": {"type": "boolean"},
    "p": {"type": "integer", "minimum": 1},
    "p_pre": {"type": ["integer", "null"], "minimum": 1},
    "mmr_w_base": {"type": "number", "minimum": 0},
    "mmr_delta": {"type": "number", "minimum": 0},
    "mode": {"enum": list(MODES)},
    "backend": {"enum": list(PROVIDER_BACKENDS)},
    "cassettes": {"type": ["string", "null"]},
    "kg_fixtures": {"type": ["string", "null"]},
    "kg_cache": {"type": ["string", "null"]},
    "out": {"type": "string"},
    "run_id": {"type": ["string", "null"]},
    "parallelism": {"type": "integer", "minimum": 1},
    "embed_url": {"type": ["string", "null"]},
    "cross_url": {"type": ["string", "null"]},
    "llm_url": {"type": ["string", "null"]},
    "embed_model": {"type": "string"},
    "cross_model": {"type": "string"},
    "llm_model": {"type": "string"},
    "temperature": {"type": "number", "minimum": 0},
    "max_tokens": {"type": "integer", "minimum": 1},
    "answer_template": {"enum": list(ANSWER_TEMPLATES)},
    "mock_knowledge": {"type": ["string", "null"]},
    "retrieval_cap": {"type": "integer", "minimum": 1},
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": _FIELD_TYPES,
    "additionalProperties": False,
}


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config file {path}: {exc.message}") from exc
    return data


def build_config(
    *,
    config_file: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Merge built-in defaults, a config file, and explicit overrides, in
    increasing precedence. Override values of None mean "not given"."""
    merged: dict[str, Any] = {}
    if config_file is not None:
        merged.update(load_config_file(config_file))
    if overrides:
        known = {f.name for f in dataclasses.fields(RunConfig)}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is not None:
                merged[key] = value
    return RunConfig(**merged)
