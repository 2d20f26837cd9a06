"""Prompt templates: versioned text files with `{placeholder}` slots.

Templates are data, not code: the bundled ones live under
``kgrank/templates/`` and any directory with the same filenames can be
substituted at run time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from kgrank.errors import TemplateError

TEMPLATE_NAMES = ("ner", "answer_expansion", "kg_answer", "kg_answer_mintaka")
KNOWN_PLACEHOLDERS = frozenset({"question", "triples", "answer_hint"})

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def __post_init__(self):
        if self.name not in TEMPLATE_NAMES:
            raise TemplateError(f"unknown template name {self.name!r}")

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER.findall(self.body))

    def render(self, **values: str) -> str:
        return render_body(self.body, values)


def render_body(body: str, values: dict[str, str]) -> str:
    """Substitute placeholders; any slot without a value is an error.

    Only the template body is scanned, so braces inside substituted values
    (or in the surrounding text of user questions) are left alone.
    """
    names = set(_PLACEHOLDER.findall(body))
    missing = sorted(n for n in names if n not in values)
    if missing:
        raise TemplateError(f"unresolved placeholders: {', '.join(missing)}")
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], body)


def load_template(name: str, templates_dir: str | Path | None = None) -> PromptTemplate:
    if name not in TEMPLATE_NAMES:
        raise TemplateError(f"unknown template name {name!r}")
    body = _read(f"{name}.txt", templates_dir)
    return PromptTemplate(name=name, body=body)


def load_text(filename: str, templates_dir: str | Path | None = None) -> str:
    """Raw template text for non-pipeline prompts (e.g. the judge)."""
    return _read(filename, templates_dir)


def _read(filename: str, templates_dir: str | Path | None) -> str:
    if templates_dir is not None:
        path = Path(templates_dir) / filename
        if not path.exists():
            raise TemplateError(f"template file not found: {path}")
        return path.read_text(encoding="utf-8")
    ref = resources.files("kgrank").joinpath("templates").joinpath(filename)
    try:
        return ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TemplateError(f"bundled template not found: {filename}") from None
