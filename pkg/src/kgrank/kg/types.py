"""Knowledge-graph domain types."""

from __future__ import annotations

from dataclasses import dataclass

from kgrank.errors import ValidationError

KG_SOURCES = ("umls", "dbpedia")


@dataclass(frozen=True)
class ConceptRef:
    """A resolved KG entity: identifier, display name, source vocabulary."""

    id: str
    preferred_name: str
    source: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("concept id must be non-empty")
        if self.source not in KG_SOURCES:
            raise ValidationError(f"unknown kg source {self.source!r}")

    def to_dict(self) -> dict:
        return {"id": self.id, "preferred_name": self.preferred_name, "source": self.source}

    @classmethod
    def from_dict(cls, data: dict) -> "ConceptRef":
        return cls(id=data["id"], preferred_name=data["preferred_name"], source=data["source"])


@dataclass(frozen=True)
class Triple:
    """One KG fact (head, relation, tail) with source attribution."""

    head: ConceptRef
    relation: str
    tail: ConceptRef
    source: str

    def __post_init__(self):
        if not self.relation:
            raise ValidationError("triple relation must be non-empty")
        if not (self.head.source == self.tail.source == self.source):
            raise ValidationError(
                f"triple endpoints must match source {self.source!r}: "
                f"head={self.head.source}, tail={self.tail.source}"
            )

    def key(self) -> tuple[str, str, str]:
        """Identity used for deduplication."""
        return (self.head.id, self.relation, self.tail.id)

    def to_dict(self) -> dict:
        return {
            "head": self.head.to_dict(),
            "relation": self.relation,
            "tail": self.tail.to_dict(),
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Triple":
        return cls(
            head=ConceptRef.from_dict(data["head"]),
            relation=data["relation"],
            tail=ConceptRef.from_dict(data["tail"]),
            source=data["source"],
        )
