"""Exception hierarchy shared across the package."""

from __future__ import annotations


class KgRankError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KgRankError):
    """Invalid or inconsistent run configuration."""


class ValidationError(KgRankError):
    """A value violated a documented invariant."""


class ProviderError(KgRankError):
    """A model provider failed in a non-retryable way."""


class RetryableProviderError(ProviderError):
    """Transport-level failure (connection, timeout, 429) after retries."""


class ProtocolError(ProviderError):
    """Provider returned a malformed or inconsistent payload."""


class EmptyCompletionError(ProviderError):
    """The completion provider returned empty text."""


class CassetteMissError(ProviderError):
    """Replay mode was asked for a request that was never recorded."""


class KgError(KgRankError):
    """Knowledge-graph backend failure."""


class KgNotFoundError(KgError):
    """Concept id unknown to the backend."""


class KgFixtureMissError(KgError):
    """Fixture mode was asked for a request with no fixture on disk."""


class TemplateError(KgRankError):
    """Prompt template could not be rendered."""


class DatasetError(KgRankError):
    """Dataset file missing, empty, or malformed."""


class EvaluationError(KgRankError):
    """Evaluation inputs were inconsistent (e.g. unknown question ids)."""


class StageError(KgRankError):
    """A pipeline stage failed; carries stage attribution."""

    def __init__(self, stage: str, message: str, cause: Exception | None = None):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r}: {message}")
