"""Error taxonomy: startup failures vs per-request rejections."""

from __future__ import annotations


class SidecarError(Exception):
    """Base class for all sidecar errors."""


class ModelLoadError(SidecarError):
    """A configured model id could not be turned into a working backend."""


class UnknownModelError(SidecarError):
    """A request referenced a model id that is not loaded for that role."""
