"""Exception hierarchy. Every domain failure derives from AcForgeError so the
CLI can map it to exit code 1; anything else is a bug."""

from __future__ import annotations


class AcForgeError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(AcForgeError):
    """An invariant, precondition, or input format was violated."""


class NotFoundError(AcForgeError):
    """A referenced id or file does not exist in the case directory."""


class AlreadyExistsError(AcForgeError):
    """An id is already taken and overwriting was not requested."""


class StillReferencedError(AcForgeError):
    """Deletion refused because other stored objects reference the id."""


class ExportBlockedError(AcForgeError):
    """Export refused because validation reported errors."""
