"""Exception hierarchy shared across the package.

Every error raised on a contract boundary derives from LensError so callers
(CLI, service) can map failures to machine-readable payloads uniformly.
"""
from __future__ import annotations

from typing import Any


class LensError(Exception):
    """Base class for all package errors."""

    def to_dict(self) -> dict[str, Any]:
        return {"type": type(self).__name__, "message": str(self)}


class ParseError(LensError):
    """Input text or JSON does not match the expected format."""


class ValidationError(LensError):
    """Structurally parseable input violates an invariant."""


class SecurityError(LensError):
    """Input references paths outside the allowed root."""


class ApplyError(LensError):
    """A diff hunk does not apply cleanly to its pre-image."""

    def __init__(self, message: str, path: str | None = None, hunk_index: int | None = None):
        super().__init__(message)
        self.path = path
        self.hunk_index = hunk_index

    def to_dict(self) -> dict[str, Any]:
        out = super().to_dict()
        if self.path is not None:
            out["path"] = self.path
        if self.hunk_index is not None:
            out["hunk_index"] = self.hunk_index
        return out


class BinaryFileError(LensError):
    """A session touches a file that is not line-oriented text."""


class ContractError(LensError):
    """An operation was invoked outside its stated precondition."""


class NotFoundError(LensError):
    """A referenced artifact, session, or record does not exist."""


class RangeError(LensError):
    """A line range does not resolve within its artifact."""


class BudgetError(LensError):
    """A prompt cannot be reduced to fit the token budget."""


class GenerationError(LensError):
    """The generation backend failed to produce a valid document."""

    def __init__(self, message: str, transcripts: list[Any] | None = None, partial: Any = None):
        super().__init__(message)
        self.transcripts = transcripts or []
        self.partial = partial
