"""Error types shared across the toolchain.

Every error carries a short machine-readable ``code`` so the HTTP service
and the CLI can report failures uniformly.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .nodes import Diagnostic, SourceLocation


class RobotoError(Exception):
    """Base class for all toolchain errors."""

    code = "Error"

    def __init__(self, message: str, location: "SourceLocation | None" = None):
        super().__init__(message)
        self.message = message
        self.location = location


class ParseFailed(RobotoError):
    """Source text could not be parsed; carries the collected diagnostics."""

    code = "ParseFailed"

    def __init__(self, diagnostics: "list[Diagnostic]"):
        first = diagnostics[0] if diagnostics else None
        super().__init__(
            first.message if first else "parse failed",
            first.location if first else None,
        )
        self.diagnostics = diagnostics


class ValidationFailed(RobotoError):
    code = "ValidationFailed"

    def __init__(self, diagnostics: "list[Diagnostic]"):
        first = diagnostics[0] if diagnostics else None
        super().__init__(
            first.message if first else "validation failed",
            first.location if first else None,
        )
        self.diagnostics = diagnostics


class UnknownStrategy(RobotoError):
    code = "UnknownStrategy"


class ArityMismatch(RobotoError):
    code = "ArityMismatch"


class SessionCompleted(RobotoError):
    code = "SessionCompleted"


class MissingInput(RobotoError):
    code = "MissingInput"


class InputKindMismatch(RobotoError):
    code = "InputKindMismatch"


class AtStart(RobotoError):
    code = "AtStart"


class UnknownOrHiddenVariable(RobotoError):
    code = "UnknownOrHiddenVariable"


class LoopElementLocked(RobotoError):
    code = "LoopElementLocked"


class ScriptExhausted(RobotoError):
    code = "ScriptExhausted"


class ScriptKindMismatch(RobotoError):
    code = "ScriptKindMismatch"


class FormatVersionMismatch(RobotoError):
    code = "FormatVersionMismatch"


class CorruptPayload(RobotoError):
    code = "CorruptPayload"


class NotFound(RobotoError):
    code = "NotFound"


class BuiltinReadOnly(RobotoError):
    code = "BuiltinReadOnly"


class StaleOrdinal(RobotoError):
    code = "StaleOrdinal"
