"""AST node types for the Roboto strategy language.

All nodes are frozen dataclasses.  Source locations (and the raw source
text on the document) are excluded from equality so that structural
comparisons work across reformatting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class SourceLocation:
    line: int  # 1-based
    column: int  # 1-based
    file: str = "<input>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


SYNTHETIC = SourceLocation(1, 1, "<generated>")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: SourceLocation

    def __str__(self) -> str:
        return (
            f"{self.location.file}:{self.location.line}:{self.location.column} "
            f"{self.severity} {self.code} {self.message}"
        )


# --- query and action parts -------------------------------------------------


@dataclass(frozen=True)
class Word:
    text: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class EmbeddedCall:
    target: str
    args: tuple[str, ...]


QueryPart = Union[Word, VarRef, EmbeddedCall]
ActionPart = Union[Word, VarRef]


@dataclass(frozen=True)
class Query:
    parts: tuple[QueryPart, ...]

    def embedded_call(self) -> EmbeddedCall | None:
        for part in self.parts:
            if isinstance(part, EmbeddedCall):
                return part
        return None

    def is_nothing_literal(self) -> bool:
        """True for the distinguished sentinel query consisting of the single word ``nothing``."""
        return (
            len(self.parts) == 1
            and isinstance(self.parts[0], Word)
            and self.parts[0].text.lower() == "nothing"
        )

    def sole_ref(self) -> str | None:
        """Name of the referenced variable when the query is exactly one reference."""
        if len(self.parts) == 1 and isinstance(self.parts[0], VarRef):
            return self.parts[0].name
        return None

    def refs(self) -> list[str]:
        names = [p.name for p in self.parts if isinstance(p, VarRef)]
        call = self.embedded_call()
        if call is not None:
            names.extend(call.args)
        return names


# --- statements ---------------------------------------------------------------


@dataclass(frozen=True)
class Action:
    words: tuple[ActionPart, ...]
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class Call:
    target: str
    args: tuple[str, ...]
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class Conditional:
    query: Query
    block: tuple["Statement", ...]
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class ForEach:
    element_var: str
    list_var: str
    block: tuple["Statement", ...]
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class Until:
    query: Query
    block: tuple["Statement", ...]
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class Assignment:
    target: str
    query: Query
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class Return:
    query: Query
    comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


Statement = Union[Action, Call, Conditional, ForEach, Until, Assignment, Return]

BLOCK_KINDS = (Conditional, ForEach, Until)

KIND_NAMES: dict[type, str] = {
    Action: "action",
    Call: "call",
    Conditional: "conditional",
    ForEach: "foreach",
    Until: "until",
    Assignment: "assignment",
    Return: "return",
}


def kind_name(stmt: Statement) -> str:
    return KIND_NAMES[type(stmt)]


def block_of(stmt: Statement) -> tuple[Statement, ...] | None:
    if isinstance(stmt, BLOCK_KINDS):
        return stmt.block
    return None


@dataclass(frozen=True)
class Strategy:
    name: str
    params: tuple[str, ...]
    body: tuple[Statement, ...]
    leading_comment: str | None = None
    location: SourceLocation = field(default=SYNTHETIC, compare=False)


@dataclass(frozen=True)
class StrategyDoc:
    strategies: tuple[Strategy, ...]
    source_text: str = field(default="", compare=False)
    file: str = field(default="<input>", compare=False)

    def names(self) -> list[str]:
        return [s.name for s in self.strategies]

    def strategy(self, name: str) -> Strategy | None:
        for s in self.strategies:
            if s.name == name:
                return s
        return None
