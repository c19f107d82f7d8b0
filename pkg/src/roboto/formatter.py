"""Canonical formatter for strategy documents.

Canonical form: uppercase keywords, quoted identifier references
everywhere the grammar allows them, one tab per indentation level,
comments on their own lines directly above their statement, and one
blank line between strategies.  Formatting is idempotent.
"""

from __future__ import annotations

import hashlib

from .nodes import (
    Action,
    Assignment,
    Call,
    Conditional,
    EmbeddedCall,
    ForEach,
    Query,
    Return,
    Statement,
    Strategy,
    StrategyDoc,
    Until,
    VarRef,
    Word,
)


def _ref(name: str) -> str:
    return f"'{name}'"


def _query_text(query: Query) -> str:
    pieces = []
    for part in query.parts:
        if isinstance(part, Word):
            pieces.append(part.text)
        elif isinstance(part, VarRef):
            pieces.append(_ref(part.name))
        elif isinstance(part, EmbeddedCall):
            pieces.append(f"{part.target}({' '.join(_ref(a) for a in part.args)})")
    return " ".join(pieces)


def format_statement_line(stmt: Statement) -> str:
    """One canonical source line for a statement, without indentation or comment."""
    if isinstance(stmt, Action):
        return " ".join(
            part.text if isinstance(part, Word) else _ref(part.name) for part in stmt.words
        )
    if isinstance(stmt, Call):
        return f"DO {stmt.target}({' '.join(_ref(a) for a in stmt.args)})"
    if isinstance(stmt, Conditional):
        return f"IF {_query_text(stmt.query)}"
    if isinstance(stmt, ForEach):
        return f"FOR EACH {_ref(stmt.element_var)} IN {_ref(stmt.list_var)}"
    if isinstance(stmt, Until):
        return f"UNTIL {_query_text(stmt.query)}"
    if isinstance(stmt, Assignment):
        return f"SET {_ref(stmt.target)} TO {_query_text(stmt.query)}"
    if isinstance(stmt, Return):
        return f"RETURN {_query_text(stmt.query)}"
    raise TypeError(f"unknown statement {stmt!r}")


def _comment_lines(comment: str | None, indent: str) -> list[str]:
    if comment is None:
        return []
    return [f"{indent}# {line}" if line else f"{indent}#" for line in comment.split("\n")]


def _statement_lines(stmt: Statement, depth: int) -> list[str]:
    indent = "\t" * depth
    lines = _comment_lines(stmt.comment, indent)
    lines.append(indent + format_statement_line(stmt))
    block = getattr(stmt, "block", None)
    if block:
        for child in block:
            lines.extend(_statement_lines(child, depth + 1))
    return lines


def format_strategy(strategy: Strategy) -> str:
    lines = _comment_lines(strategy.leading_comment, "")
    lines.append(f"STRATEGY {strategy.name} ({' '.join(strategy.params)})")
    for stmt in strategy.body:
        lines.extend(_statement_lines(stmt, 1))
    return "\n".join(lines)


def format_document(doc: StrategyDoc) -> str:
    return "\n\n".join(format_strategy(s) for s in doc.strategies) + "\n"


def content_hash(doc: StrategyDoc) -> str:
    """Digest of the canonical formatted text; stable across cosmetic rewrites."""
    return hashlib.sha256(format_document(doc).encode("utf-8")).hexdigest()
