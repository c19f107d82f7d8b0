"""Indentation-aware parser for ``.roboto`` strategy files.

The language is line-oriented: each non-blank line is a comment (``#``),
a strategy header, or a statement.  Block membership is given by
indentation; a file may indent with tabs or spaces but not both, and the
first indented statement line fixes the unit.  Keywords are matched
case-insensitively, identifiers are case-sensitive.

Statement lines that begin with SET / DO / FOR EACH but do not match the
full statement shape fall back to plain actions ("Do the thing" is an
action, not a call).  IF / UNTIL / RETURN are reserved at line start.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseFailed
from .nodes import (
    Action,
    Assignment,
    Call,
    Conditional,
    Diagnostic,
    EmbeddedCall,
    ForEach,
    Query,
    Return,
    SourceLocation,
    Statement,
    Strategy,
    StrategyDoc,
    Until,
    VarRef,
    Word,
)

IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
IDENT_RE = re.compile(rf"^{IDENT}$")
QUOTED_RE = re.compile(rf"^'({IDENT})'$")
IDENT_OR_QUOTED = rf"(?:'{IDENT}'|{IDENT})"

HEADER_RE = re.compile(rf"^strategy\s+({IDENT})\s*\(([^()]*)\)\s*$", re.IGNORECASE)
SET_RE = re.compile(rf"^set\s+({IDENT_OR_QUOTED})\s+to\s+(\S.*)$", re.IGNORECASE)
FOREACH_RE = re.compile(
    rf"^for\s+each\s+({IDENT_OR_QUOTED})\s+in\s+({IDENT_OR_QUOTED})\s*$",
    re.IGNORECASE,
)
DO_RE = re.compile(rf"^do\s+({IDENT})\s*\(([^()]*)\)\s*$", re.IGNORECASE)
IF_RE = re.compile(r"^if\s+(\S.*)$", re.IGNORECASE)
UNTIL_RE = re.compile(r"^until\s+(\S.*)$", re.IGNORECASE)
RETURN_RE = re.compile(r"^return\s+(\S.*)$", re.IGNORECASE)
QUERY_CALL_RE = re.compile(rf"(?<![\w'])({IDENT})\s*\(([^()]*)\)")

_BLOCK_KEYWORDS_RE = re.compile(r"^(if|until|for\s+each)\b", re.IGNORECASE)


def _unquote(token: str) -> str:
    m = QUOTED_RE.match(token)
    return m.group(1) if m else token


def _parse_ref_list(text: str) -> tuple[str, ...] | None:
    """Parse ``'a' 'b'`` (whitespace/comma separated references).  None if malformed."""
    tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
    names = []
    for tok in tokens:
        m = QUOTED_RE.match(tok)
        if not m:
            return None
        names.append(m.group(1))
    return tuple(names)


def _words_and_refs(text: str) -> list[Word | VarRef]:
    parts: list[Word | VarRef] = []
    for tok in text.split():
        m = QUOTED_RE.match(tok)
        parts.append(VarRef(m.group(1)) if m else Word(tok))
    return parts


class _QueryError(Exception):
    pass


def _parse_query(text: str, strategy_names: set[str]) -> Query:
    """Parse free query text into words, references, and at most one embedded call.

    ``name('a' 'b')`` counts as an embedded call only when ``name`` is a
    strategy defined in the document; anything else stays opaque words.
    """
    calls: list[tuple[re.Match, tuple[str, ...]]] = []
    for m in QUERY_CALL_RE.finditer(text):
        if m.group(1) not in strategy_names:
            continue
        args = _parse_ref_list(m.group(2))
        if args is None:
            continue
        calls.append((m, args))
    if len(calls) > 1:
        raise _QueryError("a query may contain at most one embedded call")
    parts: list[Word | VarRef | EmbeddedCall] = []
    if calls:
        m, args = calls[0]
        parts.extend(_words_and_refs(text[: m.start()]))
        parts.append(EmbeddedCall(m.group(1), args))
        parts.extend(_words_and_refs(text[m.end():]))
    else:
        parts.extend(_words_and_refs(text))
    if not parts:
        raise _QueryError("empty query")
    return Query(tuple(parts))


# --- line scanning -----------------------------------------------------------


@dataclass
class _Line:
    location: SourceLocation
    depth: int
    text: str
    comment: str | None
    is_header: bool


class _Scanner:
    """Splits source into classified lines and resolves indentation depths."""

    def __init__(self, text: str, file: str):
        self.file = file
        self.diagnostics: list[Diagnostic] = []
        self.lines: list[_Line] = []
        self.indent_char: str | None = None
        self.indent_unit = 0
        self._scan(text)

    def error(self, code: str, message: str, loc: SourceLocation) -> None:
        self.diagnostics.append(Diagnostic("error", code, message, loc))

    def warning(self, code: str, message: str, loc: SourceLocation) -> None:
        self.diagnostics.append(Diagnostic("warning", code, message, loc))

    def _depth_of(self, ws: str, loc: SourceLocation) -> int | None:
        if not ws:
            return 0
        if "\t" in ws and " " in ws:
            self.error("IndentationError", "line mixes tabs and spaces in its indentation", loc)
            return None
        char = ws[0]
        if self.indent_char is None:
            self.indent_char = char
            self.indent_unit = len(ws)
        if char != self.indent_char:
            kind = "tabs" if self.indent_char == "\t" else "spaces"
            self.error("IndentationError", f"file indents with {kind}; this line does not", loc)
            return None
        if len(ws) % self.indent_unit != 0:
            self.error(
                "IndentationError",
                f"indentation of {len(ws)} is not a multiple of the file's unit ({self.indent_unit})",
                loc,
            )
            return None
        return len(ws) // self.indent_unit

    def _scan(self, text: str) -> None:
        pending_comments: list[str] = []
        pending_loc: SourceLocation | None = None
        for lineno, raw in enumerate(text.split("\n"), start=1):
            line = raw.rstrip()
            if not line.strip():
                continue
            ws_len = len(line) - len(line.lstrip("\t "))
            ws, body = line[:ws_len], line[ws_len:]
            loc = SourceLocation(lineno, ws_len + 1, self.file)
            if body.startswith("#"):
                comment_text = body[1:]
                if comment_text.startswith(" "):
                    comment_text = comment_text[1:]
                if pending_loc is None:
                    pending_loc = loc
                pending_comments.append(comment_text)
                continue
            depth = self._depth_of(ws, loc)
            if depth is None:
                pending_comments, pending_loc = [], None
                continue
            comment = "\n".join(pending_comments) if pending_comments else None
            pending_comments, pending_loc = [], None
            self.lines.append(_Line(loc, depth, body, comment, bool(HEADER_RE.match(body))))
        if pending_comments and pending_loc is not None:
            self.warning("DanglingComment", "comment attaches to no statement", pending_loc)


# --- statement construction ----------------------------------------------------


class _Builder:
    def __init__(self, scanner: _Scanner, strategy_names: set[str]):
        self.sc = scanner
        self.names = strategy_names

    def parse_leaf(self, line: _Line) -> tuple[Statement | None, bool]:
        """Parse one statement line.  Returns (statement, opens_block).

        Block statements come back with an empty block; the tree builder
        fills it in.  None means the line was malformed (diagnostic emitted).
        """
        text, loc, comment = line.text, line.location, line.comment
        if HEADER_RE.match(text):
            self.sc.error("IndentationError", "STRATEGY header must not be indented", loc)
            return None, False
        m = SET_RE.match(text)
        if m:
            try:
                query = _parse_query(m.group(2), self.names)
            except _QueryError as exc:
                self.sc.error("SyntaxError", str(exc), loc)
                return None, False
            return Assignment(_unquote(m.group(1)), query, comment, loc), False
        m = FOREACH_RE.match(text)
        if m:
            return ForEach(_unquote(m.group(1)), _unquote(m.group(2)), (), comment, loc), True
        m = DO_RE.match(text)
        if m:
            args = _parse_ref_list(m.group(2))
            if args is not None:
                return Call(m.group(1), args, comment, loc), False
            self.sc.error(
                "SyntaxError",
                "call arguments must be quoted identifiers like 'value'",
                loc,
            )
            return None, False
        m = IF_RE.match(text)
        if m:
            return self._query_stmt(Conditional, m.group(1), comment, loc), True
        m = UNTIL_RE.match(text)
        if m:
            return self._query_stmt(Until, m.group(1), comment, loc), True
        m = RETURN_RE.match(text)
        if m:
            stmt = self._query_stmt(Return, m.group(1), comment, loc)
            return stmt, False
        first = text.split(None, 1)[0].lower()
        if first in ("if", "until", "return"):
            self.sc.error("SyntaxError", f"{first.upper()} requires a query", loc)
            return None, False
        return self._action(text, comment, loc), False

    def _query_stmt(self, cls, query_text: str, comment, loc) -> Statement | None:
        try:
            query = _parse_query(query_text, self.names)
        except _QueryError as exc:
            self.sc.error("SyntaxError", str(exc), loc)
            return None
        if cls is Return:
            return Return(query, comment, loc)
        return cls(query, (), comment, loc)

    def _action(self, text: str, comment, loc) -> Action | None:
        # Grammar allows a terminating period on actions; strip it.
        stripped = text[:-1].rstrip() if text.endswith(".") else text
        parts = _words_and_refs(stripped)
        if not parts:
            self.sc.error("SyntaxError", "empty action", loc)
            return None
        return Action(tuple(parts), comment, loc)

    def build_block(self, items: list[_Line], i: int, depth: int) -> tuple[list[Statement], int]:
        stmts: list[Statement] = []
        while i < len(items) and items[i].depth >= depth:
            line = items[i]
            if line.depth > depth:
                self.sc.error(
                    "IndentationError",
                    "unexpected indent (no enclosing IF, FOR EACH, or UNTIL)",
                    line.location,
                )
                i += 1
                continue
            stmt, opens = self.parse_leaf(line)
            i += 1
            if stmt is None:
                continue
            if opens:
                children, i = self.build_block(items, i, depth + 1)
                if not children:
                    self.sc.error(
                        "SyntaxError",
                        f"{kindword(stmt)} has an empty block",
                        line.location,
                    )
                    continue
                stmt = _with_block(stmt, tuple(children))
            stmts.append(stmt)
        return stmts, i


def kindword(stmt: Statement) -> str:
    if isinstance(stmt, Conditional):
        return "IF"
    if isinstance(stmt, ForEach):
        return "FOR EACH"
    if isinstance(stmt, Until):
        return "UNTIL"
    return type(stmt).__name__.upper()


def _with_block(stmt: Statement, block: tuple[Statement, ...]) -> Statement:
    if isinstance(stmt, Conditional):
        return Conditional(stmt.query, block, stmt.comment, stmt.location)
    if isinstance(stmt, ForEach):
        return ForEach(stmt.element_var, stmt.list_var, block, stmt.comment, stmt.location)
    if isinstance(stmt, Until):
        return Until(stmt.query, block, stmt.comment, stmt.location)
    raise TypeError(f"statement {stmt!r} has no block")


def _parse_params(raw: str, loc: SourceLocation, sc: _Scanner) -> tuple[str, ...] | None:
    tokens = [t for t in re.split(r"[\s,]+", raw.strip()) if t]
    params = []
    for tok in tokens:
        name = _unquote(tok)
        if not IDENT_RE.match(name):
            sc.error("SyntaxError", f"bad parameter name {tok!r}", loc)
            return None
        if name in params:
            sc.error("SyntaxError", f"duplicate parameter {name!r}", loc)
            return None
        params.append(name)
    return tuple(params)


def parse_with_diagnostics(
    text: str, file: str = "<input>"
) -> tuple[StrategyDoc | None, list[Diagnostic]]:
    """Parse source text.  Returns (doc, diagnostics); doc is None when any error occurred."""
    sc = _Scanner(text, file)
    strategy_names = {
        m.group(1) for line in sc.lines if (m := HEADER_RE.match(line.text)) and line.depth == 0
    }
    builder = _Builder(sc, strategy_names)

    strategies: list[Strategy] = []
    seen: set[str] = set()
    i = 0
    lines = sc.lines
    while i < len(lines):
        line = lines[i]
        if not line.is_header:
            code = "SyntaxError" if line.depth == 0 else "IndentationError"
            sc.error(code, "statement outside of a strategy", line.location)
            i += 1
            continue
        if line.depth != 0:
            sc.error("IndentationError", "STRATEGY header must not be indented", line.location)
            i += 1
            continue
        m = HEADER_RE.match(line.text)
        name = m.group(1)
        params = _parse_params(m.group(2), line.location, sc)
        if name in seen:
            sc.error("DuplicateStrategy", f"strategy {name!r} is defined twice", line.location)
        seen.add(name)
        body_lines = []
        i += 1
        while i < len(lines) and not (lines[i].is_header and lines[i].depth == 0):
            body_lines.append(lines[i])
            i += 1
        body: list[Statement] = []
        j = 0
        while j < len(body_lines):
            if body_lines[j].depth == 0:
                sc.error(
                    "SyntaxError",
                    "statement at top level outside a strategy body",
                    body_lines[j].location,
                )
                j += 1
                continue
            chunk, j = builder.build_block(body_lines, j, 1)
            body.extend(chunk)
        if not body:
            sc.error("SyntaxError", f"strategy {name!r} has an empty body", line.location)
            continue
        if params is None:
            continue
        strategies.append(Strategy(name, params, tuple(body), line.comment, line.location))

    if not strategies and not any(d.severity == "error" for d in sc.diagnostics):
        sc.error("SyntaxError", "no strategies found", SourceLocation(1, 1, file))
    if any(d.severity == "error" for d in sc.diagnostics):
        return None, sc.diagnostics
    return StrategyDoc(tuple(strategies), text, file), sc.diagnostics


def parse_document(text: str, file: str = "<input>") -> StrategyDoc:
    """Parse source text into a document, raising ParseFailed on any error."""
    doc, diagnostics = parse_with_diagnostics(text, file)
    if doc is None:
        raise ParseFailed([d for d in diagnostics if d.severity == "error"])
    return doc
