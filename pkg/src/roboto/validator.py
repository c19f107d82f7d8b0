"""Static checks over parsed strategy documents.

Errors (block execution): calls to strategies the document does not
define, and argument/parameter count mismatches.  Warnings: identifier
references with no lexically preceding definition in the same strategy,
and unreachable statements after a RETURN.
"""

from __future__ import annotations

from .errors import ValidationFailed
from .nodes import (
    Assignment,
    Call,
    Conditional,
    Diagnostic,
    ForEach,
    Query,
    Return,
    Statement,
    Strategy,
    StrategyDoc,
    Until,
    kind_name,
)


def validate(doc: StrategyDoc) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    arity = {s.name: len(s.params) for s in doc.strategies}

    def check_call(target: str, args: tuple[str, ...], stmt: Statement) -> None:
        if target not in arity:
            diags.append(
                Diagnostic(
                    "error",
                    "UnknownStrategy",
                    f"call to undefined strategy {target!r}",
                    stmt.location,
                )
            )
            return
        if len(args) != arity[target]:
            diags.append(
                Diagnostic(
                    "error",
                    "ArityMismatch",
                    f"{target!r} takes {arity[target]} argument(s), got {len(args)}",
                    stmt.location,
                )
            )

    def check_refs(names: list[str], defined: set[str], loops: list[str], stmt: Statement) -> None:
        for name in names:
            if name not in defined and name not in loops:
                diags.append(
                    Diagnostic(
                        "warning",
                        "UndefinedReference",
                        f"{name!r} is referenced but never defined before this point",
                        stmt.location,
                    )
                )

    def check_query(query: Query, defined: set[str], loops: list[str], stmt: Statement) -> None:
        check_refs(query.refs(), defined, loops, stmt)
        call = query.embedded_call()
        if call is not None:
            check_call(call.target, call.args, stmt)

    def walk(block: tuple[Statement, ...], defined: set[str], loops: list[str]) -> None:
        returned = False
        for stmt in block:
            if returned:
                diags.append(
                    Diagnostic(
                        "warning",
                        "UnreachableStatement",
                        f"{kind_name(stmt)} statement is unreachable after RETURN",
                        stmt.location,
                    )
                )
            if isinstance(stmt, Assignment):
                check_query(stmt.query, defined, loops, stmt)
                defined.add(stmt.target)
            elif isinstance(stmt, Call):
                check_refs(list(stmt.args), defined, loops, stmt)
                check_call(stmt.target, stmt.args, stmt)
            elif isinstance(stmt, (Conditional, Until)):
                check_query(stmt.query, defined, loops, stmt)
                walk(stmt.block, defined, loops)
            elif isinstance(stmt, ForEach):
                check_refs([stmt.list_var], defined, loops, stmt)
                walk(stmt.block, defined, loops + [stmt.element_var])
            elif isinstance(stmt, Return):
                check_query(stmt.query, defined, loops, stmt)
                returned = True
            else:  # Action
                check_refs([p.name for p in stmt.words if hasattr(p, "name")], defined, loops, stmt)

    for strategy in doc.strategies:
        walk(strategy.body, set(strategy.params), [])

    return diags


def validate_or_raise(doc: StrategyDoc) -> list[Diagnostic]:
    """Validate, raising ValidationFailed when any error-severity diagnostic exists.

    Returns the warnings otherwise.
    """
    diags = validate(doc)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ValidationFailed(errors)
    return diags
