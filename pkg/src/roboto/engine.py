"""Mixed-initiative execution of strategy documents.

The computer owns control flow, variable persistence, and history; the
human supplies decisions, query answers, and acknowledgements.  Every
operation takes a state and returns a new one; states already produced
are never mutated, so undo history can share structure with them.

Stepping back restores the snapshot taken before the most recent forward
step (including variable edits), like a reversible debugger.  The event
log records every applied operation with its input, so folding it over a
fresh start reproduces the state exactly.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field
from typing import Sequence, Union

from . import values
from .errors import (
    ArityMismatch,
    AtStart,
    InputKindMismatch,
    LoopElementLocked,
    MissingInput,
    ScriptExhausted,
    ScriptKindMismatch,
    SessionCompleted,
    UnknownOrHiddenVariable,
    UnknownStrategy,
)
from .formatter import format_statement_line
from .nodes import (
    Action,
    Assignment,
    Call,
    Conditional,
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
    kind_name,
)
from .validator import validate_or_raise
from .values import NOTHING, Text, Value

# Pending-input kinds.
CONDITION_DECISION = "ConditionDecision"
QUERY_ANSWER = "QueryAnswer"
ACTION_ACKNOWLEDGE = "ActionAcknowledge"
ITERATION_ACKNOWLEDGE = "IterationAcknowledge"

DEVELOPER = "developer"
COMPUTER = "computer"


# --- human input -----------------------------------------------------------


@dataclass(frozen=True)
class Decision:
    value: bool


@dataclass(frozen=True)
class Answer:
    value: Value


@dataclass(frozen=True)
class Ack:
    pass


HumanInput = Union[Decision, Answer, Ack]


def encode_input(inp: HumanInput | None) -> dict | None:
    if inp is None:
        return None
    if isinstance(inp, Decision):
        return {"decision": inp.value}
    if isinstance(inp, Answer):
        return {"answer": values.to_json(inp.value)}
    return {"ack": True}


def decode_input(data: dict | None, exact: bool = False) -> HumanInput | None:
    """Decode the wire form of an input.

    ``exact`` disables the comma-splitting entry rule and is used when
    replaying recorded events, which already hold normalized values.
    """
    if data is None:
        return None
    if not isinstance(data, dict):
        raise InputKindMismatch("input must be an object")
    if "decision" in data:
        if not isinstance(data["decision"], bool):
            raise InputKindMismatch("decision must be true or false")
        return Decision(data["decision"])
    if "answer" in data:
        raw = data["answer"]
        try:
            value = values.from_stored(raw) if exact else values.from_json(raw)
        except ValueError as exc:
            raise InputKindMismatch(str(exc)) from None
        return Answer(value)
    if data.get("ack"):
        return Ack()
    if not data:
        return None
    raise InputKindMismatch("input must be one of decision / answer / ack")


# --- state ------------------------------------------------------------------


@dataclass(frozen=True)
class CompleteRun:
    pass


@dataclass(frozen=True)
class DiscardResult:
    pass


@dataclass(frozen=True)
class AssignResult:
    target: str


@dataclass(frozen=True)
class PropagateResult:
    pass


ReturnSlot = Union[CompleteRun, DiscardResult, AssignResult, PropagateResult]


@dataclass
class Frame:
    strategy_name: str
    pc: tuple[int, ...]
    bindings: dict[str, Value]
    referenced: list[str]
    loop_cursors: dict[tuple[int, ...], int]
    return_slot: ReturnSlot


@dataclass(frozen=True)
class PendingInput:
    kind: str
    prompt: str
    location: SourceLocation


@dataclass(frozen=True)
class AwaitingInput:
    pending: PendingInput


@dataclass(frozen=True)
class ReadyToAdvance:
    pass


@dataclass(frozen=True)
class Completed:
    value: Value


Status = Union[AwaitingInput, ReadyToAdvance, Completed]


@dataclass(frozen=True)
class Event:
    ordinal: int
    kind: str
    payload: dict
    timestamp: float


@dataclass(frozen=True)
class Snapshot:
    stack: tuple[Frame, ...]
    status: Status


@dataclass
class ExecutionState:
    doc: StrategyDoc
    stack: list[Frame]
    status: Status
    history: list[Snapshot]
    event_log: list[Event]


@dataclass(frozen=True)
class ResponsibilityStep:
    actor: str
    description: str


# --- navigation helpers -------------------------------------------------------


def _strategy_of(state: ExecutionState, frame: Frame) -> Strategy:
    strategy = state.doc.strategy(frame.strategy_name)
    assert strategy is not None, frame.strategy_name
    return strategy


def _node_at(strategy: Strategy, path: tuple[int, ...]) -> Statement:
    node = strategy.body[path[0]]
    for idx in path[1:]:
        node = node.block[idx]
    return node


def _block_at(strategy: Strategy, path: tuple[int, ...]) -> tuple[Statement, ...]:
    if not path:
        return strategy.body
    return _node_at(strategy, path).block


def current_statement(state: ExecutionState) -> Statement:
    frame = state.stack[-1]
    return _node_at(_strategy_of(state, frame), frame.pc)


def _mark(frame: Frame, name: str) -> None:
    if name in frame.bindings and name not in frame.referenced:
        frame.referenced.append(name)


def _mark_all(frame: Frame, names: Sequence[str]) -> None:
    for name in names:
        _mark(frame, name)


def _resolve_ref(name: str, bindings: dict[str, Value]) -> str:
    if name in bindings:
        return values.display(bindings[name])
    return f"'{name}'"


def render_statement(stmt: Statement, bindings: dict[str, Value]) -> str:
    """Statement text with variable references resolved for display."""

    def query_text(query: Query) -> str:
        pieces = []
        for part in query.parts:
            if isinstance(part, Word):
                pieces.append(part.text)
            elif isinstance(part, VarRef):
                pieces.append(_resolve_ref(part.name, bindings))
            elif isinstance(part, EmbeddedCall):
                args = " ".join(_resolve_ref(a, bindings) for a in part.args)
                pieces.append(f"{part.target}({args})")
        return " ".join(pieces)

    if isinstance(stmt, Action):
        return " ".join(
            p.text if isinstance(p, Word) else _resolve_ref(p.name, bindings) for p in stmt.words
        )
    if isinstance(stmt, Call):
        args = " ".join(_resolve_ref(a, bindings) for a in stmt.args)
        return f"DO {stmt.target}({args})"
    if isinstance(stmt, Conditional):
        return f"IF {query_text(stmt.query)}"
    if isinstance(stmt, ForEach):
        return f"FOR EACH '{stmt.element_var}' IN {_resolve_ref(stmt.list_var, bindings)}"
    if isinstance(stmt, Until):
        return f"UNTIL {query_text(stmt.query)}"
    if isinstance(stmt, Assignment):
        return f"SET '{stmt.target}' TO {query_text(stmt.query)}"
    if isinstance(stmt, Return):
        return f"RETURN {query_text(stmt.query)}"
    raise TypeError(stmt)


def _compute_status(state: ExecutionState) -> Status:
    frame = state.stack[-1]
    stmt = current_statement(state)
    prompt = render_statement(stmt, frame.bindings)
    loc = stmt.location

    def awaiting(kind: str) -> AwaitingInput:
        return AwaitingInput(PendingInput(kind, prompt, loc))

    if isinstance(stmt, Action):
        return awaiting(ACTION_ACKNOWLEDGE)
    if isinstance(stmt, Assignment):
        if stmt.query.embedded_call():
            return ReadyToAdvance()
        return awaiting(QUERY_ANSWER)
    if isinstance(stmt, (Conditional, Until)):
        return awaiting(CONDITION_DECISION)
    if isinstance(stmt, Call):
        return ReadyToAdvance()
    if isinstance(stmt, ForEach):
        cursor = frame.loop_cursors.get(frame.pc, 0)
        elements = values.as_iteration_list(frame.bindings.get(stmt.list_var))
        if cursor < len(elements):
            return awaiting(ITERATION_ACKNOWLEDGE)
        return ReadyToAdvance()
    if isinstance(stmt, Return):
        if stmt.query.embedded_call():
            return ReadyToAdvance()
        if stmt.query.is_nothing_literal() or stmt.query.sole_ref():
            return awaiting(ACTION_ACKNOWLEDGE)
        return awaiting(QUERY_ANSWER)
    raise TypeError(stmt)


# --- stepping ------------------------------------------------------------------


def _advance_past(state: ExecutionState, path: tuple[int, ...]) -> None:
    frame = state.stack[-1]
    strategy = _strategy_of(state, frame)
    cursor = list(path)
    while True:
        parent = _block_at(strategy, tuple(cursor[:-1]))
        if cursor[-1] + 1 < len(parent):
            frame.pc = tuple(cursor[:-1] + [cursor[-1] + 1])
            return
        if len(cursor) == 1:
            # Body end: implicit return of nothing.
            _pop_with_value(state, NOTHING)
            return
        container = _node_at(strategy, tuple(cursor[:-1]))
        if isinstance(container, Conditional):
            cursor = cursor[:-1]
            continue
        # Loop containers regain control at their head.
        frame.pc = tuple(cursor[:-1])
        return


def _pop_with_value(state: ExecutionState, value: Value) -> None:
    while True:
        frame = state.stack[-1]
        slot = frame.return_slot
        if isinstance(slot, CompleteRun):
            state.status = Completed(value)
            return
        state.stack.pop()
        caller = state.stack[-1]
        if isinstance(slot, DiscardResult):
            _advance_past(state, caller.pc)
            return
        if isinstance(slot, AssignResult):
            caller.bindings[slot.target] = value
            _mark(caller, slot.target)
            _advance_past(state, caller.pc)
            return
        # PropagateResult: the caller returns the same value.


def _push_frame(state: ExecutionState, call: Call | EmbeddedCall, slot: ReturnSlot) -> None:
    caller = state.stack[-1]
    callee = state.doc.strategy(call.target)
    assert callee is not None and len(callee.params) == len(call.args)
    bindings = {
        param: caller.bindings.get(arg, NOTHING) for param, arg in zip(callee.params, call.args)
    }
    state.stack.append(
        Frame(callee.name, (0,), bindings, list(callee.params), {}, slot)
    )


def _execute(state: ExecutionState, inp: HumanInput | None) -> None:
    frame = state.stack[-1]
    stmt = current_statement(state)
    pc = frame.pc

    if isinstance(stmt, Action):
        _mark_all(frame, [p.name for p in stmt.words if isinstance(p, VarRef)])
        _advance_past(state, pc)
    elif isinstance(stmt, Assignment):
        call = stmt.query.embedded_call()
        if call is not None:
            _mark_all(frame, call.args)
            _push_frame(state, call, AssignResult(stmt.target))
        else:
            assert isinstance(inp, Answer)
            _mark_all(frame, stmt.query.refs())
            frame.bindings[stmt.target] = inp.value
            _mark(frame, stmt.target)
            _advance_past(state, pc)
    elif isinstance(stmt, Conditional):
        assert isinstance(inp, Decision)
        _mark_all(frame, stmt.query.refs())
        if inp.value:
            frame.pc = pc + (0,)
        else:
            _advance_past(state, pc)
    elif isinstance(stmt, Until):
        assert isinstance(inp, Decision)
        _mark_all(frame, stmt.query.refs())
        if inp.value:
            _advance_past(state, pc)
        else:
            frame.pc = pc + (0,)
    elif isinstance(stmt, ForEach):
        cursor = frame.loop_cursors.get(pc, 0)
        elements = values.as_iteration_list(frame.bindings.get(stmt.list_var))
        if isinstance(state.status, AwaitingInput):
            assert cursor < len(elements)
            frame.bindings[stmt.element_var] = Text(elements[cursor])
            frame.loop_cursors[pc] = cursor + 1
            _mark(frame, stmt.list_var)
            _mark(frame, stmt.element_var)
            frame.pc = pc + (0,)
        else:
            _mark(frame, stmt.list_var)
            frame.loop_cursors.pop(pc, None)
            _advance_past(state, pc)
    elif isinstance(stmt, Call):
        _mark_all(frame, stmt.args)
        _push_frame(state, stmt, DiscardResult())
    elif isinstance(stmt, Return):
        call = stmt.query.embedded_call()
        if call is not None:
            _mark_all(frame, call.args)
            _push_frame(state, call, PropagateResult())
        elif stmt.query.is_nothing_literal():
            _pop_with_value(state, NOTHING)
        elif (ref := stmt.query.sole_ref()) is not None:
            _mark(frame, ref)
            _pop_with_value(state, frame.bindings.get(ref, NOTHING))
        else:
            assert isinstance(inp, Answer)
            _mark_all(frame, stmt.query.refs())
            _pop_with_value(state, inp.value)
    else:
        raise TypeError(stmt)


def _check_input(status: Status, inp: HumanInput | None) -> None:
    if isinstance(status, ReadyToAdvance):
        if inp is not None:
            raise InputKindMismatch("this step advances without input")
        return
    pending = status.pending
    if inp is None:
        raise MissingInput(f"{pending.kind} required: {pending.prompt}")
    expected = {
        CONDITION_DECISION: Decision,
        QUERY_ANSWER: Answer,
        ACTION_ACKNOWLEDGE: Ack,
        ITERATION_ACKNOWLEDGE: Ack,
    }[pending.kind]
    if not isinstance(inp, expected):
        raise InputKindMismatch(
            f"{pending.kind} expected, got {type(inp).__name__.lower()}"
        )


def _clone(state: ExecutionState, record: bool = True) -> ExecutionState:
    history = list(state.history)
    if record:
        history.append(Snapshot(tuple(state.stack), state.status))
    return ExecutionState(
        doc=state.doc,
        stack=copy.deepcopy(state.stack),
        status=state.status,
        history=history,
        event_log=list(state.event_log),
    )


def _log(state: ExecutionState, kind: str, payload: dict, now: float | None) -> None:
    state.event_log.append(
        Event(len(state.event_log) + 1, kind, payload, time.time() if now is None else now)
    )


# --- operations -----------------------------------------------------------------


def start(
    doc: StrategyDoc,
    root: str,
    args: dict[str, Value],
    now: float | None = None,
) -> ExecutionState:
    """Begin executing ``root`` with its parameters bound to ``args``."""
    strategy = doc.strategy(root)
    if strategy is None:
        raise UnknownStrategy(f"no strategy named {root!r}")
    validate_or_raise(doc)
    if set(args) != set(strategy.params):
        raise ArityMismatch(
            f"{root!r} takes parameters ({', '.join(strategy.params)}); "
            f"got ({', '.join(sorted(args))})"
        )
    frame = Frame(
        strategy_name=root,
        pc=(0,),
        bindings={p: args[p] for p in strategy.params},
        referenced=list(strategy.params),
        loop_cursors={},
        return_slot=CompleteRun(),
    )
    state = ExecutionState(doc, [frame], ReadyToAdvance(), [], [])
    state.status = _compute_status(state)
    _log(
        state,
        "StartedWithArguments",
        {"root": root, "args": {k: values.to_json(v) for k, v in args.items()}},
        now,
    )
    return state


def next_step(
    state: ExecutionState,
    inp: HumanInput | None = None,
    now: float | None = None,
) -> ExecutionState:
    """Execute the current statement and move the program counter."""
    if isinstance(state.status, Completed):
        raise SessionCompleted("the strategy has completed")
    _check_input(state.status, inp)
    work = _clone(state)
    _execute(work, inp)
    if not isinstance(work.status, Completed):
        work.status = _compute_status(work)
    _log(work, "AdvancedWith", {"input": encode_input(inp)}, now)
    return work


def step_back(state: ExecutionState, now: float | None = None) -> ExecutionState:
    """Undo the most recent forward step (or variable edit)."""
    if not state.history:
        raise AtStart("already at the first statement")
    snapshot = state.history[-1]
    work = ExecutionState(
        doc=state.doc,
        stack=list(snapshot.stack),
        status=snapshot.status,
        history=state.history[:-1],
        event_log=list(state.event_log),
    )
    _log(work, "SteppedBack", {}, now)
    return work


def set_variable(
    state: ExecutionState,
    name: str,
    value: Value,
    now: float | None = None,
) -> ExecutionState:
    """Replace a visible variable's value; affects only subsequent statements."""
    if isinstance(state.status, Completed):
        raise SessionCompleted("the strategy has completed")
    frame = state.stack[-1]
    if name not in frame.bindings or name not in frame.referenced:
        raise UnknownOrHiddenVariable(f"{name!r} is not visible in the current sub-strategy")
    strategy = _strategy_of(state, frame)
    for path, consumed in frame.loop_cursors.items():
        loop = _node_at(strategy, path)
        if not isinstance(loop, ForEach) or loop.list_var != name:
            continue
        old_elements = values.as_iteration_list(frame.bindings[name])
        new_elements = values.as_iteration_list(value)
        if (
            len(new_elements) < consumed
            or new_elements[:consumed] != old_elements[:consumed]
        ):
            raise LoopElementLocked(
                f"the first {consumed} element(s) of {name!r} were already used "
                "by an active FOR EACH and cannot be edited or deleted"
            )
    work = _clone(state)
    old = work.stack[-1].bindings[name]
    work.stack[-1].bindings[name] = value
    if not isinstance(work.status, Completed):
        work.status = _compute_status(work)
    _log(
        work,
        "VariableEdited",
        {"name": name, "old": values.to_json(old), "new": values.to_json(value)},
        now,
    )
    return work


def visible_variables(state: ExecutionState) -> list[tuple[str, Value]]:
    """The current frame's referenced bindings, in first-reference order."""
    frame = state.stack[-1]
    return [(name, frame.bindings[name]) for name in frame.referenced if name in frame.bindings]


_ADVANCE = (DEVELOPER, "Advance with the next button")


def responsibility_steps(state: ExecutionState) -> list[ResponsibilityStep]:
    """The fixed division of labor for the current statement."""
    if isinstance(state.status, Completed):
        raise SessionCompleted("the strategy has completed")
    stmt = current_statement(state)
    decision_steps = [
        (DEVELOPER, "Find the values of any referenced variables"),
        (DEVELOPER, "Interpret the query to decide whether it is true or false"),
        (DEVELOPER, "Communicate the decision by clicking True or False"),
    ]
    if isinstance(stmt, Action):
        steps = [
            (DEVELOPER, "Perform the described action"),
            _ADVANCE,
            (COMPUTER, "Move the program counter to the next statement"),
        ]
    elif isinstance(stmt, Assignment):
        if stmt.query.embedded_call():
            steps = [
                _ADVANCE,
                (COMPUTER, "Copy the argument values into a new scope"),
                (COMPUTER, "Run the sub-strategy and store its returned value in the variable"),
            ]
        else:
            steps = [
                (DEVELOPER, "Find the value the query describes"),
                (DEVELOPER, "Record the value, separating list items with commas"),
                (COMPUTER, "Store the value in the variable"),
                (COMPUTER, "Advance the program counter"),
            ]
    elif isinstance(stmt, Conditional):
        steps = decision_steps + [
            (COMPUTER, "Determine the next statement to execute"),
            (COMPUTER, "Advance the program counter"),
        ]
    elif isinstance(stmt, Until):
        steps = decision_steps + [
            (COMPUTER, "Exit the loop when true, otherwise enter its block"),
            (COMPUTER, "Advance the program counter"),
        ]
    elif isinstance(stmt, ForEach):
        if isinstance(state.status, AwaitingInput):
            steps = [
                _ADVANCE,
                (COMPUTER, "Assign the element variable the next unconsumed element"),
                (COMPUTER, "Enter the loop block"),
            ]
        else:
            steps = [
                _ADVANCE,
                (COMPUTER, "Advance past the loop; every element has been visited"),
            ]
    elif isinstance(stmt, Call):
        steps = [
            _ADVANCE,
            (COMPUTER, "Copy the argument values into a new scope"),
            (COMPUTER, "Move to the sub-strategy's first statement"),
        ]
    elif isinstance(stmt, Return):
        deliver = [
            (COMPUTER, "Pop the current scope"),
            (COMPUTER, "Deliver the value to the caller"),
        ]
        if stmt.query.embedded_call():
            steps = [
                _ADVANCE,
                (COMPUTER, "Run the sub-strategy and capture its returned value"),
            ] + deliver
        elif isinstance(state.status, AwaitingInput) and state.status.pending.kind == QUERY_ANSWER:
            steps = [
                (DEVELOPER, "Find the value the query describes"),
                (DEVELOPER, "Record the returned value"),
            ] + deliver
        else:
            steps = [(DEVELOPER, "Acknowledge the returned value")] + deliver
    else:
        raise TypeError(stmt)
    return [ResponsibilityStep(actor, text) for actor, text in steps]


def observation(state: ExecutionState) -> dict:
    """Observable projection of a state: counter, stack, bindings, visibility, status.

    History and the event log are excluded; two states that behave
    identically from here on compare equal.
    """
    frames = []
    for frame in state.stack:
        frames.append(
            {
                "strategy": frame.strategy_name,
                "pc": list(frame.pc),
                "bindings": [[n, values.to_json(v)] for n, v in frame.bindings.items()],
                "referenced": list(frame.referenced),
                "cursors": sorted([list(k), v] for k, v in frame.loop_cursors.items()),
            }
        )
    if isinstance(state.status, Completed):
        status = {"state": "completed", "value": values.to_json(state.status.value)}
    elif isinstance(state.status, ReadyToAdvance):
        status = {"state": "ready"}
    else:
        p = state.status.pending
        status = {
            "state": "awaiting",
            "kind": p.kind,
            "prompt": p.prompt,
            "location": [p.location.line, p.location.column],
        }
    visible = [[n, values.to_json(v)] for n, v in visible_variables(state)]
    return {"stack": frames, "status": status, "visible": visible}


# --- scripted runs -----------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    location: SourceLocation
    kind: str
    text: str
    input: dict | None
    depth: int


@dataclass(frozen=True)
class Trace:
    entries: tuple[TraceEntry, ...]
    value: Value

    def max_depth(self) -> int:
        return max((e.depth for e in self.entries), default=0)

    def to_json_lines(self) -> list[str]:
        import json

        lines = []
        for e in self.entries:
            lines.append(
                json.dumps(
                    {
                        "line": e.location.line,
                        "column": e.location.column,
                        "kind": e.kind,
                        "text": e.text,
                        "input": e.input,
                        "depth": e.depth,
                    },
                    sort_keys=True,
                )
            )
        lines.append(json.dumps({"status": "completed", "value": values.to_json(self.value)}))
        return lines


def run_scripted(
    doc: StrategyDoc,
    root: str,
    args: dict[str, Value],
    script: Sequence[HumanInput],
    max_steps: int = 100_000,
) -> Trace:
    """Deterministically drive a session from a pre-recorded list of inputs."""
    state = start(doc, root, args, now=0.0)
    entries: list[TraceEntry] = []
    index = 0
    while not isinstance(state.status, Completed):
        if len(entries) >= max_steps:
            raise RuntimeError(f"scripted run exceeded {max_steps} steps")
        inp: HumanInput | None = None
        if isinstance(state.status, AwaitingInput):
            if index >= len(script):
                pending = state.status.pending
                raise ScriptExhausted(
                    f"script ended but {pending.kind} is required at {pending.location}"
                )
            inp = script[index]
            index += 1
        stmt = current_statement(state)
        entries.append(
            TraceEntry(
                stmt.location,
                kind_name(stmt),
                format_statement_line(stmt),
                encode_input(inp),
                len(state.stack),
            )
        )
        try:
            state = next_step(state, inp, now=0.0)
        except InputKindMismatch as exc:
            raise ScriptKindMismatch(str(exc), current_statement(state).location) from None
    return Trace(tuple(entries), state.status.value)


def replay_events(doc: StrategyDoc, events: Sequence[Event]) -> ExecutionState:
    """Fold a recorded event log over a fresh start; reproduces the state exactly."""
    if not events or events[0].kind != "StartedWithArguments":
        raise ValueError("event log must begin with StartedWithArguments")
    first = events[0]
    args = {k: values.from_stored(v) for k, v in first.payload["args"].items()}
    state = start(doc, first.payload["root"], args, now=first.timestamp)
    for event in events[1:]:
        if event.kind == "AdvancedWith":
            inp = decode_input(event.payload["input"], exact=True)
            state = next_step(state, inp, now=event.timestamp)
        elif event.kind == "SteppedBack":
            state = step_back(state, now=event.timestamp)
        elif event.kind == "VariableEdited":
            state = set_variable(
                state,
                event.payload["name"],
                values.from_stored(event.payload["new"]),
                now=event.timestamp,
            )
        else:
            raise ValueError(f"unknown event kind {event.kind!r}")
    return state
