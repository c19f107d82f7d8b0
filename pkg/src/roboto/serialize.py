"""Lossless, versioned JSON snapshots of execution states.

The payload carries the strategy source so a snapshot is self-contained;
the document hash guards against loading a snapshot over edited source.
Field order is canonical (sorted keys), so identical states serialize
identically; order-sensitive maps (bindings, cursors) are emitted as
pair lists.
"""

from __future__ import annotations

import json

from . import values
from .engine import (
    AssignResult,
    AwaitingInput,
    Completed,
    CompleteRun,
    DiscardResult,
    Event,
    ExecutionState,
    Frame,
    PendingInput,
    PropagateResult,
    ReadyToAdvance,
    ReturnSlot,
    Snapshot,
    Status,
)
from .errors import CorruptPayload, FormatVersionMismatch, ParseFailed
from .formatter import content_hash
from .nodes import SourceLocation
from .parser import parse_document

FORMAT_VERSION = 1


def location_json(loc: SourceLocation) -> dict:
    return {"line": loc.line, "column": loc.column, "file": loc.file}


def _location_from(data: dict) -> SourceLocation:
    return SourceLocation(data["line"], data["column"], data["file"])


def _slot_json(slot: ReturnSlot) -> dict:
    if isinstance(slot, CompleteRun):
        return {"kind": "complete"}
    if isinstance(slot, DiscardResult):
        return {"kind": "discard"}
    if isinstance(slot, AssignResult):
        return {"kind": "assign", "target": slot.target}
    return {"kind": "propagate"}


def _slot_from(data: dict) -> ReturnSlot:
    kind = data["kind"]
    if kind == "complete":
        return CompleteRun()
    if kind == "discard":
        return DiscardResult()
    if kind == "assign":
        return AssignResult(data["target"])
    if kind == "propagate":
        return PropagateResult()
    raise CorruptPayload(f"unknown return slot kind {kind!r}")


def _frame_json(frame: Frame) -> dict:
    return {
        "strategy": frame.strategy_name,
        "pc": list(frame.pc),
        "bindings": [[name, values.to_json(v)] for name, v in frame.bindings.items()],
        "referenced": list(frame.referenced),
        "loopCursors": [[list(path), count] for path, count in frame.loop_cursors.items()],
        "returnSlot": _slot_json(frame.return_slot),
    }


def _frame_from(data: dict) -> Frame:
    return Frame(
        strategy_name=data["strategy"],
        pc=tuple(data["pc"]),
        bindings={name: values.from_stored(v) for name, v in data["bindings"]},
        referenced=list(data["referenced"]),
        loop_cursors={tuple(path): count for path, count in data["loopCursors"]},
        return_slot=_slot_from(data["returnSlot"]),
    )


def status_json(status: Status) -> dict:
    if isinstance(status, Completed):
        return {"state": "completed", "returnValue": values.to_json(status.value)}
    if isinstance(status, ReadyToAdvance):
        return {"state": "readyToAdvance"}
    p = status.pending
    return {
        "state": "awaitingInput",
        "pending": {"kind": p.kind, "prompt": p.prompt, "location": location_json(p.location)},
    }


def _status_from(data: dict) -> Status:
    state = data["state"]
    if state == "completed":
        return Completed(values.from_stored(data["returnValue"]))
    if state == "readyToAdvance":
        return ReadyToAdvance()
    if state == "awaitingInput":
        p = data["pending"]
        return AwaitingInput(PendingInput(p["kind"], p["prompt"], _location_from(p["location"])))
    raise CorruptPayload(f"unknown status {state!r}")


def event_json(event: Event) -> dict:
    return {
        "ordinal": event.ordinal,
        "kind": event.kind,
        "payload": event.payload,
        "timestamp": event.timestamp,
    }


def event_from(data: dict) -> Event:
    return Event(data["ordinal"], data["kind"], data["payload"], data["timestamp"])


def serialize_state(state: ExecutionState) -> bytes:
    payload = {
        "version": FORMAT_VERSION,
        "docHash": content_hash(state.doc),
        "source": state.doc.source_text,
        "file": state.doc.file,
        "stack": [_frame_json(f) for f in state.stack],
        "status": status_json(state.status),
        "history": [
            {"stack": [_frame_json(f) for f in snap.stack], "status": status_json(snap.status)}
            for snap in state.history
        ],
        "eventLog": [event_json(e) for e in state.event_log],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize_state(data: bytes) -> ExecutionState:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"not a valid snapshot: {exc}") from None
    if not isinstance(payload, dict) or "version" not in payload:
        raise CorruptPayload("snapshot has no version field")
    if payload["version"] != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"snapshot version {payload['version']} is not supported (expected {FORMAT_VERSION})"
        )
    try:
        doc = parse_document(payload["source"], payload.get("file", "<snapshot>"))
        if content_hash(doc) != payload["docHash"]:
            raise CorruptPayload("document hash does not match the embedded source")
        return ExecutionState(
            doc=doc,
            stack=[_frame_from(f) for f in payload["stack"]],
            status=_status_from(payload["status"]),
            history=[
                Snapshot(
                    tuple(_frame_from(f) for f in snap["stack"]),
                    _status_from(snap["status"]),
                )
                for snap in payload["history"]
            ],
            event_log=[event_from(e) for e in payload["eventLog"]],
        )
    except (CorruptPayload, FormatVersionMismatch):
        raise
    except (KeyError, TypeError, ValueError, IndexError, ParseFailed) as exc:
        raise CorruptPayload(f"malformed snapshot: {exc}") from None
