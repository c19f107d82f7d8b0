"""HTTP/JSON API exposing the catalog and event-sourced sessions.

Every session route responds with the full state view, so clients stay
stateless and re-render wholesale.  Mutations append the new event to the
session's file before responding; on restart the event log is replayed to
rebuild each session.  Optimistic concurrency: mutating requests may carry
``expectedOrdinal``; a stale value gets 409 and changes nothing.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import engine, values
from .catalog import Catalog, CatalogEntry
from .errors import NotFound, RobotoError, StaleOrdinal
from .formatter import format_statement_line
from .nodes import Statement, StrategyDoc
from .serialize import event_from, event_json, location_json, status_json

_HTTP_STATUS = {"NotFound": 404, "StaleOrdinal": 409}


def _entry_view(entry: CatalogEntry) -> dict:
    return {
        "id": entry.id,
        "name": entry.name,
        "path": entry.path,
        "summary": entry.summary,
        "strategyNames": entry.strategyNames,
        "contentHash": entry.contentHash,
        "builtin": entry.builtin,
    }


def _flatten(block: tuple[Statement, ...], depth: int, out: list[dict]) -> None:
    for stmt in block:
        out.append(
            {
                "location": location_json(stmt.location),
                "depth": depth,
                "text": format_statement_line(stmt),
                "comment": stmt.comment,
            }
        )
        inner = getattr(stmt, "block", None)
        if inner:
            _flatten(inner, depth + 1, out)


def build_state_view(state: engine.ExecutionState, intro_text: str | None) -> dict:
    frame = state.stack[-1]
    strategy = state.doc.strategy(frame.strategy_name)
    statements: list[dict] = []
    _flatten(strategy.body, 0, statements)
    completed = isinstance(state.status, engine.Completed)
    pending = state.status.pending if isinstance(state.status, engine.AwaitingInput) else None
    return {
        "strategyName": strategy.name,
        "statements": statements,
        "currentLocation": (
            None if completed else location_json(engine.current_statement(state).location)
        ),
        "pendingInput": (
            None
            if pending is None
            else {
                "kind": pending.kind,
                "prompt": pending.prompt,
                "location": location_json(pending.location),
            }
        ),
        "visibleVariables": [
            {"name": name, "value": values.to_json(value)}
            for name, value in engine.visible_variables(state)
        ],
        "responsibilitySteps": (
            []
            if completed
            else [
                {"actor": step.actor, "description": step.description}
                for step in engine.responsibility_steps(state)
            ]
        ),
        "canStepBack": bool(state.history),
        "status": status_json(state.status),
        "introText": intro_text,
        "lastOrdinal": state.event_log[-1].ordinal,
    }


@dataclass
class SessionRecord:
    session_id: str
    entry_id: str
    created_at: str
    updated_at: str
    state: engine.ExecutionState
    lock: threading.Lock = field(default_factory=threading.Lock)

    def intro_text(self) -> str | None:
        root = self.state.event_log[0].payload["root"]
        strategy = self.state.doc.strategy(root)
        return strategy.leading_comment if strategy else None

    def view(self) -> dict:
        return build_state_view(self.state, self.intro_text())


class SessionStore:
    """Event-sourced session persistence: one JSON file per session."""

    def __init__(self, root: Path | str, catalog: Catalog):
        self.root = Path(root)
        self.catalog = catalog
        self.root.mkdir(parents=True, exist_ok=True)
        self._records: dict[str, SessionRecord] = {}
        for path in sorted(self.root.glob("*.json")):
            record = self._load(path)
            self._records[record.session_id] = record

    def _load(self, path: Path) -> SessionRecord:
        data = json.loads(path.read_text(encoding="utf-8"))
        doc = self.catalog.document(data["entryId"])
        events = [event_from(e) for e in data["events"]]
        state = engine.replay_events(doc, events)
        return SessionRecord(
            session_id=data["sessionId"],
            entry_id=data["entryId"],
            created_at=data["createdAt"],
            updated_at=data["updatedAt"],
            state=state,
        )

    def persist(self, record: SessionRecord) -> None:
        payload = {
            "sessionId": record.session_id,
            "entryId": record.entry_id,
            "createdAt": record.created_at,
            "updatedAt": record.updated_at,
            "events": [event_json(e) for e in record.state.event_log],
        }
        path = self.root / f"{record.session_id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def create(self, entry_id: str, doc: StrategyDoc, root: str, args: dict) -> SessionRecord:
        state = engine.start(doc, root, args)
        now = _iso_now()
        record = SessionRecord(
            session_id=uuid.uuid4().hex[:16],
            entry_id=entry_id,
            created_at=now,
            updated_at=now,
            state=state,
        )
        self.persist(record)
        self._records[record.session_id] = record
        return record

    def get(self, session_id: str) -> SessionRecord:
        record = self._records.get(session_id)
        if record is None:
            raise NotFound(f"no session {session_id!r}")
        return record


def _iso_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _input_from_body(body: dict) -> engine.HumanInput | None:
    data = {k: body[k] for k in ("decision", "answer", "ack") if k in body}
    return engine.decode_input(data)


def create_app(catalog_dir: Path | str, store_dir: Path | str) -> FastAPI:
    catalog = Catalog(catalog_dir)
    store = SessionStore(store_dir, catalog)
    app = FastAPI(title="roboto strategy service")

    @app.exception_handler(RobotoError)
    async def roboto_error(request: Request, exc: RobotoError):
        body = {"code": exc.code, "message": exc.message}
        if exc.location is not None:
            body["location"] = location_json(exc.location)
        diagnostics = getattr(exc, "diagnostics", None)
        if diagnostics:
            body["diagnostics"] = [
                {
                    "severity": d.severity,
                    "code": d.code,
                    "message": d.message,
                    "location": location_json(d.location),
                }
                for d in diagnostics
            ]
        return JSONResponse(status_code=_HTTP_STATUS.get(exc.code, 400), content=body)

    def mutate(session_id: str, body: dict, op) -> dict:
        record = store.get(session_id)
        with record.lock:
            expected = body.get("expectedOrdinal")
            if expected is not None and expected != record.state.event_log[-1].ordinal:
                raise StaleOrdinal(
                    f"expectedOrdinal {expected} is stale "
                    f"(latest is {record.state.event_log[-1].ordinal})"
                )
            record.state = op(record.state)
            record.updated_at = _iso_now()
            store.persist(record)
            return record.view()

    @app.get("/v1/strategies")
    async def list_strategies():
        return {"strategies": [_entry_view(e) for e in catalog.list()]}

    @app.post("/v1/strategies", status_code=201)
    async def add_strategy(body: dict):
        text = body.get("text")
        if not isinstance(text, str):
            return JSONResponse(
                status_code=400,
                content={"code": "BadRequest", "message": "body must carry a 'text' string"},
            )
        return _entry_view(catalog.ingest(text))

    @app.get("/v1/strategies/{entry_id}")
    async def get_strategy(entry_id: str):
        entry, text = catalog.get(entry_id)
        view = _entry_view(entry)
        view["text"] = text
        return view

    @app.post("/v1/sessions", status_code=201)
    async def create_session(body: dict):
        entry_id = body.get("entryId")
        root = body.get("rootName")
        raw_args = body.get("args") or {}
        if not isinstance(entry_id, str) or not isinstance(root, str) or not isinstance(raw_args, dict):
            return JSONResponse(
                status_code=400,
                content={
                    "code": "BadRequest",
                    "message": "body must carry entryId, rootName, and an args object",
                },
            )
        doc = catalog.document(entry_id)
        args = {k: values.from_json(v) for k, v in raw_args.items()}
        record = store.create(entry_id, doc, root, args)
        return {"sessionId": record.session_id, "stateView": record.view()}

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        return store.get(session_id).view()

    @app.post("/v1/sessions/{session_id}/next")
    async def advance(session_id: str, body: dict | None = None):
        body = body or {}
        inp = _input_from_body(body)
        return mutate(session_id, body, lambda s: engine.next_step(s, inp))

    @app.post("/v1/sessions/{session_id}/previous")
    async def step_back(session_id: str, body: dict | None = None):
        return mutate(session_id, body or {}, engine.step_back)

    @app.post("/v1/sessions/{session_id}/variables")
    async def edit_variable(session_id: str, body: dict):
        name = body.get("name")
        if not isinstance(name, str) or "value" not in body:
            return JSONResponse(
                status_code=400,
                content={"code": "BadRequest", "message": "body must carry name and value"},
            )
        try:
            value = values.from_json(body["value"])
        except ValueError as exc:
            return JSONResponse(
                status_code=400, content={"code": "BadRequest", "message": str(exc)}
            )
        return mutate(session_id, body, lambda s: engine.set_variable(s, name, value))

    @app.get("/v1/sessions/{session_id}/events")
    async def list_events(session_id: str):
        record = store.get(session_id)
        return {"events": [event_json(e) for e in record.state.event_log]}

    return app
