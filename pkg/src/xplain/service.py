"""HTTP/JSON API over maps and sessions, with file-backed persistence.

Persistence is an append-only JSON-lines event store: one ``maps.jsonl``
file plus one ``sessions/<id>.jsonl`` per session (header line, then
transcript events). Sessions are rebuilt by replay on startup.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import assets
from .dialogue import (
    Question,
    Session,
    SessionConfig,
    TranscriptEvent,
    replay_session,
)
from .errors import XplainError
from .map_model import GridMap, MoveAction, parse_map
from .preference import DISPLAY_LABELS, preference_from_dict

DEFAULT_ADDR = "127.0.0.1:8080"
DEFAULT_DATA_DIR = "./data"

# HTTP status per error code; anything unlisted is a 500.
_STATUS_BY_CODE = {
    "RaggedRows": 400,
    "UnknownCell": 400,
    "MissingStart": 400,
    "MissingDestination": 400,
    "DuplicateStart": 400,
    "DuplicateDestination": 400,
    "UnreachableDestination": 400,
    "EmptyMap": 400,
    "InvalidProbability": 400,
    "UnknownMap": 404,
    "UnknownSession": 404,
    "PreferenceInvalid": 422,
    "PreferenceMalformed": 422,
    "UnknownAction": 422,
    "NotInExplanation": 422,
    "EmptySelection": 422,
    "SegmentNotOnRoute": 422,
    "BadRequest": 400,
    "WrongState": 409,
    "EventLimitExceeded": 409,
    "RouteCycle": 422,
    "NoValidAction": 422,
}


class ApiError(XplainError):
    def __init__(self, code: str, message: str, **details: object) -> None:
        self.code = code
        super().__init__(message, **details)


@dataclass
class StoredMap:
    id: str
    grid: GridMap
    text: str
    created_at: float

    def view(self) -> dict:
        return {
            "id": self.id,
            "name": self.grid.name,
            "width": self.grid.width,
            "height": self.grid.height,
            "cells": [kind.value for kind in self.grid.cells],
            "start": self.grid.start,
            "destination": self.grid.destination,
            "text": self.text,
            "createdAt": self.created_at,
        }


@dataclass
class SessionRecord:
    session: Session
    map_id: str
    created_at: float
    persisted_events: int
    lock: threading.Lock


class ServiceState:
    """Maps + sessions registry backed by the JSON-lines store."""

    def __init__(self, data_dir: str | Path, config: Optional[SessionConfig] = None):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.maps_path = self.data_dir / "maps.jsonl"
        self.config = config or SessionConfig()
        self.maps: dict[str, StoredMap] = {}
        self.sessions: dict[str, SessionRecord] = {}
        self._maps_lock = threading.Lock()
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._register_bundled()
        self._load()

    def _register_bundled(self) -> None:
        grid = assets.paper_map()
        self.maps[assets.PAPER_MAP_ID] = StoredMap(
            id=assets.PAPER_MAP_ID,
            grid=grid,
            text=assets.PAPER_MAP_TEXT,
            created_at=0.0,
        )

    def _load(self) -> None:
        if self.maps_path.exists():
            for line in self.maps_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                grid = parse_map(record["text"], name=record.get("name", "map"))
                self.maps[record["id"]] = StoredMap(
                    id=record["id"],
                    grid=grid,
                    text=record["text"],
                    created_at=record["createdAt"],
                )
        for path in sorted(self.sessions_dir.glob("*.jsonl")):
            lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
            if not lines:
                continue
            header = json.loads(lines[0])
            stored = self.maps.get(header["mapId"])
            if stored is None:
                continue
            events = [TranscriptEvent.from_dict(json.loads(line)) for line in lines[1:]]
            config = SessionConfig(**header.get("config", {}))
            session = replay_session(
                stored.grid, events, session_id=header["id"], config=config
            )
            self.sessions[session.id] = SessionRecord(
                session=session,
                map_id=header["mapId"],
                created_at=header["createdAt"],
                persisted_events=len(events),
                lock=threading.Lock(),
            )

    # -- maps ---------------------------------------------------------

    def create_map(self, text: str, name: Optional[str] = None) -> StoredMap:
        map_id = f"map-{uuid.uuid4().hex[:8]}"
        grid = parse_map(text, name=name or map_id)
        stored = StoredMap(id=map_id, grid=grid, text=text, created_at=time.time())
        with self._maps_lock:
            self.maps[map_id] = stored
            with self.maps_path.open("a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps(
                        {
                            "id": stored.id,
                            "name": grid.name,
                            "text": text,
                            "createdAt": stored.created_at,
                        }
                    )
                    + "\n"
                )
        return stored

    def get_map(self, map_id: str) -> StoredMap:
        stored = self.maps.get(map_id)
        if stored is None:
            raise ApiError("UnknownMap", f"no map with id {map_id!r}")
        return stored

    # -- sessions -------------------------------------------------------

    def create_session(self, map_id: str, preference_data: dict) -> SessionRecord:
        stored = self.get_map(map_id)
        try:
            preference = preference_from_dict(preference_data)
        except ValueError as exc:
            raise ApiError("PreferenceMalformed", str(exc)) from exc
        session = Session.start(stored.grid, preference, config=self.config)
        record = SessionRecord(
            session=session,
            map_id=map_id,
            created_at=time.time(),
            persisted_events=0,
            lock=threading.Lock(),
        )
        self.sessions[session.id] = record
        with record.lock:
            self._persist_header(record)
            self._flush_events(record)
        return record

    def get_session(self, session_id: str) -> SessionRecord:
        record = self.sessions.get(session_id)
        if record is None:
            raise ApiError("UnknownSession", f"no session with id {session_id!r}")
        return record

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _persist_header(self, record: SessionRecord) -> None:
        header = {
            "id": record.session.id,
            "mapId": record.map_id,
            "createdAt": record.created_at,
            "config": {
                "slip_probability": self.config.slip_probability,
                "discount": self.config.discount,
                "tolerance": self.config.tolerance,
                "iteration_cap": self.config.iteration_cap,
                "event_limit": self.config.event_limit,
            },
        }
        self._session_path(record.session.id).write_text(
            json.dumps(header) + "\n", encoding="utf-8"
        )

    def _flush_events(self, record: SessionRecord) -> None:
        events = record.session.transcript
        if record.persisted_events >= len(events):
            return
        with self._session_path(record.session.id).open("a", encoding="utf-8") as handle:
            for event in events[record.persisted_events :]:
                handle.write(json.dumps(event.as_dict()) + "\n")
        record.persisted_events = len(events)

    def run_session_op(self, session_id: str, op):
        """Serialize (operation, persist) per session."""
        record = self.get_session(session_id)
        with record.lock:
            try:
                result = op(record.session)
            finally:
                self._flush_events(record)
        return result, record

    def snapshot(self, record: SessionRecord) -> dict:
        view = record.session.snapshot()
        view["mapId"] = record.map_id
        view["map"] = self.get_map(record.map_id).view()
        return view


def _parse_action(text: str) -> MoveAction:
    try:
        return MoveAction(str(text).lower())
    except ValueError:
        raise ApiError("UnknownAction", f"unknown action {text!r}") from None


def create_app(
    data_dir: Optional[str | Path] = None,
    config: Optional[SessionConfig] = None,
    ui_dir: Optional[str | Path] = None,
) -> FastAPI:
    state = ServiceState(
        data_dir or os.environ.get("XPLAIN_DATA_DIR", DEFAULT_DATA_DIR),
        config=config,
    )
    app = FastAPI(title="xplain", version="1.0.0")
    app.state.service = state

    @app.exception_handler(XplainError)
    async def handle_xplain_error(_request: Request, exc: XplainError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 500)
        body = {"code": exc.code, "message": exc.message}
        if exc.details:
            body["details"] = exc.details
        return JSONResponse(status_code=status, content=body)

    @app.post("/v1/maps", status_code=201)
    async def create_map(request: Request, name: Optional[str] = None) -> dict:
        text = (await request.body()).decode("utf-8")
        return state.create_map(text, name=name).view()

    @app.get("/v1/maps")
    async def list_maps() -> dict:
        return {"maps": [stored.view() for stored in state.maps.values()]}

    @app.get("/v1/maps/{map_id}")
    async def get_map(map_id: str) -> dict:
        return state.get_map(map_id).view()

    @app.get("/v1/options")
    async def options() -> dict:
        return {
            "objective": ["shortest", "safest", "combined"],
            "locality": ["global", "only:corridor", "only:crowded", "segment:landmark:destination"],
            "specificity": ["every", "critical"],
            "corpus": ["concrete", "high_level"],
            "labels": DISPLAY_LABELS,
        }

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request) -> dict:
        body = await _json_body(request)
        map_id = body.get("mapId")
        if not isinstance(map_id, str):
            raise ApiError("BadRequest", "body must carry a string mapId")
        preference = body.get("preference")
        if not isinstance(preference, dict):
            raise ApiError("BadRequest", "body must carry a preference object")
        record = state.create_session(map_id, preference)
        return state.snapshot(record)

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str) -> dict:
        return state.snapshot(state.get_session(session_id))

    @app.post("/v1/sessions/{session_id}/question")
    async def ask_question(session_id: str, request: Request) -> dict:
        body = await _json_body(request)
        if "state" not in body or "action" not in body:
            raise ApiError("BadRequest", "body must carry state and action")
        try:
            cell = int(body["state"])
        except (TypeError, ValueError):
            raise ApiError("BadRequest", "state must be an integer cell index") from None
        question = Question(state=cell, action=_parse_action(body["action"]))
        answer, _ = state.run_session_op(session_id, lambda s: s.ask_question(question))
        return {"answer": answer.text, "question": answer.question}

    @app.post("/v1/sessions/{session_id}/preference")
    async def update_preference(session_id: str, request: Request) -> dict:
        body = await _json_body(request)
        try:
            updated = preference_from_dict(body)
        except ValueError as exc:
            raise ApiError("PreferenceMalformed", str(exc)) from exc
        prompt, _ = state.run_session_op(
            session_id, lambda s: s.submit_preference_update(updated)
        )
        return {"prompt": prompt.prompt, "conflict": prompt.conflict.value}

    @app.post("/v1/sessions/{session_id}/confirm")
    async def confirm(session_id: str, request: Request) -> dict:
        body = await _json_body(request)
        reply = body.get("reply")
        if reply not in ("yes", "no"):
            raise ApiError("BadRequest", "reply must be \"yes\" or \"no\"")
        _, record = state.run_session_op(session_id, lambda s: s.confirm(reply == "yes"))
        return state.snapshot(record)

    @app.get("/v1/sessions/{session_id}/transcript")
    async def transcript(session_id: str) -> PlainTextResponse:
        record = state.get_session(session_id)
        return PlainTextResponse(
            record.session.transcript_jsonl(), media_type="application/x-ndjson"
        )

    ui_path = _resolve_ui_dir(ui_dir)
    if ui_path is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def _resolve_ui_dir(ui_dir: Optional[str | Path]) -> Optional[Path]:
    """First existing candidate: explicit arg, env var, ./frontend/dist,
    or the checkout's frontend/dist next to this package."""
    candidates = []
    if ui_dir:
        candidates.append(Path(ui_dir))
    env_dir = os.environ.get("XPLAIN_UI_DIR")
    if env_dir:
        candidates.append(Path(env_dir))
    candidates.append(Path("frontend/dist"))
    # src/xplain/service.py -> repo checkout root two levels above src/
    candidates.append(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    for candidate in candidates:
        if candidate.is_dir():
            return candidate
    return None


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError("BadRequest", "request body must be JSON") from None
    if not isinstance(body, dict):
        raise ApiError("BadRequest", "request body must be a JSON object")
    return body


def serve(addr: Optional[str] = None, data_dir: Optional[str] = None) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    addr = addr or os.environ.get("XPLAIN_ADDR", DEFAULT_ADDR)
    host, _, port = addr.partition(":")
    app = create_app(data_dir=data_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")
