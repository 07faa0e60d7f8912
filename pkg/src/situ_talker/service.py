"""Session host: in-memory sessions behind an HTTP+JSON API and the REPL.

Endpoints::

    POST /sessions                     {"world": name, "date": "YYYY-MM-DD"?}
    POST /sessions/{id}/utterance      {"text": ...}
    POST /sessions/{id}/event          {"kind": "enter"|"look_at", "target": id}
    POST /sessions/{id}/scanline       raw binary PPM body
    GET  /sessions/{id}/state

Every response carries the session's turn counter so clients can order
updates.  Error bodies are ``{"code": ..., "message": ...}``.  Requests
to one session are serialized by a per-session lock; distinct sessions
run concurrently.
"""

from __future__ import annotations

import datetime as dt
import itertools
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import colorcode
from .dialogue import DialogueState, TurnOutput, new_dialogue_state, step
from .world import EventKind, SituationEvent, World, WorldStore


@dataclass
class TranscriptEntry:
    turn: int
    input: dict
    output: dict


@dataclass
class Session:
    id: str
    world: World
    state: DialogueState
    transcript: list[TranscriptEntry] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Owns all live sessions; the REPL and the HTTP app share this object."""

    def __init__(self, worlds: WorldStore, log_dir: Optional[Path] = None):
        self.worlds = worlds
        self.log_dir = Path(log_dir) if log_dir else None
        self._sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)
        self._create_lock = threading.Lock()

    def create(self, world_name: str, date: Optional[dt.date] = None) -> tuple[Session, TurnOutput]:
        """Create a session and enter the world's start situation (turn 1)."""
        world = self.worlds.world(world_name)  # KeyError -> not found
        with self._create_lock:
            session_id = f"s{next(self._ids)}"
            session = Session(session_id, world, new_dialogue_state(world, date))
            self._sessions[session_id] = session
        with session.lock:
            event = SituationEvent(EventKind.ENTER, world.start, timestamp=0)
            output = step(session.state, event)
            self._record(session, {"type": "event", "kind": "enter", "target": world.start}, output)
        return session, output

    def session(self, session_id: str) -> Session:
        if session_id not in self._sessions:
            raise KeyError(f"unknown session {session_id!r}")
        return self._sessions[session_id]

    def utterance(self, session_id: str, text: str) -> TurnOutput:
        session = self.session(session_id)
        with session.lock:
            output = step(session.state, text)
            self._record(session, {"type": "utterance", "text": text}, output)
        return output

    def event(self, session_id: str, kind: EventKind, target: int) -> TurnOutput:
        session = self.session(session_id)
        with session.lock:
            event = SituationEvent(kind, target, timestamp=len(session.transcript))
            output = step(session.state, event)
            self._record(session, {"type": "event", "kind": kind.value, "target": target}, output)
        return output

    def scanline(self, session_id: str, ppm: bytes) -> TurnOutput:
        """Decode a PPM raster; a valid code acts like looking at that object."""
        session = self.session(session_id)
        object_id = colorcode.decode_ppm(ppm)  # ValueError -> bad request
        if object_id is None:
            with session.lock:
                output = step(session.state, SituationEvent(EventKind.LOOK_AT, -1))
                self._record(session, {"type": "scanline", "decoded": None}, output)
            return output
        with session.lock:
            output = step(session.state, SituationEvent(EventKind.LOOK_AT, object_id))
            self._record(session, {"type": "scanline", "decoded": object_id}, output)
        return output

    def state_view(self, session_id: str, tail: int = 10) -> dict:
        """Read-only snapshot consistent with the latest completed turn."""
        session = self.session(session_id)
        with session.lock:
            state = session.state
            entry = state.situation
            adjacent = []
            if entry is not None:
                for sid in entry.adjacent:
                    neighbor = session.world.situations[sid]
                    adjacent.append({"id": sid, "label": neighbor.label})
            return {
                "session": session.id,
                "world": session.world.name,
                "turn": len(session.transcript),
                "date": state.date.isoformat(),
                "situation": (
                    {"id": entry.situation_id, "label": entry.label} if entry else None
                ),
                "start_situation": session.world.start,
                "displayed": {
                    "title": state.displayed.title,
                    "items": list(state.displayed.items),
                },
                "adjacent": adjacent,
                "transcript": [
                    {"turn": t.turn, "input": t.input, "output": t.output}
                    for t in session.transcript[-tail:]
                ],
            }

    def _record(self, session: Session, input_payload: dict, output: TurnOutput) -> None:
        entry = TranscriptEntry(
            turn=len(session.transcript) + 1,
            input=input_payload,
            output=output.to_payload(),
        )
        session.transcript.append(entry)
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            line = json.dumps({"turn": entry.turn, "input": entry.input, "output": entry.output})
            with open(self.log_dir / f"{session.id}.jsonl", "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def _turn_payload(session: Session, output: TurnOutput) -> dict:
    payload = output.to_payload()
    payload["session"] = session.id
    payload["turn"] = len(session.transcript)
    entry = session.state.situation
    payload["situation"] = (
        {"id": entry.situation_id, "label": entry.label} if entry else None
    )
    return payload


def create_app(store: SessionStore, ui_dir: Optional[Path] = None) -> FastAPI:
    """Build the FastAPI application around a session store."""
    app = FastAPI(title="situ-talker", version="0.1.0")

    def error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.exception_handler(KeyError)
    async def not_found(_request: Request, exc: KeyError):
        return error(404, "not_found", str(exc.args[0]) if exc.args else "not found")

    @app.post("/sessions")
    async def create_session(body: dict):
        world_name = body.get("world")
        if not world_name:
            return error(400, "bad_request", "missing 'world'")
        date = None
        if body.get("date"):
            try:
                date = dt.date.fromisoformat(body["date"])
            except ValueError:
                return error(400, "bad_request", f"bad date {body['date']!r}")
        try:
            session, output = store.create(world_name, date)
        except KeyError as exc:
            return error(404, "not_found", str(exc.args[0]))
        return _turn_payload(session, output)

    @app.post("/sessions/{session_id}/utterance")
    async def post_utterance(session_id: str, body: dict):
        output = store.utterance(session_id, body.get("text", ""))
        return _turn_payload(store.session(session_id), output)

    @app.post("/sessions/{session_id}/event")
    async def post_event(session_id: str, body: dict):
        kind_raw = str(body.get("kind", "enter")).lower()
        kinds = {"enter": EventKind.ENTER, "look_at": EventKind.LOOK_AT, "look": EventKind.LOOK_AT}
        if kind_raw not in kinds:
            return error(400, "bad_request", f"unknown event kind {kind_raw!r}")
        if not isinstance(body.get("target"), int):
            return error(400, "bad_request", "missing integer 'target'")
        output = store.event(session_id, kinds[kind_raw], body["target"])
        return _turn_payload(store.session(session_id), output)

    @app.post("/sessions/{session_id}/scanline")
    async def post_scanline(session_id: str, request: Request):
        data = await request.body()
        try:
            output = store.scanline(session_id, data)
        except ValueError as exc:
            return error(400, "bad_raster", str(exc))
        return _turn_payload(store.session(session_id), output)

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        return store.state_view(session_id)

    if ui_dir is not None and Path(ui_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
