from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from situ_talker import colorcode as cc
from situ_talker.repl import run_repl
from situ_talker.service import SessionStore, create_app
from situ_talker.world import EventKind


@pytest.fixture()
def client(session_store) -> TestClient:
    return TestClient(create_app(session_store))


def create_session(client: TestClient, world: str = "library") -> tuple[str, dict]:
    response = client.post("/sessions", json={"world": world})
    assert response.status_code == 200
    body = response.json()
    return body["session"], body


def test_create_session_enters_start_situation(client) -> None:
    session_id, body = create_session(client)
    assert body["turn"] == 1
    assert body["situation"]["label"] == "Library front"
    assert body["spoken"].endswith("Which area do you want?")


def test_create_restaurant_session(client) -> None:
    _, body = create_session(client, "restaurant")
    assert body["situation"]["label"] == "Maxim's de Paris"
    assert body["display"]["items"][0] == "1. Menu and Price"


def test_unknown_world_is_not_found(client) -> None:
    response = client.post("/sessions", json={"world": "nope"})
    assert response.status_code == 404
    assert response.json()["code"] == "not_found"


def test_utterance_turn(client) -> None:
    session_id, _ = create_session(client)
    response = client.post(f"/sessions/{session_id}/utterance", json={"text": "computer science"})
    body = response.json()
    assert body["spoken"] == "Please take this route."
    assert body["turn"] == 2


def test_empty_utterance_prompts_again(client) -> None:
    session_id, _ = create_session(client)
    body = client.post(f"/sessions/{session_id}/utterance", json={"text": ""}).json()
    assert body["kind"] == "prompt-again"


def test_unknown_session_is_not_found(client) -> None:
    response = client.post("/sessions/ghost/utterance", json={"text": "hi"})
    assert response.status_code == 404


def test_corrupted_author_request_is_corrected(client) -> None:
    session_id, _ = create_session(client)
    client.post(f"/sessions/{session_id}/event", json={"kind": "look_at", "target": 1135})
    body = client.post(
        f"/sessions/{session_id}/utterance", json={"text": "tel me abut the author"}
    ).json()
    assert body["spoken"].startswith("Mario Tokoro is a professor")


def test_event_turns_and_idempotent_reenter(client) -> None:
    session_id, _ = create_session(client)
    body = client.post(f"/sessions/{session_id}/event", json={"kind": "enter", "target": 11}).json()
    assert body["spoken"] == "Here we have books on computer science. What are you looking for?"
    again = client.post(f"/sessions/{session_id}/event", json={"kind": "enter", "target": 11}).json()
    assert again["kind"] == "no-change"


def test_unknown_event_target_is_informative(client) -> None:
    session_id, _ = create_session(client)
    body = client.post(f"/sessions/{session_id}/event", json={"kind": "enter", "target": 4000}).json()
    assert body["kind"] == "no-code"


def test_bad_event_body_is_rejected(client) -> None:
    session_id, _ = create_session(client)
    assert client.post(f"/sessions/{session_id}/event", json={"kind": "fly", "target": 1}).status_code == 400
    assert client.post(f"/sessions/{session_id}/event", json={"kind": "enter"}).status_code == 400


def test_scanline_with_valid_code_greets_object(client) -> None:
    session_id, _ = create_session(client)
    ppm = cc.scanline_to_ppm(cc.render_scanline(cc.encode_id(1135), 360), height=8)
    response = client.post(f"/sessions/{session_id}/scanline", content=ppm)
    body = response.json()
    assert body["spoken"].startswith("The title of this is")


def test_scanline_without_code_is_noop(client) -> None:
    session_id, _ = create_session(client)
    gray = cc.Scanline(tuple((120, 120, 120) for _ in range(100)))
    response = client.post(f"/sessions/{session_id}/scanline", content=cc.scanline_to_ppm(gray))
    body = response.json()
    assert body["kind"] == "no-code"


def test_truncated_raster_is_bad_request(client) -> None:
    session_id, _ = create_session(client)
    ppm = cc.scanline_to_ppm(cc.render_scanline(cc.encode_id(9), 90))
    response = client.post(f"/sessions/{session_id}/scanline", content=ppm[: len(ppm) // 2])
    assert response.status_code == 400
    assert response.json()["code"] == "bad_raster"


def test_state_view_mirrors_latest_turn(client) -> None:
    session_id, first = create_session(client)
    view = client.get(f"/sessions/{session_id}/state").json()
    assert view["turn"] == 1
    assert view["displayed"] == first["display"]
    assert view["transcript"] == [] or view["transcript"][-1]["turn"] == 1
    assert {a["id"] for a in view["adjacent"]} == {11, 24}

    client.post(f"/sessions/{session_id}/utterance", json={"text": "computer science"})
    client.post(f"/sessions/{session_id}/utterance", json={"text": "what is literature"})
    view = client.get(f"/sessions/{session_id}/state").json()
    assert view["turn"] == 3
    turns = [t["turn"] for t in view["transcript"]]
    assert turns == sorted(turns)


def test_get_state_does_not_mutate(client) -> None:
    session_id, _ = create_session(client)
    before = client.get(f"/sessions/{session_id}/state").json()
    after = client.get(f"/sessions/{session_id}/state").json()
    assert before == after


def test_fresh_session_transcript_has_only_greeting(session_store) -> None:
    session, _ = session_store.create("library")
    assert len(session.transcript) == 1
    assert session.transcript[0].input["type"] == "event"


def test_concurrent_requests_are_serialized(session_store) -> None:
    session, _ = session_store.create("library")
    errors = []

    def talk(text: str) -> None:
        try:
            for _ in range(5):
                session_store.utterance(session.id, text)
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=talk, args=(t,)) for t in ("computer science", "what is literature")]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    turns = [entry.turn for entry in session.transcript]
    assert turns == list(range(1, len(turns) + 1))


def test_repl_matches_api_transcript(session_store, world_store) -> None:
    import io

    commands = "\n".join(
        ["computer science", "/enter 11", "A book on language", "What is natural language?", "/quit"]
    )
    out = io.StringIO()
    repl_session_id = run_repl(session_store, "library", stdin=io.StringIO(commands), stdout=out)
    repl_transcript = [e.output["spoken"] for e in session_store.session(repl_session_id).transcript]

    api_store = SessionStore(world_store)
    session, _ = api_store.create("library")
    api_store.utterance(session.id, "computer science")
    api_store.event(session.id, EventKind.ENTER, 11)
    api_store.utterance(session.id, "A book on language")
    api_store.utterance(session.id, "What is natural language?")
    api_transcript = [e.output["spoken"] for e in session.transcript]

    assert repl_transcript == api_transcript


def test_transcript_log_written(tmp_path, world_store) -> None:
    store = SessionStore(world_store, log_dir=tmp_path)
    session, _ = store.create("library")
    store.utterance(session.id, "computer science")
    log = (tmp_path / f"{session.id}.jsonl").read_text().splitlines()
    assert len(log) == 2
