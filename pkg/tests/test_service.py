from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

from xplain import PAPER_MAP_ID, PAPER_MAP_TEXT, parse_transcript, replay_session
from xplain.service import create_app

GOLDEN_PREFERENCE = {
    "version": "v1",
    "objective": "shortest",
    "locality": "segment:landmark:destination",
    "specificity": "every",
    "corpus": "concrete",
}
BASIC_PREFERENCE = {
    "version": "v1",
    "objective": "shortest",
    "locality": "global",
    "specificity": "every",
    "corpus": "concrete",
}

GOLDEN_SENTENCES = [
    "The robot moves east in grid 12.",
    "The robot moves north in grid 13.",
    "The robot moves east in grid 8.",
    "The robot moves north in grid 9.",
    "The robot stops in grid 4.",
]

GOLDEN_ANSWER = (
    "The robot moves east in grid 12, because it is part of the optimal robotic plan "
    "to achieve the shortest route, while taking a different action in grid 12 cannot "
    "guarantee the shortest route."
)


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "data"


@pytest.fixture
def client(data_dir):
    app = create_app(data_dir=data_dir)
    with TestClient(app) as test_client:
        yield test_client


def make_session(client, preference=None, map_id=PAPER_MAP_ID):
    response = client.post(
        "/v1/sessions", json={"mapId": map_id, "preference": preference or BASIC_PREFERENCE}
    )
    assert response.status_code == 201, response.text
    return response.json()


class TestMaps:
    def test_create_minimal_map(self, client):
        response = client.post("/v1/maps", content="SD")
        assert response.status_code == 201
        body = response.json()
        assert body["width"] == 2 and body["height"] == 1
        assert body["cells"] == ["start", "destination"]

    def test_create_bundled_text(self, client):
        response = client.post("/v1/maps", content=PAPER_MAP_TEXT)
        assert response.status_code == 201
        assert len(response.json()["cells"]) == 25

    def test_ragged_rejected(self, client):
        response = client.post("/v1/maps", content="SD\n...")
        assert response.status_code == 400
        assert response.json()["code"] == "RaggedRows"

    def test_bundled_map_present(self, client):
        response = client.get(f"/v1/maps/{PAPER_MAP_ID}")
        assert response.status_code == 200
        assert response.json()["start"] == 20

    def test_unknown_map(self, client):
        response = client.get("/v1/maps/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownMap"


class TestSessions:
    def test_golden_explanation_snapshot(self, client):
        snapshot = make_session(client, GOLDEN_PREFERENCE)
        assert snapshot["state"] == "explained"
        assert [s["text"] for s in snapshot["explanation"]["sentences"]] == GOLDEN_SENTENCES
        assert snapshot["metrics"] == {"moves": 8, "crowdedEntries": 2}
        assert snapshot["map"]["id"] == PAPER_MAP_ID
        assert snapshot["route"][0] == [20, "north"]

    def test_unknown_map_id(self, client):
        response = client.post(
            "/v1/sessions", json={"mapId": "missing", "preference": BASIC_PREFERENCE}
        )
        assert response.status_code == 404

    def test_obstacle_position_rejected(self, client):
        preference = dict(BASIC_PREFERENCE, locality="position:3")
        response = client.post(
            "/v1/sessions", json={"mapId": PAPER_MAP_ID, "preference": preference}
        )
        assert response.status_code == 422
        body = response.json()
        assert body["code"] == "PreferenceInvalid"
        assert body["details"]["violations"][0]["code"] == "PositionIsObstacle"

    def test_malformed_preference(self, client):
        preference = dict(BASIC_PREFERENCE, objective="fastest")
        response = client.post(
            "/v1/sessions", json={"mapId": PAPER_MAP_ID, "preference": preference}
        )
        assert response.status_code == 422
        assert response.json()["code"] == "PreferenceMalformed"

    def test_get_snapshot_round_trips(self, client):
        snapshot = make_session(client)
        again = client.get(f"/v1/sessions/{snapshot['id']}")
        assert again.status_code == 200
        assert again.json() == snapshot


class TestQuestion:
    def test_golden_answer(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/question", json={"state": 12, "action": "east"}
        )
        assert response.status_code == 200
        assert response.json()["answer"] == GOLDEN_ANSWER

    def test_not_in_explanation(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/question", json={"state": 24, "action": "north"}
        )
        assert response.status_code == 422
        assert response.json()["code"] == "NotInExplanation"

    def test_after_finalize_conflicts(self, client):
        snapshot = make_session(client)
        client.post(f"/v1/sessions/{snapshot['id']}/preference", json=BASIC_PREFERENCE)
        client.post(f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"})
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/question", json={"state": 12, "action": "east"}
        )
        assert response.status_code == 409
        assert response.json()["code"] == "WrongState"

    def test_unknown_action(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/question", json={"state": 12, "action": "up"}
        )
        assert response.status_code == 422
        assert response.json()["code"] == "UnknownAction"


class TestPreferenceAndConfirm:
    def test_hard_conflict_prompt(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/preference",
            json=dict(BASIC_PREFERENCE, objective="safest"),
        )
        assert response.status_code == 200
        body = response.json()
        assert body["conflict"] == "hard"
        assert "planning objective" in body["prompt"]

    def test_identical_is_none_conflict(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/preference", json=BASIC_PREFERENCE
        )
        assert response.json()["conflict"] == "none"

    def test_confirm_yes_finalizes(self, client):
        snapshot = make_session(client)
        client.post(f"/v1/sessions/{snapshot['id']}/preference", json=BASIC_PREFERENCE)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"}
        )
        assert response.status_code == 200
        assert response.json()["state"] == "finalized"

    def test_soft_update_changes_text_not_route(self, client):
        snapshot = make_session(client)
        client.post(
            f"/v1/sessions/{snapshot['id']}/preference",
            json=dict(BASIC_PREFERENCE, corpus="high_level"),
        )
        updated = client.post(
            f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"}
        ).json()
        assert updated["state"] == "explained"
        assert updated["route"] == snapshot["route"]
        before = [s["text"] for s in snapshot["explanation"]["sentences"]]
        after = [s["text"] for s in updated["explanation"]["sentences"]]
        assert before != after

    def test_bad_reply_rejected(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "maybe"}
        )
        assert response.status_code == 400

    def test_confirm_without_pending_is_wrong_state(self, client):
        snapshot = make_session(client)
        response = client.post(
            f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"}
        )
        assert response.status_code == 409


class TestTranscript:
    def test_fresh_session_events(self, client):
        snapshot = make_session(client)
        response = client.get(f"/v1/sessions/{snapshot['id']}/transcript")
        assert response.status_code == 200
        kinds = [json.loads(line)["kind"] for line in response.text.splitlines()]
        assert kinds == ["preference_set", "explained"]

    def test_question_recorded(self, client):
        snapshot = make_session(client)
        client.post(
            f"/v1/sessions/{snapshot['id']}/question", json={"state": 12, "action": "east"}
        )
        response = client.get(f"/v1/sessions/{snapshot['id']}/transcript")
        kinds = [json.loads(line)["kind"] for line in response.text.splitlines()]
        assert "question_asked" in kinds

    def test_finalized_is_last(self, client):
        snapshot = make_session(client)
        client.post(f"/v1/sessions/{snapshot['id']}/preference", json=BASIC_PREFERENCE)
        client.post(f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"})
        response = client.get(f"/v1/sessions/{snapshot['id']}/transcript")
        kinds = [json.loads(line)["kind"] for line in response.text.splitlines()]
        assert kinds[-1] == "finalized"

    def test_unknown_session(self, client):
        assert client.get("/v1/sessions/ghost/transcript").status_code == 404


class TestRoundTripAndDurability:
    def _drive_full_session(self, client):
        snapshot = make_session(client)
        session_id = snapshot["id"]
        client.post(f"/v1/sessions/{session_id}/question", json={"state": 12, "action": "east"})
        client.post(
            f"/v1/sessions/{session_id}/preference",
            json=dict(BASIC_PREFERENCE, corpus="high_level"),
        )
        client.post(f"/v1/sessions/{session_id}/confirm", json={"reply": "yes"})
        client.post(
            f"/v1/sessions/{session_id}/preference",
            json=dict(BASIC_PREFERENCE, objective="safest", corpus="high_level"),
        )
        client.post(f"/v1/sessions/{session_id}/confirm", json={"reply": "yes"})
        final = client.get(f"/v1/sessions/{session_id}").json()
        return session_id, final

    def test_offline_replay_matches_snapshot(self, client):
        session_id, final = self._drive_full_session(client)
        transcript = client.get(f"/v1/sessions/{session_id}/transcript").text
        from xplain import paper_map

        replayed = replay_session(
            paper_map(), parse_transcript(transcript), session_id=session_id
        )
        view = replayed.snapshot()
        for key, value in view.items():
            assert final[key] == value, key

    def test_restart_preserves_snapshots(self, data_dir):
        with TestClient(create_app(data_dir=data_dir)) as first:
            session_id, final = self._drive_full_session(first)
            map_body = first.post("/v1/maps", content="S.D").json()
        with TestClient(create_app(data_dir=data_dir)) as second:
            assert second.get(f"/v1/sessions/{session_id}").json() == final
            assert second.get(f"/v1/maps/{map_body['id']}").json() == map_body

    def test_restart_preserves_finalized_sessions(self, data_dir):
        with TestClient(create_app(data_dir=data_dir)) as first:
            snapshot = make_session(first)
            first.post(f"/v1/sessions/{snapshot['id']}/preference", json=BASIC_PREFERENCE)
            final = first.post(
                f"/v1/sessions/{snapshot['id']}/confirm", json={"reply": "yes"}
            ).json()
        with TestClient(create_app(data_dir=data_dir)) as second:
            assert second.get(f"/v1/sessions/{snapshot['id']}").json() == final

    def test_reads_are_idempotent(self, client, data_dir):
        snapshot = make_session(client)
        files_before = {
            path: path.read_bytes() for path in sorted(data_dir.rglob("*.jsonl"))
        }
        for _ in range(3):
            assert client.get(f"/v1/sessions/{snapshot['id']}").json() == snapshot
            client.get(f"/v1/sessions/{snapshot['id']}/transcript")
            client.get("/v1/maps")
        files_after = {
            path: path.read_bytes() for path in sorted(data_dir.rglob("*.jsonl"))
        }
        assert files_before == files_after


class TestConcurrency:
    def test_parallel_questions_on_distinct_sessions(self, client):
        ids = [make_session(client)["id"] for _ in range(4)]
        errors: list[str] = []

        def hammer(session_id: str) -> None:
            for _ in range(5):
                response = client.post(
                    f"/v1/sessions/{session_id}/question",
                    json={"state": 12, "action": "east"},
                )
                if response.status_code != 200:
                    errors.append(response.text)

        threads = [threading.Thread(target=hammer, args=(i,)) for i in ids]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert errors == []
        for session_id in ids:
            transcript = client.get(f"/v1/sessions/{session_id}/transcript").text
            assert len(transcript.splitlines()) == 7  # 2 start + 5 questions


class TestMisc:
    def test_options_exposes_display_labels(self, client):
        body = client.get("/v1/options").json()
        assert body["labels"]["locality:only:corridor"] == "Only Highways"
        assert "shortest" in body["objective"]

    def test_ui_served_when_built(self, tmp_path):
        from pathlib import Path

        dist = Path(__file__).resolve().parent.parent / "frontend" / "dist"
        if not dist.is_dir():
            pytest.skip("frontend not built")
        with TestClient(create_app(data_dir=tmp_path / "data", ui_dir=dist)) as client:
            response = client.get("/ui/")
            assert response.status_code == 200
            assert "Robot route explainer" in response.text

    def test_bad_json_body(self, client):
        response = client.post(
            "/v1/sessions", content=b"not json", headers={"content-type": "application/json"}
        )
        assert response.status_code == 400
