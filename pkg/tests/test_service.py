from __future__ import annotations

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from declink import gateway as gw
from declink.model import parse_session_log
from declink.service import (
    AlreadyResolved,
    EngineConfig,
    OrderViolation,
    SessionEngine,
    StorageFailure,
    UnknownQuestion,
    UnknownSession,
    create_app,
)
from conftest import GOLDEN_DIR


def golden_events():
    return parse_session_log((GOLDEN_DIR / "golden.jsonl").read_text().splitlines())


def golden_engine(tmp_path, subdir="svc"):
    gateway = gw.Gateway(
        gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=GOLDEN_DIR / "fixtures")
    )
    return SessionEngine(tmp_path / subdir, gateway, EngineConfig(),
                         snapshots_root=GOLDEN_DIR / "snapshots")


def action_record(ts, element="el-x"):
    return {"type": "action", "ts": ts, "element_id": element, "element_name": "X",
            "action_type": "MOVE"}


class TestSessionLifecycle:
    def test_create_session_fresh_and_distinct(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        a, b = engine.create_session(), engine.create_session()
        assert a != b
        assert engine.get_steps(a)["steps"] == []

    def test_storage_failure(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session("dup")
        with pytest.raises(StorageFailure):
            engine.create_session("dup")
        assert sid == "dup"

    def test_unknown_session(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        with pytest.raises(UnknownSession):
            engine.get_steps("nope")

    def test_21_actions_trigger_pipeline(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session()
        events = parse_session_log(
            json.dumps(action_record(float(i))) for i in range(21)
        )
        assert engine.append_events(sid, events) == 21
        steps = engine.get_steps(sid)["steps"]
        assert steps, "21st pending action must trigger processing"
        processed = sum(len(s["action_groups"][0]["action_refs"]) for s in steps)
        assert processed == 21

    def test_20_actions_do_not_trigger(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session()
        events = parse_session_log(json.dumps(action_record(float(i))) for i in range(20))
        engine.append_events(sid, events)
        assert engine.get_steps(sid)["steps"] == []

    def test_empty_batch(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session()
        assert engine.append_events(sid, []) == 0

    def test_order_violation(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session()
        engine.append_events(sid, parse_session_log([json.dumps(action_record(5.0))]))
        with pytest.raises(OrderViolation):
            engine.append_events(sid, parse_session_log([json.dumps(action_record(4.0))]))

    def test_record_stop_flushes_pending(self, tmp_path, heuristic_gateway):
        engine = SessionEngine(tmp_path, heuristic_gateway)
        sid = engine.create_session()
        lines = [json.dumps({"type": "control", "ts": 0.0, "kind": "record_start"}),
                 json.dumps(action_record(1.0)),
                 json.dumps({"type": "control", "ts": 2.0, "kind": "record_stop"})]
        engine.append_events(sid, parse_session_log(lines))
        assert len(engine.get_steps(sid)["steps"]) == 1


class TestGoldenSessionFlow:
    def test_questions_open_in_order_with_anchor_and_inference(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        view = engine.poll_questions(sid, since_revision=0)
        assert [x["step_id"] for x in view["exchanges"]] == ["s-001", "s-004"]
        q1, q2 = view["exchanges"]
        assert q1["inferred_rationale"] is None
        assert q2["inferred_rationale"]["text"].startswith("The 32 pixel spacing")
        assert q2["anchor"]["element_id"] == "el-index3"
        assert all(x["status"] == "open" for x in view["exchanges"])

    def test_poll_since_current_revision_is_empty(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        revision = engine.poll_questions(sid, 0)["revision"]
        assert engine.poll_questions(sid, revision)["exchanges"] == []

    def test_accepted_inference_resolves_strong(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        result = engine.submit_response(f"q-{sid}-s-004", "accepted")
        assert result == {"step_id": "s-004", "status": "resolved_strong"}
        entry = engine.get_documentation(sid)["steps"][4]
        assert entry["assessment"]["overall"] == "Strong"
        assert entry["rationale"].startswith("The 32px spacing")

    def test_answered_strong_resolves_strong(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        answer = ("Our users scan from the left, and the logo anchors the brand at "
                  "the start of that scan path.")
        result = engine.submit_response(f"q-{sid}-s-001", "answered", answer)
        assert result["status"] == "resolved_strong"

    def test_second_response_already_resolved(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        engine.submit_response(f"q-{sid}-s-004", "accepted")
        with pytest.raises(AlreadyResolved):
            engine.submit_response(f"q-{sid}-s-004", "accepted")

    def test_rejected_keeps_question_open_for_answer(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        assert engine.submit_response(f"q-{sid}-s-004", "rejected")["status"] == "question_pending"
        result = engine.submit_response(
            f"q-{sid}-s-001", "answered",
            "Our users scan from the left, and the logo anchors the brand at the start of that scan path.",
        )
        assert result["status"] == "resolved_strong"
        view = engine.poll_questions(sid, 0)
        statuses = {x["step_id"]: x["status"] for x in view["exchanges"]}
        assert statuses["s-004"] == "open"  # rejection left it awaiting an answer
        assert statuses["s-001"] == "resolved"

    def test_unknown_question(self, tmp_path):
        engine = golden_engine(tmp_path)
        with pytest.raises(UnknownQuestion):
            engine.submit_response("q-missing", "accepted")

    def test_open_exchanges_reference_weak_or_empty_steps(self, tmp_path):
        engine = golden_engine(tmp_path)
        sid = engine.create_session("golden")
        engine.append_events(sid, golden_events())
        steps = engine.get_steps(sid)["steps"]
        for step in steps:
            if step["exchange"] is not None and step["status"] == "question_pending":
                assert step["assessment"]["overall"] in ("Weak", "Empty")


class TestReplayDeterminism:
    def test_mid_session_kill_and_replay(self, tmp_path):
        events = golden_events()
        engine1 = golden_engine(tmp_path)
        sid = engine1.create_session("golden")
        engine1.append_events(sid, events[:40])
        before = engine1.get_steps(sid)

        # fresh engine over the same data dir = process restart
        engine2 = golden_engine(tmp_path)
        assert engine2.get_steps(sid) == before

        engine2.append_events(sid, events[40:])
        engine2.submit_response(f"q-{sid}-s-004", "accepted", at=1000.0)
        engine2.submit_response(
            f"q-{sid}-s-001", "answered",
            "Our users scan from the left, and the logo anchors the brand at the start of that scan path.",
            at=1001.0,
        )
        final = engine2.get_steps(sid)
        docs = engine2.get_documentation(sid)

        engine3 = golden_engine(tmp_path)
        assert engine3.get_steps(sid) == final
        assert engine3.get_documentation(sid) == docs
        rt2 = engine2._runtime(sid)
        rt3 = engine3._runtime(sid)
        assert rt3.summaries == rt2.summaries
        assert rt3.exchange_revisions == rt2.exchange_revisions
        assert rt3.question_order == rt2.question_order
        assert rt3.revision == rt2.revision

    def test_batching_does_not_change_steps(self, tmp_path):
        events = golden_events()
        engine_a = golden_engine(tmp_path, "one")
        sid_a = engine_a.create_session("golden")
        engine_a.append_events(sid_a, events)

        engine_b = golden_engine(tmp_path, "many")
        sid_b = engine_b.create_session("golden")
        for ev in events:
            engine_b.append_events(sid_b, [ev])

        assert engine_a.get_steps(sid_a) == engine_b.get_steps(sid_b)


class TestHttpApi:
    @pytest.fixture
    def client(self, tmp_path):
        engine = golden_engine(tmp_path)
        app = create_app(engine, poll_timeout=0.3)
        return TestClient(app)

    def _golden_records(self):
        return [json.loads(line) for line in (GOLDEN_DIR / "golden.jsonl").read_text().splitlines()]

    def test_full_loop(self, client):
        sid = client.post("/sessions").json()["session_id"]
        resp = client.post(f"/sessions/{sid}/events", json=self._golden_records())
        assert resp.status_code == 200
        assert resp.json()["accepted"] == 76

        questions = client.get(f"/sessions/{sid}/questions", params={"since": 0}).json()
        assert [x["step_id"] for x in questions["exchanges"]] == ["s-001", "s-004"]
        q2 = questions["exchanges"][1]

        resp = client.post(f"/questions/{q2['question_id']}/response", json={"mode": "accepted"})
        assert resp.json() == {"step_id": "s-004", "status": "resolved_strong"}

        docs = client.get(f"/sessions/{sid}/documentation").json()
        assert docs["steps"][4]["assessment"]["overall"] == "Strong"

        resp = client.post(f"/questions/{q2['question_id']}/response", json={"mode": "accepted"})
        assert resp.status_code == 409

    def test_snapshot_endpoint(self, client):
        sid = client.post("/sessions").json()["session_id"]
        client.post(f"/sessions/{sid}/events", json=self._golden_records())
        steps = client.get(f"/sessions/{sid}/steps").json()["steps"]
        ref = steps[0]["snapshot_refs"][0]
        resp = client.get(f"/sessions/{sid}/snapshots/{ref}")
        assert resp.status_code == 200
        assert resp.content.startswith(b"snapshot:")
        assert client.get(f"/sessions/{sid}/snapshots/feedfeed").status_code == 404

    def test_errors(self, client):
        assert client.get("/sessions/ghost/steps").status_code == 404
        assert client.post("/questions/ghost/response", json={"mode": "accepted"}).status_code == 404
        sid = client.post("/sessions").json()["session_id"]
        resp = client.post(f"/sessions/{sid}/events", json=[{"type": "mystery"}])
        assert resp.status_code == 422

    def test_long_poll_returns_when_question_appears(self, tmp_path):
        engine = golden_engine(tmp_path)
        app = create_app(engine, poll_timeout=10.0)
        client = TestClient(app)
        sid = client.post("/sessions").json()["session_id"]
        records = self._golden_records()

        def feed():
            time.sleep(0.2)
            TestClient(app).post(f"/sessions/{sid}/events", json=records)

        thread = threading.Thread(target=feed)
        thread.start()
        t0 = time.monotonic()
        resp = client.get(f"/sessions/{sid}/questions", params={"since": 0}).json()
        elapsed = time.monotonic() - t0
        thread.join()
        assert resp["exchanges"], "long poll should return once a question opens"
        assert elapsed < 10.0
