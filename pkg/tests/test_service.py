"""HTTP service: wire contract, secrecy, sequencing, durable rebuild."""

from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

from phishpond.service import ServiceConfig, create_app, load_config
from phishpond.store import StoreCorrupt


@pytest.fixture()
def store_path(tmp_path):
    return tmp_path / "events.jsonl"


@pytest.fixture()
def config(store_path):
    return ServiceConfig(store_path=store_path)


@pytest.fixture()
def client(config):
    with TestClient(create_app(config)) as c:
        yield c


def drive_to_end(client: TestClient, session_id: str, action: str = "avoid") -> dict:
    """Apply one action repeatedly until the session reaches a terminal state."""
    seq = client.get(f"/sessions/{session_id}").json()["next_seq"]
    while True:
        r = client.post(
            f"/sessions/{session_id}/actions",
            json={"expected_seq": seq, "action": action, "elapsed_s": 2},
        )
        assert r.status_code == 200, r.text
        body = r.json()
        seq = body["state"]["next_seq"]
        if body["state"]["status"] != "in_progress":
            return body["state"]


class TestSessionFlow:
    def test_create_and_first_worm(self, client):
        r = client.post("/sessions", json={"participant_id": "kim", "seed": 11})
        assert r.status_code == 201
        state = r.json()
        assert state["participant_id"] == "kim"
        assert state["status"] == "in_progress"
        assert state["score"] == 0 and state["lives"] == 5
        assert state["time_remaining_s"] == 600
        assert state["next_seq"] == 0
        worm = state["worm"]
        assert worm["index"] == 0 and worm["total"] == 10
        assert worm["url"].startswith("http")
        assert worm["helps_shown"] == 0

    def test_create_without_body(self, client):
        r = client.post("/sessions")
        assert r.status_code == 201
        assert r.json()["status"] == "in_progress"

    def test_same_seed_same_round(self, client):
        a = client.post("/sessions", json={"seed": 99}).json()
        b = client.post("/sessions", json={"seed": 99}).json()
        assert a["worm"]["url"] == b["worm"]["url"]

    def test_action_advances_state(self, client):
        sid = client.post("/sessions", json={"seed": 5}).json()["session_id"]
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 0, "action": "ask_teacher", "elapsed_s": 5},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["result"]["action"] == "ask_teacher"
        assert body["result"]["resolved"] is False
        assert isinstance(body["result"]["tip"], str) and body["result"]["tip"]
        assert body["state"]["time_remaining_s"] == 495
        assert body["state"]["next_seq"] == 1
        assert body["state"]["worm"]["helps_shown"] == 1

    def test_unknown_session(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.get("/sessions/nope").json()["error"] == "unknown_session"

    def test_terminal_session_rejects_actions(self, client):
        sid = client.post("/sessions", json={"seed": 1}).json()["session_id"]
        drive_to_end(client, sid)
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 50, "action": "eat", "elapsed_s": 0},
        )
        assert r.status_code == 409
        assert r.json()["error"] == "session_finished"


class TestValidation:
    def test_unknown_action_name(self, client):
        sid = client.post("/sessions", json={"seed": 2}).json()["session_id"]
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 0, "action": "nibble", "elapsed_s": 0},
        )
        assert r.status_code == 400
        assert r.json()["error"] == "malformed_action"

    def test_elapsed_out_of_range(self, client):
        sid = client.post("/sessions", json={"seed": 2}).json()["session_id"]
        for bad in (-1, 3601):
            r = client.post(
                f"/sessions/{sid}/actions",
                json={"expected_seq": 0, "action": "eat", "elapsed_s": bad},
            )
            assert r.status_code == 400
            assert r.json()["error"] == "malformed_action"

    def test_malformed_body(self, client):
        sid = client.post("/sessions", json={"seed": 2}).json()["session_id"]
        r = client.post(f"/sessions/{sid}/actions", json={"action": "eat"})
        assert r.status_code == 400
        assert r.json()["error"] == "malformed_payload"
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 0, "action": "eat", "elapsed_s": "soon"},
        )
        assert r.status_code == 400


class TestSequencing:
    def test_stale_seq_conflicts(self, client):
        sid = client.post("/sessions", json={"seed": 3}).json()["session_id"]
        ok = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 0, "action": "avoid", "elapsed_s": 1},
        )
        assert ok.status_code == 200
        stale = client.post(
            f"/sessions/{sid}/actions",
            json={"expected_seq": 0, "action": "avoid", "elapsed_s": 1},
        )
        assert stale.status_code == 409
        assert stale.json()["error"] == "sequence_conflict"

    def test_concurrent_actions_exactly_one_wins(self, client):
        sid = client.post("/sessions", json={"seed": 4}).json()["session_id"]
        results = []
        barrier = threading.Barrier(2)

        def fire():
            barrier.wait()
            r = client.post(
                f"/sessions/{sid}/actions",
                json={"expected_seq": 0, "action": "ask_teacher", "elapsed_s": 0},
            )
            results.append(r.status_code)

        threads = [threading.Thread(target=fire) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [200, 409]
        assert client.get(f"/sessions/{sid}").json()["next_seq"] == 1


class TestSecrecy:
    def test_no_truth_or_seed_before_the_end(self, client):
        r = client.post("/sessions", json={"seed": 1234}).json()
        sid = r["session_id"]
        payloads = [json.dumps(r)]
        for seq in range(3):
            body = client.post(
                f"/sessions/{sid}/actions",
                json={"expected_seq": seq, "action": "avoid", "elapsed_s": 1},
            ).json()
            payloads.append(json.dumps(body))
        payloads.append(json.dumps(client.get(f"/sessions/{sid}").json()))
        for text in payloads:
            for forbidden in ('"truth"', '"seed"', '"verdict"', '"cues"', '"legit"', '"phish"'):
                assert forbidden not in text, forbidden

    def test_summary_refused_mid_game(self, client):
        sid = client.post("/sessions", json={"seed": 1}).json()["session_id"]
        r = client.get(f"/sessions/{sid}/summary")
        assert r.status_code == 409
        assert r.json()["error"] == "session_in_progress"

    def test_summary_discloses_after_the_end(self, client):
        sid = client.post("/sessions", json={"seed": 1}).json()["session_id"]
        drive_to_end(client, sid)
        body = client.get(f"/sessions/{sid}/summary").json()
        assert body["seed"] == 1
        assert body["status"] in ("completed", "out_of_lives", "out_of_time")
        assert len(body["worms"]) == 10
        truths = {w["truth"] for w in body["worms"]}
        assert truths == {"legit", "phish"}
        phish = [w for w in body["worms"] if w["truth"] == "phish"]
        assert all(w["cues"] for w in phish)
        assert {"rule_id", "tip"} == set(phish[0]["cues"][0])


class TestAssessments:
    QUIZ = [
        {"url": "http://10.0.0.1/", "truth": "phish", "answer": "avoid"},
        {"url": "https://ok.com/", "truth": "legit", "answer": "eat"},
        {"url": "http://10.0.0.2/", "truth": "phish", "answer": "eat"},
        {"url": "https://ok2.com/", "truth": "legit", "answer": "eat"},
    ]

    def test_quiz_scoring(self, client):
        r = client.post(
            "/participants/kim/assessments",
            json={"phase": "pre", "kind": "quiz", "answers": self.QUIZ},
        )
        assert r.status_code == 201
        assert r.json() == {
            "participant_id": "kim",
            "phase": "pre",
            "kind": "quiz",
            "score": 75.0,
        }

    def test_sus_scoring(self, client):
        r = client.post(
            "/participants/kim/assessments",
            json={"phase": "post", "kind": "sus", "responses": [3] * 10},
        )
        assert r.status_code == 201
        assert r.json()["score"] == 50.0

    def test_duplicate_phase_rejected(self, client):
        payload = {"phase": "pre", "kind": "quiz", "answers": self.QUIZ}
        assert client.post("/participants/kim/assessments", json=payload).status_code == 201
        r = client.post("/participants/kim/assessments", json=payload)
        assert r.status_code == 409
        assert r.json()["error"] == "duplicate_phase"

    def test_same_phase_quiz_and_sus_coexist(self, client):
        quiz = {"phase": "post", "kind": "quiz", "answers": self.QUIZ}
        sus = {"phase": "post", "kind": "sus", "responses": [4] * 10}
        assert client.post("/participants/kim/assessments", json=quiz).status_code == 201
        assert client.post("/participants/kim/assessments", json=sus).status_code == 201

    @pytest.mark.parametrize(
        "payload",
        [
            {"phase": "mid", "kind": "quiz", "answers": QUIZ},
            {"phase": "pre", "kind": "poll", "answers": QUIZ},
            {"phase": "pre", "kind": "quiz"},
            {"phase": "pre", "kind": "quiz", "answers": []},
            {"phase": "pre", "kind": "sus"},
            {"phase": "pre", "kind": "sus", "responses": [9] * 10},
            {
                "phase": "pre",
                "kind": "quiz",
                "answers": [{"url": "https://x.com/", "truth": "fake", "answer": "eat"}],
            },
            {
                "phase": "pre",
                "kind": "quiz",
                "answers": [{"url": "https://x.com/", "truth": "phish", "answer": "ask_teacher"}],
            },
        ],
    )
    def test_bad_assessments_rejected(self, client, payload):
        r = client.post("/participants/kim/assessments", json=payload)
        assert r.status_code == 400


class TestReport:
    def submit_cohort(self, client, n=3):
        for i in range(n):
            pid = f"p{i}"
            for phase, good in (("pre", i), ("post", 8 + (i % 2))):
                answers = [
                    {
                        "url": f"http://10.0.0.{j}/",
                        "truth": "phish",
                        "answer": "avoid" if j < good else "eat",
                    }
                    for j in range(10)
                ]
                r = client.post(
                    f"/participants/{pid}/assessments",
                    json={"phase": phase, "kind": "quiz", "answers": answers},
                )
                assert r.status_code == 201

    def test_insufficient_data(self, client):
        r = client.get("/report")
        assert r.status_code == 409
        assert r.json()["error"] == "insufficient_data"
        self.submit_cohort(client, n=1)
        assert client.get("/report").status_code == 409

    def test_report_fields(self, client):
        self.submit_cohort(client, n=4)
        sid = client.post("/sessions", json={"participant_id": "p0", "seed": 9}).json()[
            "session_id"
        ]
        drive_to_end(client, sid)
        body = client.get("/report").json()
        assert body["participants"] == 4
        assert body["df"] == 3
        assert body["t"] < 0  # post scores are higher
        assert 0 <= body["p_two_tailed"] <= 1
        assert body["post_above_80"] == 2  # 90s count, scores of exactly 80 do not
        assert body["sessions_played"] == 1
        assert body["sus_mean"] is None

    def test_incomplete_participants_do_not_break_the_report(self, client):
        self.submit_cohort(client, n=2)
        r = client.post(
            "/participants/lonely/assessments",
            json={
                "phase": "pre",
                "kind": "quiz",
                "answers": [{"url": "https://x.com/", "truth": "legit", "answer": "eat"}],
            },
        )
        assert r.status_code == 201
        body = client.get("/report").json()
        assert body["participants"] == 2


class TestRebuild:
    def test_restart_restores_sessions_and_assessments(self, config):
        with TestClient(create_app(config)) as client:
            sid_done = client.post("/sessions", json={"seed": 21}).json()["session_id"]
            final = drive_to_end(client, sid_done)
            sid_live = client.post("/sessions", json={"seed": 22}).json()["session_id"]
            client.post(
                f"/sessions/{sid_live}/actions",
                json={"expected_seq": 0, "action": "ask_teacher", "elapsed_s": 7},
            )
            live = client.get(f"/sessions/{sid_live}").json()
            summary_before = client.get(f"/sessions/{sid_done}/summary").json()
            client.post(
                "/participants/kim/assessments",
                json={"phase": "pre", "kind": "sus", "responses": [4] * 10},
            )

        with TestClient(create_app(config)) as client:
            assert client.get(f"/sessions/{sid_done}").json() == final
            assert client.get(f"/sessions/{sid_live}").json() == live
            assert client.get(f"/sessions/{sid_done}/summary").json() == summary_before
            r = client.post(
                "/participants/kim/assessments",
                json={"phase": "pre", "kind": "sus", "responses": [4] * 10},
            )
            assert r.status_code == 409  # still remembered as submitted
            next_seq = live["next_seq"]
            r = client.post(
                f"/sessions/{sid_live}/actions",
                json={"expected_seq": next_seq, "action": "avoid", "elapsed_s": 1},
            )
            assert r.status_code == 200

    def test_torn_tail_is_dropped_on_rebuild(self, config, store_path):
        with TestClient(create_app(config)) as client:
            sid = client.post("/sessions", json={"seed": 31}).json()["session_id"]
            client.post(
                f"/sessions/{sid}/actions",
                json={"expected_seq": 0, "action": "avoid", "elapsed_s": 1},
            )
        with open(store_path, "ab") as fh:
            fh.write(b'{"type": "action", "session_id"')
        with TestClient(create_app(config)) as client:
            assert client.get(f"/sessions/{sid}").json()["next_seq"] == 1

    def test_tampered_action_fails_the_digest_check(self, config, store_path):
        with TestClient(create_app(config)) as client:
            sid = client.post("/sessions", json={"seed": 32}).json()["session_id"]
            client.post(
                f"/sessions/{sid}/actions",
                json={"expected_seq": 0, "action": "avoid", "elapsed_s": 1},
            )
        lines = store_path.read_text().splitlines()
        tampered = json.loads(lines[-1])
        tampered["elapsed_s"] = 99
        lines[-1] = json.dumps(tampered, sort_keys=True, separators=(",", ":"))
        store_path.write_text("\n".join(lines) + "\n")
        with pytest.raises(StoreCorrupt):
            create_app(ServiceConfig(store_path=store_path))

    def test_corpus_swap_is_refused(self, config, store_path, tmp_path):
        with TestClient(create_app(config)) as client:
            client.post("/sessions", json={"seed": 33})
        other = tmp_path / "other.txt"
        other.write_text(
            "id = other\n"
            + "\n".join(f"https://ok{i}.com/ | legit" for i in range(5))
            + "\n"
            + "\n".join(f"http://10.0.0.{i}/ | phish" for i in range(5))
            + "\n"
        )
        with pytest.raises(StoreCorrupt):
            create_app(ServiceConfig(corpus_path=other, store_path=store_path))


class TestConfigFile:
    def test_load_config(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("x")
        path = tmp_path / "svc.conf"
        path.write_text(
            "# service settings\n"
            "corpus = c.txt\n"
            "store = events.jsonl\n"
            "host = 0.0.0.0\n"
            "port = 9001\n"
        )
        config = load_config(path)
        assert config.corpus_path == corpus.resolve()
        assert config.store_path == (tmp_path / "events.jsonl").resolve()
        assert config.host == "0.0.0.0"
        assert config.port == 9001
        assert config.rules_path is None

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "svc.conf"
        path.write_text("colour = blue\n")
        from phishpond.service import ConfigError

        with pytest.raises(ConfigError):
            load_config(path)

    def test_env_variable_is_honored(self, tmp_path, monkeypatch):
        path = tmp_path / "svc.conf"
        path.write_text("port = 7777\n")
        monkeypatch.setenv("PHISHPOND_CONFIG", str(path))
        from phishpond.service import config_from_env

        assert config_from_env().port == 7777
