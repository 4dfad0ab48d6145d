from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from outfox.analytics import canonical_stats_json
from outfox.api import create_app
from outfox.config import DeploymentConfig, round_config_to_dict, TokenEntry
from outfox.domain import Annotator, Label, LABEL_ORDER, Prediction, Role, RoundConfig
from outfox.service import Platform
from outfox.store import EventStore

E, N, C = Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION


class ConstStub:
    """Always predicts one fixed label; fooled iff the target differs."""

    id = "const-neutral"

    def __init__(self, label: Label = N):
        self.label = label

    def classify(self, context, hypothesis) -> Prediction:
        rest = 0.1
        return Prediction(
            {lab: (0.8 if lab is self.label else rest) for lab in LABEL_ORDER}
        )


ANNOTATORS = [
    Annotator(id="w1", role=Role.WRITER),
    Annotator(id="w2", role=Role.WRITER),
    Annotator(id="v1", role=Role.VERIFIER),
    Annotator(id="v2", role=Role.VERIFIER),
    Annotator(id="v3", role=Role.VERIFIER),
]

TOKENS = [
    TokenEntry(token="tok-admin", annotator_id="admin", admin=True),
    TokenEntry(token="tok-w1", annotator_id="w1"),
    TokenEntry(token="tok-w2", annotator_id="w2"),
    TokenEntry(token="tok-v1", annotator_id="v1"),
    TokenEntry(token="tok-v2", annotator_id="v2"),
    TokenEntry(token="tok-v3", annotator_id="v3"),
]


def _auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture()
def client_and_platform(tmp_path):
    config = DeploymentConfig(
        data_dir=tmp_path, annotators=ANNOTATORS, tokens=TOKENS,
    )
    platform = Platform(
        store=EventStore(None),
        roster=config.annotator_map(),
        registry={"const-neutral": ConstStub()},
    )
    app = create_app(platform, config)
    return TestClient(app), platform


def _open_round(client, number: int = 1) -> None:
    config = RoundConfig.for_round(number, ensemble=("const-neutral",), rng_seed=7)
    response = client.post(
        "/api/rounds", json={"config": round_config_to_dict(config)}, headers=_auth("tok-admin")
    )
    assert response.status_code == 200, response.text
    for i in range(6):
        response = client.post(
            "/api/contexts",
            json={
                "id": f"ctx-{number}-{i}",
                "text": f"The castle of Arden opened in 19{i:02d} and drew many visitors.",
                "genre": "wiki",
                "round": number,
            },
            headers=_auth("tok-admin"),
        )
        assert response.status_code == 200, response.text


class TestAuth:
    def test_missing_token(self, client_and_platform):
        client, _ = client_and_platform
        assert client.post("/api/sessions", json={"writer_id": "w1", "round": 1}).status_code == 401

    def test_unknown_token(self, client_and_platform):
        client, _ = client_and_platform
        response = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-nope")
        )
        assert response.status_code == 401

    def test_admin_required_for_rounds(self, client_and_platform):
        client, _ = client_and_platform
        response = client.post(
            "/api/rounds",
            json={"config": round_config_to_dict(RoundConfig.for_round(1))},
            headers=_auth("tok-w1"),
        )
        assert response.status_code == 403

    def test_token_must_match_writer(self, client_and_platform):
        client, _ = client_and_platform
        _open_round(client)
        response = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w2")
        )
        assert response.status_code == 403


class TestWriterFlow:
    def test_fooling_flow_to_b1(self, client_and_platform):
        client, platform = client_and_platform
        _open_round(client)

        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        # first session of a fresh round targets entailment, phrased for writers
        assert session["target_phrase"] == "definitely correct"
        assert "context" in session and session["tries_remaining"] == 5

        feedback = client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened."},
            headers=_auth("tok-w1"),
        ).json()
        assert feedback["fooled"] is True  # stub says neutral, target entailment
        assert abs(sum(feedback["probabilities"].values()) - 1.0) < 1e-9
        assert feedback["state"] == "awaiting_reason"

        ack = client.post(
            f"/api/sessions/{session['session_id']}/reason",
            json={"text": "the model ignored the opening date"},
            headers=_auth("tok-w1"),
        ).json()
        assert ack["state"] == "closed_fooled"

        # verification: blind case view, two agreeing verdicts resolve B1
        case = client.get(
            "/api/verify/next", params={"verifier": "v1"}, headers=_auth("tok-v1")
        ).json()["case"]
        assert case is not None
        assert "writer_label" not in case and "target" not in case
        first = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth("tok-v1")
        ).json()
        assert first["status"] == "needs_first_pair"
        second = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "entailment"}, headers=_auth("tok-v2")
        ).json()
        assert second["status"] == "resolved"
        assert second["fate"] == "B1"
        assert second["gold"] == "entailment"

    def test_exhaustion_flow(self, client_and_platform):
        client, platform = client_and_platform
        _open_round(client)
        # drain the first session (target e) then take the second (target n):
        # the neutral stub answers neutral, so the writer cannot fool it
        first = client.post(
            "/api/sessions", json={"writer_id": "w2", "round": 1}, headers=_auth("tok-w2")
        ).json()
        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        assert session["target_phrase"].startswith("neither")
        for i in range(5):
            feedback = client.post(
                f"/api/sessions/{session['session_id']}/attempts",
                json={"hypothesis": f"attempt number {i}"},
                headers=_auth("tok-w1"),
            ).json()
            assert feedback["fooled"] is False
        assert feedback["state"] == "closed_exhausted"
        assert feedback["tries_remaining"] == 0
        sixth = client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "one more"},
            headers=_auth("tok-w1"),
        )
        assert sixth.status_code == 409

    def test_attempt_idempotency_key(self, client_and_platform):
        client, platform = client_and_platform
        _open_round(client)
        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        first = client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened.", "try_index": 1},
            headers=_auth("tok-w1"),
        ).json()
        # network retry: same try_index, same hypothesis -> replayed, not duplicated
        retry = client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened.", "try_index": 1},
            headers=_auth("tok-w1"),
        ).json()
        assert retry["replayed"] is True
        assert retry["probabilities"] == first["probabilities"]
        assert retry["fooled"] == first["fooled"]
        _, live_session = platform._session(session["session_id"])
        assert len(live_session.attempts) == 1
        # a conflicting body under the same key is an error
        conflict = client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "Different text.", "try_index": 1},
            headers=_auth("tok-w1"),
        )
        assert conflict.status_code == 400

    def test_verdict_idempotency(self, client_and_platform):
        client, platform = client_and_platform
        _open_round(client)
        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened."},
            headers=_auth("tok-w1"),
        )
        client.post(
            f"/api/sessions/{session['session_id']}/reason",
            json={"text": "why"},
            headers=_auth("tok-w1"),
        )
        case = client.get(
            "/api/verify/next", params={"verifier": "v1"}, headers=_auth("tok-v1")
        ).json()["case"]
        one = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth("tok-v1")
        ).json()
        # double-click: identical repeat is acknowledged, not recorded twice
        two = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth("tok-v1")
        ).json()
        assert two["replayed"] is True
        assert two["status"] == one["status"] == "needs_first_pair"
        live_case = platform.rounds[1].queue.get(case["case_id"])
        assert len(live_case.verdicts) == 1
        # a conflicting verdict from the same verifier is rejected
        conflict = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "c"}, headers=_auth("tok-v1")
        )
        assert conflict.status_code == 400


class TestNeedsThirdFlow:
    def test_split_pair_escalates_then_resolves(self, client_and_platform):
        client, platform = client_and_platform
        _open_round(client)
        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened."},
            headers=_auth("tok-w1"),
        )
        client.post(
            f"/api/sessions/{session['session_id']}/reason",
            json={"text": "why"}, headers=_auth("tok-w1"),
        )
        case = client.get(
            "/api/verify/next", params={"verifier": "v1"}, headers=_auth("tok-v1")
        ).json()["case"]
        client.post(f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth("tok-v1"))
        split = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "c"}, headers=_auth("tok-v2")
        ).json()
        assert split["status"] == "needs_third"
        # the queue offers the case to the third verifier
        next_case = client.get(
            "/api/verify/next", params={"verifier": "v3"}, headers=_auth("tok-v3")
        ).json()["case"]
        assert next_case["case_id"] == case["case_id"]
        final = client.post(
            f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth("tok-v3")
        ).json()
        assert final["status"] == "resolved"
        assert final["fate"] == "B2"


class TestStatsAndExport:
    def _run_small_round(self, client):
        _open_round(client)
        session = client.post(
            "/api/sessions", json={"writer_id": "w1", "round": 1}, headers=_auth("tok-w1")
        ).json()
        client.post(
            f"/api/sessions/{session['session_id']}/attempts",
            json={"hypothesis": "The castle opened."}, headers=_auth("tok-w1"),
        )
        client.post(
            f"/api/sessions/{session['session_id']}/reason",
            json={"text": "why"}, headers=_auth("tok-w1"),
        )
        case = client.get(
            "/api/verify/next", params={"verifier": "v1"}, headers=_auth("tok-v1")
        ).json()["case"]
        for tok in ("tok-v1", "tok-v2"):
            client.post(f"/api/verify/{case['case_id']}", json={"label": "e"}, headers=_auth(tok))
        client.post("/api/rounds/1/close", headers=_auth("tok-admin"))
        client.post("/api/rounds/1/splits", headers=_auth("tok-admin"))

    def test_stats_bytes_match_library_serialization(self, client_and_platform):
        client, platform = client_and_platform
        self._run_small_round(client)
        response = client.get("/api/rounds/1/stats", headers=_auth("tok-admin"))
        assert response.status_code == 200
        assert response.content == canonical_stats_json(platform.round_stats(1)).encode()

    def test_export_stream(self, client_and_platform):
        client, platform = client_and_platform
        self._run_small_round(client)
        response = client.get(
            "/api/rounds/1/export", params={"split": "train"}, headers=_auth("tok-admin")
        )
        assert response.status_code == 200
        lines = [line for line in response.text.splitlines() if line]
        assert len(lines) == 1  # the single B1 example, dev/test sizes were 0
        record = json.loads(lines[0])
        assert record["label"] == "e"
        assert record["reason"] == "why"

    def test_unknown_split_rejected(self, client_and_platform):
        client, _ = client_and_platform
        self._run_small_round(client)
        response = client.get(
            "/api/rounds/1/export", params={"split": "validation"}, headers=_auth("tok-admin")
        )
        assert response.status_code == 400

    def test_stats_for_unknown_round_is_404(self, client_and_platform):
        client, _ = client_and_platform
        response = client.get("/api/rounds/9/stats", headers=_auth("tok-admin"))
        assert response.status_code in (400, 404)
