"""The HTTP service: model registry and query endpoints."""

import pytest
from fastapi.testclient import TestClient

from ctprop.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def loaded(client, demo8_text):
    reply = client.post("/nets", json={"text": demo8_text, "name": "demo8"})
    assert reply.status_code == 200
    return reply.json()["id"]


class TestRegistry:
    def test_health(self, client):
        assert client.get("/health").json() == {"status": "ok"}

    def test_upload_and_describe(self, client, demo8_text):
        reply = client.post("/nets", json={"text": demo8_text, "name": "demo8"})
        body = reply.json()
        assert body["bayesian"] is True
        assert body["unspecified_roots"] == []
        assert len(body["variables"]) == 8
        net_id = body["id"]
        assert client.get(f"/nets/{net_id}").json()["name"] == "demo8"
        ids = [n["id"] for n in client.get("/nets").json()]
        assert net_id in ids

    def test_delete(self, client, loaded):
        assert client.delete(f"/nets/{loaded}").status_code == 200
        assert client.get(f"/nets/{loaded}").status_code == 404

    def test_parse_error_is_400_with_location(self, client):
        reply = client.post("/nets", json={"text": "variable a { a0 }\ncpt a { 0.4 }"})
        assert reply.status_code == 400
        assert "line 2" in reply.json()["detail"]

    def test_unknown_net_is_404(self, client):
        assert client.post("/nets/none/query", json={}).status_code == 404


class TestQueries:
    def test_posterior_query(self, client, loaded):
        reply = client.post(f"/nets/{loaded}/query", json={
            "targets": ["d"], "evidence": {"e": "e0"}, "posterior": True})
        assert reply.status_code == 200
        body = reply.json()
        assert body["scope"] == ["d"]
        assert body["is_probability"] is True
        values = {row["assignment"]["d"]: row["value"] for row in body["rows"]}
        assert values["d0"] == pytest.approx(0.325454557692, abs=1e-10)
        assert sum(values.values()) == pytest.approx(1.0)

    def test_trace_and_check(self, client, loaded):
        reply = client.post(f"/nets/{loaded}/query", json={
            "targets": ["d", "e"], "trace": True, "check": True})
        body = reply.json()
        assert body["check"] == "PASS"
        assert body["trace"][0].startswith("STEP 1: pick={a,e,f,g}")

    def test_one_shot_query(self, client, demo8_text):
        reply = client.post("/query", json={
            "net_text": demo8_text, "targets": ["c"], "posterior": True})
        values = [row["value"] for row in reply.json()["rows"]]
        assert values == pytest.approx([0.4, 0.6])

    def test_zero_probability_evidence_is_409(self, client, demo8_text):
        crafted = demo8_text.replace("cpt c { 0.4, 0.6 }", "cpt c { 1.0, 0.0 }")
        reply = client.post("/query", json={
            "net_text": crafted, "targets": ["d"],
            "evidence": {"c": "c1"}, "posterior": True})
        assert reply.status_code == 409
        assert "c1" in reply.json()["detail"]

    def test_unknown_variable_is_400(self, client, loaded):
        reply = client.post(f"/nets/{loaded}/query", json={"targets": ["zz"]})
        assert reply.status_code == 400

    def test_unknown_state_is_400(self, client, loaded):
        reply = client.post(f"/nets/{loaded}/query", json={
            "targets": ["d"], "evidence": {"e": "nope"}})
        assert reply.status_code == 400

    def test_unknown_strategy_is_400(self, client, loaded):
        reply = client.post(f"/nets/{loaded}/query", json={
            "targets": ["d"], "strategy": "psychic"})
        assert reply.status_code == 400

    def test_semi_net_query_warns_about_potentials(self, client):
        text = ("variable a { a0, a1 }\nvariable b { b0, b1 }\n"
                "cpt b | a { 0.3, 0.7, 0.9, 0.1 }\n")
        reply = client.post("/query", json={"net_text": text, "targets": ["b"]})
        body = reply.json()
        assert body["is_probability"] is False
        assert any("potential" in w for w in body["warnings"])

    def test_strategies_agree(self, client, loaded):
        rows = []
        for strategy in ("default", "first-leaf", "largest-leaf", "random"):
            reply = client.post(f"/nets/{loaded}/query", json={
                "targets": ["d"], "evidence": {"e": "e1"},
                "strategy": strategy, "seed": 5})
            rows.append([r["value"] for r in reply.json()["rows"]])
        for other in rows[1:]:
            assert other == pytest.approx(rows[0], rel=1e-9)
