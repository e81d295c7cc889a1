"""
Tests for the HTTP API (FastAPI TestClient against a temporary run store).
"""
import asyncio

import pytest
from fastapi.testclient import TestClient

from tests.conftest import SCENARIOS

SMALL_GRID = {"n_space": 6, "n_angle": 6, "n_fading": 4}


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setenv("FRUSTRATION_DB_PATH", str(tmp_path / "runs.db"))
    monkeypatch.setenv("FRUSTRATION_WORKERS", "2")
    monkeypatch.setenv("FRUSTRATION_BLOCK_SIZE", "100")
    from main import app

    with TestClient(app) as c:
        yield c


@pytest.fixture
def hertzian_payload():
    return {"text": (SCENARIOS / "hertzian_disk.ini").read_text(encoding="utf-8"), "format": "ini"}


@pytest.fixture
def plfree_payload():
    return {"text": (SCENARIOS / "pathloss_free.ini").read_text(encoding="utf-8"), "format": "ini"}


class TestCurve:
    def test_points(self, client, hertzian_payload):
        r = client.post("/curve/", json={"scenario": hertzian_payload, "c_min": 0.1, "c_max": 1.9, "points": 5})
        assert r.status_code == 200
        body = r.json()
        assert len(body["points"]) == 5
        assert body["points"][0]["p"] == 0.0
        assert len(body["scenario_hash"]) == 64

    def test_threshold_above_plateau(self, client, hertzian_payload):
        r = client.post("/curve/", json={"scenario": hertzian_payload, "c_min": 0.1, "c_max": 3.0, "points": 5})
        assert r.status_code == 400
        assert r.json()["detail"].startswith("[DOMAIN]")

    def test_broken_scenario(self, client):
        r = client.post("/curve/", json={"scenario": {"text": "[window]\nshape = disk\n"}, "c_min": 0.1, "c_max": 1.0})
        assert r.status_code == 400
        assert "[SCENARIO]" in r.json()["detail"]

    def test_request_validation(self, client, hertzian_payload):
        r = client.post("/curve/", json={"scenario": hertzian_payload, "c_min": -1.0, "c_max": 1.0})
        assert r.status_code == 422


class TestClassify:
    def test_verdict(self, client, plfree_payload):
        r = client.post("/classify/", json={
            "scenario": plfree_payload, "b": [2, 2, 2, 2], "c": [1.2, 1.2, 1.1, 1.1], "resolution": SMALL_GRID,
        })
        assert r.status_code == 200
        body = r.json()
        assert body["verdict"]["verdict"] == "Exponential"
        assert body["record"].startswith("verdict=Exponential case=1")

    def test_vector_length(self, client, plfree_payload):
        r = client.post("/classify/", json={"scenario": plfree_payload, "b": [0, 0], "c": [1, 1, 1, 1]})
        assert r.status_code == 422


class TestMinimize:
    def test_direct_uplink(self, client, hertzian_payload):
        r = client.post("/minimize/", json={"scenario": hertzian_payload, "kind": "updir", "c": 1.1, "b": 0.9})
        assert r.status_code == 200
        summary = r.json()["summary"]
        assert summary["entropy"] > 0
        assert set(summary["multipliers"]) >= {"beta", "delta"}

    def test_wrong_model(self, client, hertzian_payload):
        r = client.post("/minimize/", json={"scenario": hertzian_payload, "kind": "plfree-dodir", "c": 0.9, "b": 0.5})
        assert r.status_code == 400
        assert r.json()["detail"].startswith("[MODEL]")


class TestMonteCarlo:
    def _start(self, client, payload, **extra):
        body = {"scenario": payload, "lam": 50, "n_samples": 300, "c": 1.1, "b_fraction": 0.3, "seed": 4}
        body.update(extra)
        return client.post("/mc/start", json=body)

    def test_run_lifecycle(self, client, hertzian_payload):
        r = self._start(client, hertzian_payload)
        assert r.status_code == 200
        run_id = r.json()["run_id"]

        status = client.get(f"/mc/{run_id}/status").json()
        assert status["status"] == "completed"
        assert status["processed"] == 300

        report = client.get(f"/mc/{run_id}/report").json()
        assert report["n_samples"] == 300
        assert report["seed"]["block_size"] == 100

        hits = client.get(f"/mc/{run_id}/hits").json()
        assert len(hits) == report["hit_count"] == status["hit_count"]

        recent = client.get("/mc/").json()
        assert run_id in [row["run_id"] for row in recent]

    def test_progress_written_per_block(self, client, hertzian_payload, monkeypatch):
        from utils import db

        written = []
        original = db.update_progress

        async def recording(run_id, processed):
            written.append(processed)
            await original(run_id, processed)

        monkeypatch.setattr(db, "update_progress", recording)
        run_id = self._start(client, hertzian_payload).json()["run_id"]
        assert written == [100, 200, 300]
        assert client.get(f"/mc/{run_id}/status").json()["processed"] == 300

    def test_same_seed_same_report(self, client, hertzian_payload):
        a = self._start(client, hertzian_payload).json()["run_id"]
        b = self._start(client, hertzian_payload).json()["run_id"]
        ra = client.get(f"/mc/{a}/report").json()
        rb = client.get(f"/mc/{b}/report").json()
        ra.pop("wall_clock_s")
        rb.pop("wall_clock_s")
        assert ra == rb

    def test_threshold_above_plateau(self, client, hertzian_payload):
        r = self._start(client, hertzian_payload, c=5.0)
        assert r.status_code == 400

    def test_fraction_must_be_below_one(self, client, hertzian_payload):
        r = self._start(client, hertzian_payload, b_fraction=1.0)
        assert r.status_code == 400

    def test_unknown_run(self, client):
        assert client.get("/mc/nope/status").status_code == 404
        assert client.get("/mc/nope/hits").status_code == 404

    def test_rate_limit(self, client, hertzian_payload):
        codes = [self._start(client, hertzian_payload, n_samples=10).status_code for _ in range(6)]
        assert codes[:5] == [200] * 5
        assert codes[5] == 429


class TestHeaders:
    def test_security_headers(self, client):
        r = client.get("/mc/")
        assert r.headers["X-Frame-Options"] == "DENY"
        assert r.headers["X-Content-Type-Options"] == "nosniff"
        assert r.headers["Content-Security-Policy"] == "default-src 'none'"


class TestRunStore:
    def test_progress_survives_in_store(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FRUSTRATION_DB_PATH", str(tmp_path / "runs.db"))
        from utils import db

        async def run():
            await db.init_db()
            run_id = await db.create_run("mc", "abc123", 300)
            await db.update_progress(run_id, 200)
            mid = await db.get_run(run_id)
            # late writes never move the counter backwards
            await db.update_progress(run_id, 100)
            return mid, await db.get_run(run_id)

        mid, late = asyncio.run(run())
        assert mid["status"] == "running"
        assert mid["processed"] == 200
        assert late["processed"] == 200
