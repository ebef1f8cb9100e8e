import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import random_valid_performance
from tinyjam.audio import DEFAULT_SAMPLE_RATE, to_wav_bytes
from tinyjam.model import serialize_performance_csv
from tinyjam.server import create_app
from tinyjam.store import JamStore
from tinyjam.synth import render_layers
from tinyjam.trace import render_layered, to_png_bytes

EXCERPT_CSV = (
    "time,x,y,z,moving\n"
    "0.007805,0.276382,0.416080,38.640625,0\n"
    "0.065901,0.286432,0.428141,38.640625,1\n"
)


@pytest.fixture()
def app(tmp_path):
    return create_app(tmp_path / "store")


@pytest.fixture()
def client(app):
    return TestClient(app)


def post_performance(client, instrument="chirp", parent_id=None, csv=EXCERPT_CSV, performer="ada"):
    body = {"performer": performer, "instrument": instrument, "events_csv": csv}
    if parent_id is not None:
        body["parent_id"] = parent_id
    response = client.post("/v1/performances", json=body)
    return response


class TestCreateAndFetch:
    def test_post_then_get_round_trip(self, client):
        created = post_performance(client)
        assert created.status_code == 201
        perf_id = created.json()["id"]

        got = client.get(f"/v1/performances/{perf_id}")
        assert got.status_code == 200
        body = got.json()
        assert body["performer"] == "ada"
        assert body["instrument"] == "chirp"
        assert body["parent_id"] is None
        assert len(body["events"]) == 2
        assert body["events"][0] == {
            "time": 0.007805,
            "x": 0.276382,
            "y": 0.41608,
            "z": 38.640625,
            "moving": 0,
        }

    def test_post_events_as_rows(self, client):
        body = {
            "instrument": "keys",
            "events": [
                {"time": 0.0, "x": 0.5, "y": 0.5, "z": 1.0, "moving": 0},
                {"time": 0.1, "x": 0.6, "y": 0.5, "z": 1.0, "moving": 1},
            ],
        }
        response = client.post("/v1/performances", json=body)
        assert response.status_code == 201

    def test_validation_failure_is_400_with_violations(self, client):
        csv = "time,x,y,z,moving\n0.000000,1.400000,0.500000,1.000000,0\n"
        response = post_performance(client, csv=csv)
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "validation-failed"
        assert any(v["code"] == "x-out-of-range" for v in body["violations"])
        assert body["status"] == 400

    def test_unknown_instrument_is_400(self, client):
        response = post_performance(client, instrument="theremin")
        assert response.status_code == 400

    def test_malformed_body_is_422(self, client):
        response = client.post("/v1/performances", json={"instrument": "chirp"})
        assert response.status_code == 422
        assert response.json()["code"] == "malformed-body"

    def test_both_event_sources_is_422(self, client):
        response = client.post(
            "/v1/performances",
            json={"instrument": "chirp", "events_csv": EXCERPT_CSV, "events": []},
        )
        assert response.status_code == 422

    def test_malformed_csv_is_422(self, client):
        response = post_performance(client, csv="time,x,y\n1,2,3\n")
        assert response.status_code == 422
        assert response.json()["code"] == "malformed-events-csv"

    def test_get_unknown_is_404(self, client):
        response = client.get("/v1/performances/xyz")
        assert response.status_code == 404
        assert response.json()["code"] == "not-found"

    def test_post_with_unknown_parent_is_404(self, client):
        response = post_performance(client, parent_id="ghost")
        assert response.status_code == 404


class TestReplyAndChain:
    def test_reply_records_parent(self, client):
        root = post_performance(client).json()["id"]
        reply = client.post(
            f"/v1/performances/{root}/reply",
            json={"instrument": "drums", "events_csv": EXCERPT_CSV},
        )
        assert reply.status_code == 201
        reply_id = reply.json()["id"]
        assert client.get(f"/v1/performances/{reply_id}").json()["parent_id"] == root

    def test_reply_to_unknown_is_404(self, client):
        response = client.post(
            "/v1/performances/ghost/reply",
            json={"instrument": "drums", "events_csv": EXCERPT_CSV},
        )
        assert response.status_code == 404

    def test_chain_is_root_first(self, client):
        ids = [post_performance(client).json()["id"]]
        for _ in range(3):
            reply = client.post(
                f"/v1/performances/{ids[-1]}/reply",
                json={"instrument": "keys", "events_csv": EXCERPT_CSV},
            )
            ids.append(reply.json()["id"])
        chain = client.get(f"/v1/performances/{ids[-1]}/chain").json()
        assert [layer["id"] for layer in chain["layers"]] == ids


class TestListing:
    def test_empty_page(self, client):
        body = client.get("/v1/performances").json()
        assert body == {"page": 1, "page_size": 20, "total": 0, "items": []}

    def test_newest_first(self, client):
        ids = [post_performance(client).json()["id"] for _ in range(5)]
        body = client.get("/v1/performances", params={"page_size": 3}).json()
        assert body["total"] == 5
        assert [item["id"] for item in body["items"]] == list(reversed(ids))[:3]

    def test_page_size_clamped(self, client):
        body = client.get("/v1/performances", params={"page_size": 500}).json()
        assert body["page_size"] == 100

    def test_repeated_reads_identical(self, client):
        post_performance(client)
        first = client.get("/v1/performances").content
        second = client.get("/v1/performances").content
        assert first == second


class TestRenderedArtifacts:
    def test_audio_matches_direct_engine_call(self, client, app):
        root = post_performance(client).json()["id"]
        reply = client.post(
            f"/v1/performances/{root}/reply",
            json={"instrument": "keys", "events_csv": EXCERPT_CSV},
        ).json()["id"]

        response = client.get(f"/v1/performances/{reply}/audio.wav")
        assert response.status_code == 200
        assert response.headers["content-type"] == "audio/wav"

        store: JamStore = app.state.store
        expected = to_wav_bytes(render_layers(store.chain(reply), DEFAULT_SAMPLE_RATE))
        assert response.content == expected

    def test_audio_cache_consistent(self, client):
        perf_id = post_performance(client).json()["id"]
        first = client.get(f"/v1/performances/{perf_id}/audio.wav").content
        second = client.get(f"/v1/performances/{perf_id}/audio.wav").content
        assert first == second

    def test_trace_matches_direct_render(self, client, app):
        perf_id = post_performance(client).json()["id"]
        response = client.get(f"/v1/performances/{perf_id}/trace.png")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        store: JamStore = app.state.store
        expected = to_png_bytes(render_layered(store.chain(perf_id), 300))
        assert response.content == expected

    def test_artifacts_for_unknown_id_404(self, client):
        assert client.get("/v1/performances/zz/audio.wav").status_code == 404
        assert client.get("/v1/performances/zz/trace.png").status_code == 404


class TestReport:
    def test_report_over_store(self, client):
        rng = np.random.default_rng(42)
        for instrument in ("chirp", "drums", "keys"):
            for _ in range(3):
                perf = random_valid_performance(rng, max_events=30, instrument=instrument)
                post_performance(
                    client, instrument=instrument, csv=serialize_performance_csv(perf)
                )
        body = client.get("/v1/report", params={"kde_resolution": 20}).json()
        assert body["n_performances"] == 9
        assert sum(body["performances_by_instrument"].values()) == 9
        assert body["n_moving"] + body["n_nonmoving"] == body["n_events"]
        assert body["kde"] is None or body["kde"]["resolution"] == 20


class TestConcurrentPosts:
    def test_concurrent_posts_all_visible(self, app):
        n_threads, per_thread = 10, 3
        errors = []

        def worker(seed):
            client = TestClient(app)
            rng = np.random.default_rng(seed)
            try:
                for _ in range(per_thread):
                    perf = random_valid_performance(rng, max_events=15)
                    response = client.post(
                        "/v1/performances",
                        json={
                            "instrument": "chirp",
                            "events_csv": serialize_performance_csv(perf),
                        },
                    )
                    assert response.status_code == 201
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(s,)) for s in range(n_threads)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        client = TestClient(app)
        assert client.get("/v1/performances").json()["total"] == n_threads * per_thread
