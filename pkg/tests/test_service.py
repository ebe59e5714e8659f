import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi import FastAPI
from fastapi.testclient import TestClient
from pydantic import BaseModel

from citeval import cli
from citeval.entail import EntailmentOracle, NliHttpBackend, TableBackend
from citeval.metrics import corpus_citation_metrics
from citeval.service import app
from synth import MonotoneBackend, make_corpus, materialize_table, write_corpus_files

client = TestClient(app)


class TestHealth:
    def test_ok(self):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestEvaluateEndpoint:
    def _payload(self, toy_paths, tmp_path, out_name="report.json"):
        data, table = toy_paths
        return {
            "data": data,
            "backend": "table",
            "table": table,
            "cache": str(tmp_path / "cache.jsonl"),
            "out": str(tmp_path / out_name),
            "workers": 1,
        }

    def test_evaluate_roundtrip(self, tmp_path):
        corpus = make_corpus(31, n_samples=2, max_refs=3)
        toy_paths = write_corpus_files(corpus, MonotoneBackend(31, 3), tmp_path)
        resp = client.post("/v1/evaluate", json=self._payload(toy_paths, tmp_path))
        assert resp.status_code == 200
        body = resp.json()
        assert body["out"].endswith("report.json")
        assert "citation" in body["summary"]
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["counts"]["samples_evaluated"] == 2

    def test_second_call_warm_cache(self, tmp_path):
        corpus = make_corpus(32, n_samples=2, max_refs=3)
        toy_paths = write_corpus_files(corpus, MonotoneBackend(32, 3), tmp_path)
        first = client.post(
            "/v1/evaluate", json=self._payload(toy_paths, tmp_path, "r1.json")
        )
        second = client.post(
            "/v1/evaluate", json=self._payload(toy_paths, tmp_path, "r2.json")
        )
        assert first.json()["summary"]["backend_calls"] > 0
        assert second.json()["summary"]["backend_calls"] == 0

    def test_missing_file_is_400(self, tmp_path):
        resp = client.post(
            "/v1/evaluate",
            json={"data": str(tmp_path / "absent.jsonl"), "out": str(tmp_path / "o.json")},
        )
        assert resp.status_code == 400

    def test_unreachable_backend_is_502(self, tmp_path):
        corpus = make_corpus(33, n_samples=1, max_refs=2)
        toy_paths = write_corpus_files(corpus, MonotoneBackend(33, 2), tmp_path)
        payload = self._payload(toy_paths, tmp_path)
        payload.update({"backend": "nli-http", "endpoint": "http://127.0.0.1:9"})
        resp = client.post("/v1/evaluate", json=payload)
        assert resp.status_code == 502

    def test_invalid_body_is_422(self):
        resp = client.post("/v1/evaluate", json={"backend": "nonsense"})
        assert resp.status_code == 422


class TestRefineEndpoint:
    def test_oracle_refine(self, tmp_path):
        corpus = make_corpus(34, n_samples=2, max_refs=3)
        data, table = write_corpus_files(corpus, MonotoneBackend(34, 3), tmp_path)
        resp = client.post(
            "/v1/refine",
            json={
                "data": data,
                "backend": "table",
                "table": table,
                "mode": "oracle",
                "out": str(tmp_path / "refined.jsonl"),
            },
        )
        assert resp.status_code == 200
        assert resp.json()["summary"]["refined"] == 2
        assert (tmp_path / "refined.jsonl").exists()


class TestBuildDataEndpoint:
    def test_build(self, tmp_path):
        corpus = make_corpus(35, n_samples=2, max_refs=3, with_answer=True)
        data, table = write_corpus_files(corpus, MonotoneBackend(35, 3), tmp_path)
        resp = client.post(
            "/v1/build-refiner-data",
            json={
                "data": data,
                "backend": "table",
                "table": table,
                "out": str(tmp_path / "records.jsonl"),
            },
        )
        assert resp.status_code == 200
        assert resp.json()["summary"]["records"] > 0


@pytest.fixture(scope="module")
def live_server():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 15
    while time.monotonic() < deadline:
        try:
            if httpx.get(f"{url}/health", timeout=1).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        pytest.fail("service did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=10)


class TestThinClient:
    def test_cli_posts_job_to_live_server(self, live_server, tmp_path, capsys):
        corpus = make_corpus(41, n_samples=2, max_refs=3)
        data, table = write_corpus_files(corpus, MonotoneBackend(41, 3), tmp_path)
        out = tmp_path / "remote_report.json"
        code = cli.main(
            [
                "evaluate",
                "--server",
                live_server,
                "--data",
                data,
                "--backend",
                "table",
                "--table",
                table,
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert out.exists()
        assert "citation (ours)" in capsys.readouterr().out

    def test_cli_remote_error_propagates(self, live_server, tmp_path, capsys):
        code = cli.main(
            [
                "evaluate",
                "--server",
                live_server,
                "--data",
                str(tmp_path / "missing.jsonl"),
                "--out",
                str(tmp_path / "o.json"),
            ]
        )
        assert code != 0
        assert "error" in capsys.readouterr().err

    def test_cli_unreachable_server(self, tmp_path, capsys):
        code = cli.main(
            [
                "evaluate",
                "--server",
                "http://127.0.0.1:9",
                "--data",
                "x.jsonl",
                "--out",
                str(tmp_path / "o.json"),
            ]
        )
        assert code == 2
        assert "unreachable" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# NLI service protocol stub: the wire contract the entail module consumes
# ---------------------------------------------------------------------------


def make_stub_nli_app(table: dict[tuple[str, str], bool]) -> FastAPI:
    stub = FastAPI()

    class EntailIn(BaseModel):
        premise: str
        hypothesis: str

    @stub.get("/health")
    def health():
        return {"status": "ok", "model_id": "stub-table-v1"}

    @stub.post("/v1/entail")
    def entail(body: EntailIn):
        value = table.get((body.premise, body.hypothesis), False)
        return {
            "label": "entailment" if value else "not_entailment",
            "score": 0.99 if value else 0.01,
        }

    return stub


class TestNliProtocolStub:
    def test_backend_against_stub(self):
        stub = make_stub_nli_app({("P", "H"): True})
        backend = NliHttpBackend("http://testserver", client=TestClient(stub))
        assert "stub-table-v1" in backend.identity
        assert backend.judge("P", "H") is True
        assert backend.judge("P", "other") is False

    def test_metrics_identical_over_stub_and_local_table(self):
        corpus = make_corpus(36, n_samples=3, max_refs=3)
        rows = materialize_table(corpus, MonotoneBackend(36, 3))
        table = {(r["premise"], r["hypothesis"]): r["entails"] for r in rows}

        local = EntailmentOracle(TableBackend(table, name="local"))
        report_local = corpus_citation_metrics(corpus, None, local)

        stub_backend = NliHttpBackend(
            "http://testserver", client=TestClient(make_stub_nli_app(table))
        )
        remote = EntailmentOracle(stub_backend)
        report_remote = corpus_citation_metrics(corpus, None, remote)

        assert report_local.citation == report_remote.citation
        assert report_local.counts == report_remote.counts
