import json

import httpx
import pytest

from mentioncast import cli, load_dataset
from mentioncast.gateway import fingerprint


@pytest.fixture
def sample_args(sample_dir, tmp_path):
    return ["--dataset", str(sample_dir / "dataset.jsonl"), "--out-dir", str(tmp_path)]


def forecast_args(sample_dir, *extra):
    return ["forecast", "--transcripts", str(sample_dir / "transcripts"),
            "--news", str(sample_dir / "news.jsonl"), *extra]


def test_ingest(sample_args, tmp_path, sample_dir, capsys):
    assert cli.main(sample_args + ["ingest"]) == 0
    assert "18 instances, 6 companies, 18 resolved" in capsys.readouterr().out
    assert load_dataset(tmp_path / "dataset.jsonl") == load_dataset(sample_dir / "dataset.jsonl")


def test_ingest_invalid(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"instance_id": "x"}\n')
    assert cli.main(["--dataset", str(bad), "--out-dir", str(tmp_path), "ingest"]) == 1
    assert "line 1" in capsys.readouterr().err


def test_dataset_required(tmp_path):
    assert cli.main(["--out-dir", str(tmp_path), "ingest"]) == 1


def test_forecast_evaluate_sweep_report(sample_args, sample_dir, tmp_path, capsys):
    mock = ["--mock-table", str(sample_dir / "mock_scores.jsonl")]
    assert cli.main(sample_args + mock + forecast_args(sample_dir)) == 0
    lines = (tmp_path / "forecasts.jsonl").read_text().splitlines()
    assert len(lines) == 1 + 54
    fc = str(tmp_path / "forecasts.jsonl")
    assert cli.main(sample_args + ["evaluate", "--forecasts", fc]) == 0
    out = capsys.readouterr().out
    assert "Market Probability" in out and "MixMCP" in out and "Total" in out
    assert cli.main(sample_args + ["sweep", "--forecasts", fc]) == 0
    assert json.loads((tmp_path / "sweep.json").read_text())["n"] == 18
    (tmp_path / "report.txt").unlink()
    assert cli.main(["--out-dir", str(tmp_path), "report"]) == 0
    assert (tmp_path / "report.txt").exists()


def test_forecast_market_only_needs_no_backend(sample_args, tmp_path):
    assert cli.main(sample_args + ["forecast", "--methods", "market_baseline"]) == 0


def test_forecast_llm_without_backend_is_config_error(sample_args, sample_dir):
    assert cli.main(sample_args + forecast_args(sample_dir)) == 1


def test_missing_transcripts_is_config_error(sample_args, sample_dir):
    mock = ["--mock-table", str(sample_dir / "mock_scores.jsonl")]
    assert cli.main(sample_args + mock + ["forecast", "--methods", "ctx_t"]) == 1


def test_partial_run_exit_code(sample_args, sample_dir, tmp_path, capsys):
    table = tmp_path / "table.jsonl"
    table.write_text(json.dumps({"method": "mcp", "instance_id": "AAPL-2025-07-31-iphone", "score": 90}) + "\n")
    code = cli.main(sample_args + ["--mock-table", str(table)] + forecast_args(sample_dir))
    assert code == 3
    assert "failed:" in capsys.readouterr().err
    code = cli.main(sample_args + ["evaluate", "--forecasts", str(tmp_path / "forecasts.jsonl")])
    assert code == 1


def test_resolve(sample_args, sample_dir, tmp_path, capsys):
    assert cli.main(sample_args + ["resolve", "--transcripts", str(sample_dir / "post_call")]) == 0
    assert "18 instances (15 YES)" in capsys.readouterr().out
    assert (tmp_path / "dataset.resolved.jsonl").exists()


def _patch_transport(monkeypatch, handler):
    real = httpx.Client
    monkeypatch.setattr(httpx, "Client", lambda **kw: real(transport=httpx.MockTransport(handler)))


def test_live_backend(monkeypatch, sample_args, sample_dir, tmp_path):
    scores = {}
    for line in (sample_dir / "mock_scores.jsonl").read_text().splitlines():
        row = json.loads(line)
        scores[(row["method"], row["instance_id"])] = row["score"]
    seen = []

    def handler(request):
        body = json.loads(request.content)
        seen.append(request.headers.get("authorization"))
        assert body["model"] == "test-model"
        # answer 50 for everything; the prompt content is exercised elsewhere
        return httpx.Response(200, json={"choices": [{"message": {"content": '{"probability": 50}'}}]})

    _patch_transport(monkeypatch, handler)
    monkeypatch.setenv("MENTIONCAST_API_KEY", "sk-test")
    code = cli.main(sample_args + ["--backend", "live", "--endpoint", "http://llm.test/v1/chat/completions",
                                   "--model", "test-model"] + forecast_args(sample_dir, "--methods", "mcp"))
    assert code == 0
    assert len(seen) == 18 and set(seen) == {"Bearer sk-test"}
    records = [json.loads(x) for x in (tmp_path / "forecasts.jsonl").read_text().splitlines()[1:]]
    assert {r["probability"] for r in records} == {0.5}


def test_live_backend_error_exit_code(monkeypatch, sample_args, sample_dir):
    _patch_transport(monkeypatch, lambda request: httpx.Response(401, json={"error": "bad key"}))
    code = cli.main(sample_args + ["--backend", "live", "--endpoint", "http://llm.test/v1/chat/completions",
                                   "--max-in-flight", "1"] + forecast_args(sample_dir, "--methods", "mcp"))
    assert code == 2


def test_live_backend_requires_endpoint(sample_args, sample_dir):
    assert cli.main(sample_args + ["--backend", "live"] + forecast_args(sample_dir, "--methods", "mcp")) == 1


def test_fingerprint_keys_mock_rows(tmp_path, sample_args, sample_dir):
    rows = [json.loads(x) for x in (sample_dir / "mock_scores.jsonl").read_text().splitlines()]
    table = tmp_path / "fp.jsonl"
    table.write_text("".join(json.dumps({"fingerprint": fingerprint(r["method"], r["instance_id"]),
                                         "score": r["score"]}) + "\n" for r in rows))
    assert cli.main(sample_args + ["--mock-table", str(table)] + forecast_args(sample_dir)) == 0
