"""
End to end on the sample contracts
==================================

Forecasts the 18 sample contracts with every method against the mock backend,
scores them, and writes report.json, report.txt and reliability.svg into a
scratch directory.
"""

import tempfile
from pathlib import Path

from mentioncast import Method
from mentioncast.gateway import MockBackend
from mentioncast.pipeline import run_evaluate, run_forecast
from mentioncast.report import render_text

SAMPLE = Path(__file__).resolve().parents[1] / "data" / "sample"
out = Path(tempfile.mkdtemp(prefix="mentioncast-demo-"))

backend = MockBackend.from_file(SAMPLE / "mock_scores.jsonl")
run = run_forecast(
    SAMPLE / "dataset.jsonl", [m.value for m in Method], backend, out,
    transcripts_dir=SAMPLE / "transcripts", news_path=SAMPLE / "news.jsonl",
)
print(f"run {run.run_id}: {len(run.forecasts)} forecasts, {len(backend.calls)} backend calls")

report = run_evaluate([run.path], SAMPLE / "dataset.jsonl", out)
print(render_text(report))
print("files in", out, "->", sorted(p.name for p in out.iterdir()))
