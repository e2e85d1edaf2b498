"""Run orchestration: dataset -> evidence -> forecasts -> report files."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import report as rp
from .errors import ConfigurationError, ValidationError
from .evaluation import DEFAULT_BINS, DEFAULT_GRID_STEP, DEFAULT_THRESHOLD
from .evidence import FixtureNewsProvider, NewsProvider, build_context
from .forecasters import (
    DEFAULT_ALPHA,
    ForecastFailure,
    MixtureWeight,
    forecast_llm,
    forecast_market_baseline,
    forecast_mixmcp,
)
from .gateway import DEFAULT_TRANSCRIPT_BUDGET, TEMPLATE_VERSION, Backend, PromptRegime, map_in_flight
from .model import Method
from .resolution import DEFAULT_MODE, MatchMode, resolve_mention
from .storage import (
    RunManifest,
    TranscriptStore,
    append_manifest,
    atomic_write_text,
    dump_dataset,
    load_dataset,
    merge_forecast_files,
    read_forecasts,
    write_forecasts,
)

logger = logging.getLogger(__name__)

FORECASTS_NAME = "forecasts.jsonl"
MANIFESTS_NAME = "manifests.jsonl"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
REPORT_SVG = "reliability.svg"

LLM_METHODS = (Method.CTX_NONE, Method.CTX_N, Method.CTX_T, Method.CTX_TN, Method.PLAIN_MARKET, Method.MCP)


def resolve_methods(methods) -> list:
    """Canonical-ordered method set with dependencies closed (mixmcp pulls in mcp)."""
    wanted = {Method(m) for m in methods}
    if not wanted:
        raise ConfigurationError("no methods requested")
    if Method.MIXMCP in wanted:
        wanted.add(Method.MCP)
    return [m for m in Method if m in wanted]


def _needs(methods):
    regimes = [PromptRegime.for_method(m) for m in methods if m in LLM_METHODS]
    return (any(r.variant.uses_transcript for r in regimes),
            any(r.variant.uses_news for r in regimes))


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part if isinstance(part, bytes) else json.dumps(part, sort_keys=True).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


@dataclass
class RunResult:
    path: Path
    run_id: str
    complete: bool
    forecasts: list
    failures: list = field(default_factory=list)
    manifest: Optional[RunManifest] = None


def gather_evidence(instances, methods, transcripts_dir=None, news_provider: Optional[NewsProvider] = None):
    """Per-instance ``(prior_transcript, news)``; runs the leakage audit before returning.

    Raises :class:`ConfigurationError` when a requested method lacks its inputs
    and :class:`LeakageError` when an input postdates an instance's cutoff.
    """
    need_t, need_n = _needs(methods)
    if need_t and transcripts_dir is None:
        raise ConfigurationError("transcript-bearing methods requested but no transcripts directory given")
    if need_n and news_provider is None:
        raise ConfigurationError("news-bearing methods requested but no news source given")
    store = TranscriptStore(transcripts_dir, instances) if need_t else None
    evidence = {}
    for inst in instances:
        transcript = None
        if store is not None:
            prior = store.prior_event(inst)
            if prior is None:
                raise ConfigurationError(
                    f"{inst.instance_id}: no prior-quarter transcript for {inst.company} "
                    f"at or before the cutoff"
                )
            transcript = store.read(prior)
        news = []
        if need_n:
            news = news_provider.fetch(inst.company, inst.cutoff_time)
        evidence[inst.instance_id] = (transcript, news)
    return evidence


def forecast_instances(instances, methods, backend: Optional[Backend] = None, *, alpha=DEFAULT_ALPHA,
                       evidence=None, transcript_budget=DEFAULT_TRANSCRIPT_BUDGET):
    """Produce forecasts for every (instance, method), ordered by instance then method.

    Returns ``(forecasts, failures)``. After the first backend failure no new
    backend calls are started; mixtures are only formed for instances whose MCP
    forecast succeeded.
    """
    methods = resolve_methods(methods)
    alpha = MixtureWeight(alpha)
    llm = [m for m in methods if m in LLM_METHODS]
    if llm and backend is None:
        raise ConfigurationError("language-model methods requested but no backend given")
    evidence = evidence or {}
    abort = threading.Event()

    tasks = [(inst, m) for inst in instances for m in llm]

    def run(task):
        inst, m = task
        if abort.is_set():
            return None
        regime = PromptRegime.for_method(m)
        transcript, news = evidence.get(inst.instance_id, (None, []))
        ctx = build_context(regime.variant, transcript, news, inst.cutoff_time)
        try:
            return forecast_llm(inst, regime, ctx, backend, transcript_budget=transcript_budget)
        except ForecastFailure as exc:
            abort.set()
            return exc

    limit = backend.config.max_in_flight if backend is not None else 1
    results = dict(zip(((t[0].instance_id, t[1]) for t in tasks), map_in_flight(run, tasks, limit)))

    forecasts, failures = [], []
    for inst in instances:
        for m in methods:
            if m is Method.MARKET_BASELINE:
                forecasts.append(forecast_market_baseline(inst))
            elif m is Method.MIXMCP:
                mcp = results.get((inst.instance_id, Method.MCP))
                if mcp is not None and not isinstance(mcp, ForecastFailure):
                    forecasts.append(forecast_mixmcp(inst, mcp, alpha))
            else:
                res = results[(inst.instance_id, m)]
                if isinstance(res, ForecastFailure):
                    failures.append({"instance_id": res.instance_id, "method": res.method.value,
                                     "error": str(res.cause)})
                elif res is not None:
                    forecasts.append(res)
    return forecasts, failures


def run_forecast(dataset_path, methods, backend: Optional[Backend], out_dir, *, alpha=DEFAULT_ALPHA,
                 transcripts_dir=None, news_path=None, news_provider=None, match_mode: MatchMode = DEFAULT_MODE,
                 transcript_budget=DEFAULT_TRANSCRIPT_BUDGET, output_name=FORECASTS_NAME,
                 created_at: Optional[datetime] = None) -> RunResult:
    """Forecast every dataset instance with the requested methods and write the results.

    Evidence is gathered and audited for leakage before the first backend call.
    The forecast file is written atomically and marked incomplete if any
    backend call failed; a manifest line is appended alongside it.
    """
    dataset_path = Path(dataset_path)
    out_dir = Path(out_dir)
    instances = load_dataset(dataset_path)
    methods = resolve_methods(methods)
    if news_provider is None and news_path is not None:
        news_provider = FixtureNewsProvider(news_path)
    evidence = gather_evidence(instances, methods, transcripts_dir, news_provider)

    backend_summary = backend.config.summary() if backend is not None else {}
    run_id = _digest(
        dataset_path.read_bytes(),
        [m.value for m in methods],
        MixtureWeight(alpha).alpha,
        backend_summary,
        TEMPLATE_VERSION,
        transcript_budget,
        match_mode.to_dict(),
    )

    forecasts, failures = forecast_instances(
        instances, methods, backend, alpha=alpha, evidence=evidence, transcript_budget=transcript_budget
    )
    complete = not failures
    path = out_dir / output_name
    write_forecasts(path, run_id, forecasts, complete=complete, failures=failures,
                    extra_header={"methods": [m.value for m in methods], "alpha": MixtureWeight(alpha).alpha,
                                  "template_version": TEMPLATE_VERSION})
    manifest = RunManifest(
        run_id=run_id,
        dataset_path=str(dataset_path),
        methods=tuple(methods),
        alpha=MixtureWeight(alpha).alpha,
        backend=backend_summary,
        match_mode=match_mode.to_dict(),
        created_at=created_at or datetime.now(timezone.utc),
        template_version=TEMPLATE_VERSION,
        extra={"forecast_file": str(path), "complete": complete, "transcript_budget": transcript_budget},
    )
    append_manifest(out_dir / MANIFESTS_NAME, manifest)
    if failures:
        logger.error("%d forecast(s) failed; %s marked incomplete", len(failures), path)
    return RunResult(path, run_id, complete, forecasts, failures, manifest)


def join_forecasts(forecast_paths, instances):
    """Merge forecast files and join them to resolved dataset instances.

    Returns ``(by_method, outcomes, market_probs, run_ids)``.
    """
    files = [read_forecasts(p) for p in forecast_paths]
    incomplete = [str(p) for p, f in zip(forecast_paths, files) if not f.complete]
    if incomplete:
        raise ValidationError(f"forecast file(s) marked incomplete: {', '.join(incomplete)}")
    merged = merge_forecast_files(files)
    by_id = {inst.instance_id: inst for inst in instances}
    unknown = sorted({fc.instance_id for fc in merged if fc.instance_id not in by_id})
    if unknown:
        raise ValidationError(f"forecasts reference unknown instance_id(s): {', '.join(unknown)}")
    referenced = {fc.instance_id for fc in merged}
    unresolved = [i.instance_id for i in instances if i.instance_id in referenced and i.outcome is None]
    if unresolved:
        raise ValidationError(f"unresolved instance(s): {', '.join(unresolved)}")
    order = {inst.instance_id: k for k, inst in enumerate(instances)}
    by_method = {}
    for fc in sorted(merged, key=lambda f: (order[f.instance_id], list(Method).index(f.method))):
        by_method.setdefault(fc.method, []).append(fc)
    outcomes = {i.instance_id: i.outcome for i in instances if i.outcome is not None}
    market = {i.instance_id: i.market_prob for i in instances}
    return by_method, outcomes, market, [f.run_id for f in files]


def run_evaluate(forecast_paths, dataset_path, out_dir, *, n_bins=DEFAULT_BINS, threshold=DEFAULT_THRESHOLD,
                 grid_step=DEFAULT_GRID_STEP, seed=0, split_fraction=0.5) -> dict:
    """Score every method present and write ``report.json``, ``report.txt`` and ``reliability.svg``."""
    if isinstance(forecast_paths, (str, Path)):
        forecast_paths = [forecast_paths]
    instances = load_dataset(dataset_path)
    by_method, outcomes, market, run_ids = join_forecasts(list(forecast_paths), instances)
    report = rp.build_report(by_method, outcomes, market, n_bins=n_bins, threshold=threshold,
                             grid_step=grid_step, seed=seed, split_fraction=split_fraction, run_ids=run_ids)
    write_report_files(report, out_dir)
    return report


def write_report_files(report: dict, out_dir) -> None:
    out_dir = Path(out_dir)
    atomic_write_text(out_dir / REPORT_JSON, rp.dumps_report(report))
    atomic_write_text(out_dir / REPORT_TEXT, rp.render_text(report))
    atomic_write_text(out_dir / REPORT_SVG, rp.render_reliability_svg(report))


def run_sweep(forecast_paths, dataset_path, *, grid_step=DEFAULT_GRID_STEP, seed=0, split_fraction=0.5) -> dict:
    if isinstance(forecast_paths, (str, Path)):
        forecast_paths = [forecast_paths]
    instances = load_dataset(dataset_path)
    by_method, outcomes, market, _ = join_forecasts(list(forecast_paths), instances)
    if Method.MCP not in by_method:
        raise ConfigurationError("alpha sweep needs mcp forecasts")
    return rp.sweep_section(by_method[Method.MCP], outcomes, market,
                            grid_step=grid_step, seed=seed, split_fraction=split_fraction)


def run_resolve(dataset_path, transcripts_dir, out_path, match_mode: MatchMode = DEFAULT_MODE) -> list:
    """Settle instances from their target-call transcripts; instances without one keep their outcome."""
    instances = load_dataset(dataset_path)
    store = TranscriptStore(transcripts_dir, instances)
    settled = []
    changes = []
    for inst in instances:
        if store.has(inst.event_id):
            outcome = resolve_mention(inst.keyword, store.read(inst.event_id), match_mode)
            if inst.outcome is not None and inst.outcome is not outcome:
                changes.append(inst.instance_id)
                logger.warning("%s: recorded outcome %s disagrees with transcript (%s)",
                               inst.instance_id, inst.outcome.name, outcome.name)
            inst = replace(inst, outcome=outcome)
        settled.append(inst)
    dump_dataset(settled, out_path)
    return settled
