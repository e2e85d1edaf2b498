"""Command-line entry point: ``mentioncast [global flags] <subcommand> ...``.

Exit codes: 0 success, 1 validation/configuration error, 2 backend error
(no model forecast succeeded), 3 partial results.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from . import report as rp
from .errors import BackendError, MentionCastError
from .evidence import FixtureNewsProvider, HttpNewsProvider
from .evaluation import DEFAULT_BINS, DEFAULT_GRID_STEP, DEFAULT_THRESHOLD
from .forecasters import DEFAULT_ALPHA
from .gateway import DEFAULT_TRANSCRIPT_BUDGET, BackendConfig, ChatCompletionsBackend, MockBackend
from .resolution import Boundary, CaseSensitivity, MatchMode
from .storage import atomic_write_text, dump_dataset, load_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_BACKEND, EXIT_PARTIAL = 0, 1, 2, 3

logger = logging.getLogger("mentioncast")


def _build_parser():
    p = argparse.ArgumentParser(prog="mentioncast", description=__doc__.splitlines()[0])
    p.add_argument("--dataset", type=Path, help="dataset JSONL file")
    p.add_argument("--out-dir", type=Path, default=Path("runs"), help="output directory (default: runs)")
    p.add_argument("--seed", type=int, default=0, help="seed for the held-out alpha split")
    p.add_argument("--backend", choices=("mock", "live"), default="mock")
    p.add_argument("--mock-table", type=Path, help="mock backend score table (JSONL)")
    p.add_argument("--endpoint", default="", help="chat-completions URL for the live backend")
    p.add_argument("--model", default="gpt-5.1", help="model name for the live backend")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--max-in-flight", type=int, default=4)
    p.add_argument("--case", choices=[c.value for c in CaseSensitivity],
                   default=CaseSensitivity.CASE_INSENSITIVE.value, help="keyword match case rule")
    p.add_argument("--boundary", choices=[b.value for b in Boundary],
                   default=Boundary.WORD_BOUNDARY.value, help="keyword match boundary rule")
    p.add_argument("-v", "--verbose", action="store_true", help="log backend traffic (keys redacted)")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", help="validate a dataset and write its canonical form to the output directory")

    fc = sub.add_parser("forecast", help="produce forecasts for every instance")
    fc.add_argument("--methods", default="market_baseline,mcp,mixmcp",
                    help="comma-separated method tags (default: market_baseline,mcp,mixmcp)")
    fc.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="weight on the market in mixmcp")
    fc.add_argument("--transcripts", type=Path, help="directory of <event_id>.txt transcripts")
    fc.add_argument("--news", type=Path, help="news fixture JSONL")
    fc.add_argument("--news-config", type=Path, help="JSON config for the live news provider")
    fc.add_argument("--transcript-budget", type=int, default=DEFAULT_TRANSCRIPT_BUDGET,
                    help="maximum transcript characters per prompt")
    fc.add_argument("--output", default=pipeline.FORECASTS_NAME, help="forecast file name inside --out-dir")

    def scoring_args(sp):
        sp.add_argument("--forecasts", type=Path, nargs="+", required=True, help="forecast JSONL file(s)")
        sp.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
        sp.add_argument("--split-fraction", type=float, default=0.5)

    ev = sub.add_parser("evaluate", help="score forecasts and write report files")
    scoring_args(ev)
    ev.add_argument("--bins", type=int, default=DEFAULT_BINS)
    ev.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    sw = sub.add_parser("sweep", help="sweep the mixture weight over mcp forecasts")
    scoring_args(sw)

    rs = sub.add_parser("resolve", help="settle instances from post-call transcripts")
    rs.add_argument("--transcripts", type=Path, required=True)
    rs.add_argument("--output", type=Path, help="resolved dataset path (default: <out-dir>/dataset.resolved.jsonl)")

    rep = sub.add_parser("report", help="re-render text and SVG from a report.json")
    rep.add_argument("--report", type=Path, help="report JSON (default: <out-dir>/report.json)")
    return p


def _backend(args):
    config = BackendConfig(
        endpoint=args.endpoint,
        model_name=args.model if args.backend == "live" else "mock",
        timeout=args.timeout,
        max_retries=args.max_retries,
        max_in_flight=args.max_in_flight,
        verbose=args.verbose,
    )
    if args.backend == "live":
        return ChatCompletionsBackend(config)
    if args.mock_table is None:
        return None
    return MockBackend.from_file(args.mock_table, config=config)


def _require_dataset(args):
    if args.dataset is None:
        raise MentionCastError("--dataset is required for this command")
    return args.dataset


def _cmd_ingest(args):
    instances = load_dataset(_require_dataset(args))
    out = args.out_dir / "dataset.jsonl"
    dump_dataset(instances, out)
    resolved = sum(i.outcome is not None for i in instances)
    companies = len({i.company for i in instances})
    print(f"{len(instances)} instances, {companies} companies, {resolved} resolved -> {out}")
    return EXIT_OK


def _cmd_forecast(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    provider = None
    if args.news_config is not None:
        provider = HttpNewsProvider.from_config(args.news_config)
    elif args.news is not None:
        provider = FixtureNewsProvider(args.news)
    result = pipeline.run_forecast(
        _require_dataset(args), methods, _backend(args), args.out_dir,
        alpha=args.alpha, transcripts_dir=args.transcripts, news_provider=provider,
        match_mode=MatchMode(args.case, args.boundary), transcript_budget=args.transcript_budget,
        output_name=args.output,
    )
    print(f"run {result.run_id}: {len(result.forecasts)} forecasts -> {result.path}")
    if not result.complete:
        for f in result.failures:
            print(f"failed: {f['instance_id']} [{f['method']}]: {f['error']}", file=sys.stderr)
        # nothing from the backend survived: a backend error rather than a partial run
        if not any(fc.method in pipeline.LLM_METHODS for fc in result.forecasts):
            return EXIT_BACKEND
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_evaluate(args):
    report = pipeline.run_evaluate(
        args.forecasts, _require_dataset(args), args.out_dir, n_bins=args.bins, threshold=args.threshold,
        grid_step=args.grid_step, seed=args.seed, split_fraction=args.split_fraction,
    )
    sys.stdout.write(rp.render_text(report))
    return EXIT_OK


def _cmd_sweep(args):
    section = pipeline.run_sweep(args.forecasts, _require_dataset(args), grid_step=args.grid_step,
                                 seed=args.seed, split_fraction=args.split_fraction)
    atomic_write_text(args.out_dir / "sweep.json", json.dumps(section, indent=2) + "\n")
    print(f"best alpha {section['best_alpha']:.2f} (analytic {section['analytic_alpha']:.4f}, n={section['n']})")
    split = section["split"]
    if "best_alpha_tune" in split:
        print(f"tuning split alpha {split['best_alpha_tune']:.2f}")
    return EXIT_OK


def _cmd_resolve(args):
    out = args.output or args.out_dir / "dataset.resolved.jsonl"
    settled = pipeline.run_resolve(_require_dataset(args), args.transcripts, out,
                                   MatchMode(args.case, args.boundary))
    yes = sum(i.outcome is not None and i.outcome.name == "YES" for i in settled)
    print(f"{len(settled)} instances ({yes} YES) -> {out}")
    return EXIT_OK


def _cmd_report(args):
    path = args.report or args.out_dir / pipeline.REPORT_JSON
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    out_dir = Path(path).parent
    atomic_write_text(out_dir / pipeline.REPORT_TEXT, rp.render_text(report))
    atomic_write_text(out_dir / pipeline.REPORT_SVG, rp.render_reliability_svg(report))
    sys.stdout.write(rp.render_text(report))
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "forecast": _cmd_forecast,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "resolve": _cmd_resolve,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (MentionCastError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
