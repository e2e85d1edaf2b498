"""Evaluation report assembly and rendering (JSON, fixed-width text, SVG reliability diagram)."""

from __future__ import annotations

import json
from html import escape

from . import evaluation as ev
from .errors import ValidationError
from .model import Method

REPORT_SCHEMA_VERSION = 1

_METHOD_LABELS = {
    Method.MARKET_BASELINE: "Market Probability",
    Method.CTX_NONE: "Context (none)",
    Method.CTX_N: "Context (N)",
    Method.CTX_T: "Context (T)",
    Method.CTX_TN: "Context (T,N)",
    Method.PLAIN_MARKET: "W/o Prompting (T,N,M)",
    Method.MCP: "MCP",
    Method.MIXMCP: "MixMCP",
}

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"]


def method_label(method) -> str:
    return _METHOD_LABELS[Method(method)]


def build_report(by_method: dict, outcomes: dict, market_probs: dict, *, n_bins=ev.DEFAULT_BINS,
                 threshold=ev.DEFAULT_THRESHOLD, grid_step=ev.DEFAULT_GRID_STEP, seed=0,
                 split_fraction=0.5, run_ids=(), pair=(Method.MARKET_BASELINE, Method.MCP)) -> dict:
    """Assemble the report dict.

    ``by_method`` maps each :class:`Method` to a list of forecasts already
    joined to resolved instances; ``outcomes`` and ``market_probs`` are keyed by
    instance id. Methods appear in tag order.
    """
    methods = [m for m in Method if m in by_method and by_method[m]]
    if not methods:
        raise ValidationError("no forecasts to evaluate")
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "run_ids": sorted(set(run_ids)),
        "n_bins": n_bins,
        "threshold": threshold,
        "methods": {},
    }
    for m in methods:
        pairs = [(fc.probability, outcomes[fc.instance_id]) for fc in by_method[m]]
        report["methods"][m.value] = {
            "label": method_label(m),
            "metrics": ev.summarize(pairs, n_bins, threshold).to_dict(),
            "calibration": [row.to_dict() for row in ev.calibration_curve(pairs, n_bins)],
        }

    a, b = (Method(x) for x in pair)
    if a in by_method and b in by_method:
        fa = {fc.instance_id: fc for fc in by_method[a]}
        fb = {fc.instance_id: fc for fc in by_method[b]}
        ids = [iid for iid in fa if iid in fb]
        rows = ev.disagreement_analysis(
            [fa[i] for i in ids], [fb[i] for i in ids],
            [outcomes[i] for i in ids], [market_probs[i] for i in ids],
            threshold=threshold,
        )
        report["disagreement"] = {
            "method_a": a.value,
            "method_b": b.value,
            "bin_edges": list(ev.DISAGREEMENT_EDGES),
            "rows": [row.to_dict() for row in rows],
        }

    if Method.MARKET_BASELINE in by_method and Method.MCP in by_method:
        report["sweep"] = sweep_section(by_method[Method.MCP], outcomes, market_probs,
                                        grid_step=grid_step, seed=seed, split_fraction=split_fraction)
    return report


def sweep_section(mcp_forecasts, outcomes, market_probs, *, grid_step=ev.DEFAULT_GRID_STEP,
                  seed=0, split_fraction=0.5) -> dict:
    """Alpha sweep on the full set, plus selection on a seeded tuning split scored on the rest."""
    mcp = {fc.instance_id: float(fc.probability) for fc in mcp_forecasts}
    ids = list(mcp)

    def arrays(subset):
        return ([market_probs[i] for i in subset], [mcp[i] for i in subset], [outcomes[i] for i in subset])

    full = ev.alpha_sweep(*arrays(ids), grid_step=grid_step)
    section = {
        "grid_step": grid_step,
        "n": len(ids),
        "best_alpha": full.best_alpha,
        "analytic_alpha": ev.analytic_alpha(*arrays(ids)),
        "curve": [[a, s] for a, s in full.curve],
    }
    tune, held = ev.held_out_split(ids, seed=seed, fraction=split_fraction)
    split = {"seed": seed, "fraction": split_fraction, "n_tune": len(tune), "n_heldout": len(held)}
    if tune:
        chosen = ev.alpha_sweep(*arrays(tune), grid_step=grid_step).best_alpha
        split["best_alpha_tune"] = chosen
        if held:
            split["heldout_brier"] = ev.mixture_brier(*arrays(held), chosen)
    section["split"] = split
    return section


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def render_text(report: dict) -> str:
    """Fixed-width tables: metrics (Brier, ECE, Acc, F1), then disagreement and sweep summaries."""
    lines = []
    header = f"{'Prediction':<24} {'Brier':>8} {'ECE':>8} {'Acc':>6} {'F1':>6} {'N':>6}"
    lines += [header, "-" * len(header)]
    for entry in report["methods"].values():
        m = entry["metrics"]
        lines.append(
            f"{entry['label']:<24} {m['brier']:>8.4f} {m['ece']:>8.4f} "
            f"{m['accuracy']:>6.1f} {m['f1']:>6.3f} {m['n']:>6d}"
        )
    dis = report.get("disagreement")
    if dis:
        a, b = method_label(dis["method_a"]), method_label(dis["method_b"])
        lines += ["", f"Disagreement: {a} vs {b} (wins = lower per-instance Brier)"]
        head = f"{'Market Prob. Bin':<18} {'Disagree n':>10} {a[:18]:>18} {b[:18]:>18}"
        lines += [head, "-" * len(head)]
        for row in dis["rows"]:
            lines.append(
                f"{row['market_bin_label']:<18} {row['disagree_count']:>10d} "
                f"{row['wins_a']:>18d} {row['wins_b']:>18d}"
            )
    sweep = report.get("sweep")
    if sweep:
        lines += [
            "",
            f"Alpha sweep (step {sweep['grid_step']:g}, n={sweep['n']}): "
            f"grid minimizer {sweep['best_alpha']:.2f}, analytic {sweep['analytic_alpha']:.4f}",
        ]
        split = sweep["split"]
        if "best_alpha_tune" in split:
            msg = (f"  tuning split (seed {split['seed']}, n={split['n_tune']}): "
                   f"alpha {split['best_alpha_tune']:.2f}")
            if "heldout_brier" in split:
                msg += f"; held-out Brier {split['heldout_brier']:.4f} (n={split['n_heldout']})"
            lines.append(msg)
    return "\n".join(lines) + "\n"


def render_reliability_svg(report: dict, methods=None, size: int = 420) -> str:
    """Predicted probability vs observed YES frequency per non-empty bin, with the diagonal."""
    names = list(methods) if methods else list(report["methods"])
    pad = 50
    plot = size - 2 * pad

    def x(v):
        return f"{pad + v * plot:.2f}"

    def y(v):
        return f"{size - pad - v * plot:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="11">',
        f'<rect x="{pad}" y="{pad}" width="{plot}" height="{plot}" fill="white" stroke="#333"/>',
    ]
    for t in range(0, 11, 2):
        v = t / 10
        out.append(f'<line x1="{x(v)}" y1="{y(0)}" x2="{x(v)}" y2="{float(y(0)) + 4:.2f}" stroke="#333"/>')
        out.append(f'<text x="{x(v)}" y="{float(y(0)) + 16:.2f}" text-anchor="middle">{v:.1f}</text>')
        out.append(f'<line x1="{float(x(0)) - 4:.2f}" y1="{y(v)}" x2="{x(0)}" y2="{y(v)}" stroke="#333"/>')
        out.append(f'<text x="{float(x(0)) - 7:.2f}" y="{float(y(v)) + 4:.2f}" text-anchor="end">{v:.1f}</text>')
    out.append(f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(1)}" y2="{y(1)}" stroke="#999" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{size / 2:.2f}" y="{size - 12}" text-anchor="middle">Predicted probability</text>')
    out.append(
        f'<text x="14" y="{size / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {size / 2:.2f})">Observed YES frequency</text>'
    )
    for k, name in enumerate(names):
        color = _PALETTE[k % len(_PALETTE)]
        rows = [r for r in report["methods"][name]["calibration"] if r["count"]]
        pts = " ".join(f"{x(r['mean_pred'])},{y(r['mean_outcome'])}" for r in rows)
        if len(rows) > 1:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for r in rows:
            out.append(f'<circle cx="{x(r["mean_pred"])}" cy="{y(r["mean_outcome"])}" r="3.5" fill="{color}">'
                       f'<title>{escape(name)} bin {r["bin_index"]}: n={r["count"]}</title></circle>')
        ly = pad + 14 + 16 * k
        out.append(f'<rect x="{pad + 10}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{pad + 26}" y="{ly}">{escape(report["methods"][name]["label"])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
