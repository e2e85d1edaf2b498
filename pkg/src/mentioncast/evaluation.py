"""Scoring: Brier, ECE, accuracy/F1, calibration curves, disagreement tables, alpha sweep.

Forecast/outcome pairs are passed as sequences of ``(probability, outcome)``.
All arithmetic is double precision with a fixed summation order, so repeated
runs are bitwise identical.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .model import Forecast, Outcome, Probability

DEFAULT_BINS = 10
DEFAULT_THRESHOLD = 0.5
DEFAULT_GRID_STEP = 0.01
DISAGREEMENT_EDGES = (0.0, 0.5, 0.6, 0.7, 1.0)


@dataclass(frozen=True)
class MetricSummary:
    brier: float
    ece: float
    accuracy: float  # percent
    f1: float
    n: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CalibrationBin:
    bin_index: int
    lower: float
    upper: float
    count: int
    mean_pred: Optional[float]  # None for empty bins
    mean_outcome: Optional[float]

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DisagreementRow:
    market_bin_label: str
    disagree_count: int
    wins_a: int
    wins_b: int

    def to_dict(self):
        return asdict(self)


def _unzip(pairs):
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("cannot score an empty forecast set")
    probs = []
    labels = []
    for p, y in pairs:
        probs.append(float(Probability(p)))
        labels.append(int(Outcome.parse(y)))
    return np.asarray(probs, dtype=np.float64), np.asarray(labels, dtype=np.float64)


def brier(pairs) -> float:
    """Mean squared difference between forecast probability and 0/1 outcome."""
    p, y = _unzip(pairs)
    return float(np.mean((p - y) ** 2))


def bin_index(p: float, n_bins: int = DEFAULT_BINS) -> int:
    """1-based bin for ``p`` with bins ``((b-1)/B, b/B]``; ``p == 0`` goes to bin 1."""
    if p <= 0.0:
        return 1
    b = max(1, min(n_bins, math.ceil(p * n_bins)))
    # p * B can round across an edge; settle against the edges as written
    if b > 1 and p <= (b - 1) / n_bins:
        b -= 1
    elif b < n_bins and p > b / n_bins:
        b += 1
    return b


def calibration_curve(pairs, n_bins: int = DEFAULT_BINS) -> list:
    """One :class:`CalibrationBin` per bin, empty bins included."""
    if n_bins < 1:
        raise ValidationError(f"number of bins must be positive, got {n_bins}")
    p, y = _unzip(pairs)
    sums_p = [0.0] * n_bins
    sums_y = [0.0] * n_bins
    counts = [0] * n_bins
    for pi, yi in zip(p.tolist(), y.tolist()):
        b = bin_index(pi, n_bins) - 1
        sums_p[b] += pi
        sums_y[b] += yi
        counts[b] += 1
    rows = []
    for b in range(n_bins):
        c = counts[b]
        rows.append(CalibrationBin(
            bin_index=b + 1,
            lower=b / n_bins,
            upper=(b + 1) / n_bins,
            count=c,
            mean_pred=sums_p[b] / c if c else None,
            mean_outcome=sums_y[b] / c if c else None,
        ))
    return rows


def ece_from_curve(rows) -> float:
    n = sum(row.count for row in rows)
    if n == 0:
        raise ValidationError("calibration curve is empty")
    total = 0.0
    for row in rows:
        if row.count:
            total += (row.count / n) * abs(row.mean_outcome - row.mean_pred)
    return total


def ece(pairs, n_bins: int = DEFAULT_BINS) -> float:
    """Expected calibration error over ``n_bins`` equal-width bins."""
    return ece_from_curve(calibration_curve(pairs, n_bins))


def classify_and_score(pairs, threshold: float = DEFAULT_THRESHOLD):
    """Accuracy (percent) and F1 on the YES class, predicting YES when ``p >= threshold``."""
    p, y = _unzip(pairs)
    pred = p >= threshold
    truth = y == 1.0
    accuracy = float(np.mean(pred == truth)) * 100.0
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return accuracy, f1


def summarize(pairs, n_bins: int = DEFAULT_BINS, threshold: float = DEFAULT_THRESHOLD) -> MetricSummary:
    pairs = list(pairs)
    accuracy, f1 = classify_and_score(pairs, threshold)
    return MetricSummary(brier=brier(pairs), ece=ece(pairs, n_bins), accuracy=accuracy, f1=f1, n=len(pairs))


# -- disagreement analysis -------------------------------------------------

def _stratum_label(lo, hi):
    return f"{lo * 100:g}-{hi * 100:g}%"


def _probs_of(seq):
    out = []
    for item in seq:
        out.append(float(item.probability) if isinstance(item, Forecast) else float(Probability(item)))
    return out


def disagreement_analysis(f_a, f_b, outcomes, market_probs, bin_edges=DISAGREEMENT_EDGES,
                          threshold: float = DEFAULT_THRESHOLD) -> list:
    """Compare two methods where their thresholded predictions differ.

    ``f_a``/``f_b`` are aligned sequences of probabilities or :class:`Forecast`
    objects (whose instance ids must then agree position by position). Strata
    are ``[lo, hi)`` on the market probability, the last one closed. Returns one
    row per stratum followed by a ``Total`` row. A row's wins count instances
    with strictly lower per-instance Brier; exact ties count for neither.
    """
    n = len(f_a)
    if not (len(f_b) == n == len(outcomes) == len(market_probs)):
        raise ValidationError(
            f"misaligned inputs: {len(f_a)}, {len(f_b)}, {len(outcomes)}, {len(market_probs)}"
        )
    for i, (a, b) in enumerate(zip(f_a, f_b)):
        if isinstance(a, Forecast) and isinstance(b, Forecast) and a.instance_id != b.instance_id:
            raise ValidationError(f"position {i}: instance {a.instance_id} paired with {b.instance_id}")
    edges = [float(e) for e in bin_edges]
    if len(edges) < 2 or any(lo >= hi for lo, hi in zip(edges, edges[1:])):
        raise ValidationError(f"bin edges must be strictly increasing, got {bin_edges}")

    pa = _probs_of(f_a)
    pb = _probs_of(f_b)
    ys = [int(Outcome.parse(y)) for y in outcomes]
    ms = [float(Probability(m)) for m in market_probs]

    k = len(edges) - 1
    counts = [[0, 0, 0] for _ in range(k)]
    for a, b, y, m in zip(pa, pb, ys, ms):
        if (a >= threshold) == (b >= threshold):
            continue
        s = _stratum(m, edges)
        if s is None:
            continue
        counts[s][0] += 1
        ba, bb = (a - y) ** 2, (b - y) ** 2
        if ba < bb:
            counts[s][1] += 1
        elif bb < ba:
            counts[s][2] += 1
    rows = [
        DisagreementRow(_stratum_label(edges[s], edges[s + 1]), *counts[s]) for s in range(k)
    ]
    rows.append(DisagreementRow(
        "Total",
        sum(r.disagree_count for r in rows),
        sum(r.wins_a for r in rows),
        sum(r.wins_b for r in rows),
    ))
    return rows


def _stratum(m, edges):
    last = len(edges) - 2
    for s in range(last + 1):
        lo, hi = edges[s], edges[s + 1]
        if lo <= m < hi or (s == last and m == hi):
            return s
    return None


# -- mixture weight sweep --------------------------------------------------

class SweepResult(NamedTuple):
    best_alpha: float
    curve: list  # [(alpha, brier), ...]


def alpha_grid(step: float = DEFAULT_GRID_STEP) -> list:
    if not 0.0 < step <= 0.5:
        raise ValidationError(f"grid step must lie in (0, 0.5], got {step}")
    k = round(1.0 / step)
    if abs(k * step - 1.0) < 1e-9:
        return [i / k for i in range(k + 1)]
    grid = [i * step for i in range(int(math.floor(1.0 / step)) + 1)]
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


def _aligned_arrays(p_mkt, p_mcp, y):
    if not (len(p_mkt) == len(p_mcp) == len(y)):
        raise ValidationError(f"length mismatch: {len(p_mkt)}, {len(p_mcp)}, {len(y)}")
    if len(y) == 0:
        raise ValidationError("cannot sweep over an empty set")
    m = np.asarray([float(Probability(v)) for v in p_mkt])
    q = np.asarray([float(Probability(v)) for v in p_mcp])
    t = np.asarray([float(int(Outcome.parse(v))) for v in y])
    return m, q, t


def mixture_brier(p_mkt, p_mcp, y, alpha: float) -> float:
    m, q, t = _aligned_arrays(p_mkt, p_mcp, y)
    return float(np.mean((q + alpha * (m - q) - t) ** 2))


def alpha_sweep(p_mkt, p_mcp, y, grid_step: float = DEFAULT_GRID_STEP) -> SweepResult:
    """Brier of the mixture on an alpha grid; minimizer is the smallest alpha on ties."""
    m, q, t = _aligned_arrays(p_mkt, p_mcp, y)
    grid = alpha_grid(grid_step)
    d = m - q
    # q + a*d equals q exactly wherever the forecasts agree, so full agreement ties every alpha
    scores = [float(np.mean((q + a * d - t) ** 2)) for a in grid]
    best = int(np.argmin(scores))
    return SweepResult(grid[best], list(zip(grid, scores)))


def analytic_alpha(p_mkt, p_mcp, y) -> float:
    """Closed-form minimizer of the mixture Brier, clamped to [0, 1].

    Returns 0 when the two forecasts coincide everywhere (every alpha ties).
    """
    m, q, t = _aligned_arrays(p_mkt, p_mcp, y)
    d = m - q
    denom = float(np.dot(d, d))
    if denom == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(np.dot(t - q, d)) / denom))


def held_out_split(instance_ids: Sequence[str], seed: int = 0, fraction: float = 0.5):
    """Deterministic split keyed on a seeded hash of each instance id.

    Returns ``(tune_ids, heldout_ids)`` preserving input order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"fraction must lie in (0, 1), got {fraction}")
    tune, held = [], []
    for iid in instance_ids:
        h = int.from_bytes(hashlib.sha256(f"{seed}:{iid}".encode()).digest()[:8], "big")
        (tune if h / 2**64 < fraction else held).append(iid)
    return tune, held
