import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mentioncast import (
    Outcome,
    ValidationError,
    alpha_sweep,
    analytic_alpha,
    brier,
    calibration_curve,
    classify_and_score,
    disagreement_analysis,
    ece,
)
from mentioncast.evaluation import alpha_grid, bin_index, ece_from_curve, held_out_split, summarize

Y, N = Outcome.YES, Outcome.NO


@pytest.mark.parametrize("pairs, expected", [
    ([(1.0, Y), (0.0, N)], 0.0),
    ([(0.5, Y), (0.5, N)], 0.25),
    ([(0.45, Y), (0.80, Y), (0.30, N)], 0.4325 / 3),
])
def test_brier_examples(pairs, expected):
    assert brier(pairs) == pytest.approx(expected, abs=1e-12)


def test_empty_sets_rejected():
    for fn in (brier, ece, classify_and_score, calibration_curve):
        with pytest.raises(ValidationError):
            fn([])


TWO_BIN = [(0.05, N)] * 9 + [(0.05, Y)] + [(0.95, Y)] * 10


@pytest.mark.parametrize("pairs, expected", [
    ([(1.0, Y)], 0.0),
    ([(0.75, Y), (0.75, N)], 0.25),
    (TWO_BIN, 0.05),
])
def test_ece_examples(pairs, expected):
    assert ece(pairs, 10) == pytest.approx(expected, abs=1e-12)


def test_zero_probability_lands_in_first_bin():
    assert bin_index(0.0, 10) == 1
    rows = calibration_curve([(0.0, N)], 10)
    assert rows[0].count == 1


@pytest.mark.parametrize("p", [0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0, 0.30000000000000004, 1e-300])
def test_bin_edges_match_oracle(p):
    assert bin_index(p, 10) == oracles._float_bin(p, 10)


@given(st.floats(0.0, 1.0), st.integers(1, 40))
def test_bin_index_matches_direct_edge_scan(p, n_bins):
    assert bin_index(p, n_bins) == oracles._float_bin(p, n_bins)


def test_classify_examples():
    assert classify_and_score([(0.9, Y), (0.1, N)]) == (100.0, 1.0)
    acc, _ = classify_and_score([(0.5, N)])
    assert acc == 0.0
    acc, f1 = classify_and_score([(0.8, Y), (0.8, N), (0.2, N)])
    assert round(acc, 1) == 66.7 and round(f1, 3) == 0.667


def test_f1_zero_when_no_true_positives():
    assert classify_and_score([(0.1, Y), (0.2, N)]) == (50.0, 0.0)


def test_calibration_curve_examples():
    rows = calibration_curve([(0.95, Y)] * 10, 10)
    assert len(rows) == 10
    assert [r.count for r in rows] == [0] * 9 + [10]
    assert rows[9].mean_pred == pytest.approx(0.95) and rows[9].mean_outcome == 1.0
    assert rows[0].mean_pred is None
    rows = calibration_curve(TWO_BIN, 10)
    assert (rows[0].count, rows[9].count) == (10, 10)
    assert rows[0].mean_outcome == pytest.approx(0.1) and rows[9].mean_outcome == 1.0


def random_set(rng, n_max=20):
    n = rng.randint(1, n_max)
    grid = rng.random() < 0.5
    probs = [rng.randint(0, 20) / 20 if grid else rng.random() for _ in range(n)]
    ys = [rng.randint(0, 1) for _ in range(n)]
    return probs, ys


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=1, max_size=20))
def test_metrics_match_oracles(pairs):
    probs = [p for p, _ in pairs]
    ys = [y for _, y in pairs]
    assert abs(brier(pairs) - float(oracles.brier(probs, ys))) <= 1e-12
    assert abs(ece(pairs) - float(oracles.ece(probs, ys))) <= 1e-12
    acc, f1 = classify_and_score(pairs)
    o_acc, o_f1 = oracles.accuracy_f1(probs, ys)
    assert abs(acc - float(o_acc)) <= 1e-12 and abs(f1 - float(o_f1)) <= 1e-12


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=1, max_size=30), st.integers(1, 20))
def test_ece_reconstructs_from_curve(pairs, n_bins):
    rows = calibration_curve(pairs, n_bins)
    assert sum(r.count for r in rows) == len(pairs)
    total = 0.0
    for r in rows:
        if r.count:
            total += (r.count / len(pairs)) * abs(r.mean_outcome - r.mean_pred)
    assert total == ece(pairs, n_bins)
    assert ece_from_curve(rows) == ece(pairs, n_bins)


def test_brier_bounded():
    rng = random.Random(3)
    for _ in range(50):
        probs, ys = random_set(rng)
        assert 0.0 <= brier(list(zip(probs, ys))) <= 1.0


def test_calibrated_synthetic_ece_is_small():
    rng = np.random.default_rng(12345)
    p = rng.integers(0, 21, size=10_000) / 20
    y = rng.random(10_000) < p
    assert ece(list(zip(p.tolist(), y.astype(int).tolist()))) < 0.02


def test_constant_base_rate_forecaster_has_zero_ece():
    ys = [1, 0, 1, 1]
    pairs = [(0.75, y) for y in ys]
    assert ece(pairs) == 0.0


def test_summarize():
    s = summarize([(0.9, Y), (0.1, N)])
    assert (s.brier, s.ece, s.accuracy, s.f1, s.n) == (pytest.approx(0.01), pytest.approx(0.1), 100.0, 1.0, 2)


# -- disagreement ----------------------------------------------------------

def test_disagreement_identical_methods():
    f = [0.2, 0.55, 0.9]
    rows = disagreement_analysis(f, f, [Y, N, Y], [0.3, 0.55, 0.8])
    assert all(r.disagree_count == 0 for r in rows)


def test_disagreement_single_instance():
    rows = disagreement_analysis([0.6], [0.4], [Y], [0.55])
    by = {r.market_bin_label: r for r in rows}
    assert (by["50-60%"].disagree_count, by["50-60%"].wins_a, by["50-60%"].wins_b) == (1, 1, 0)
    assert by["Total"].disagree_count == 1


def test_disagreement_labels_and_totals():
    rng = random.Random(7)
    n = 200
    fa = [rng.random() for _ in range(n)]
    fb = [rng.random() for _ in range(n)]
    ys = [rng.randint(0, 1) for _ in range(n)]
    ms = [rng.random() for _ in range(n)]
    rows = disagreement_analysis(fa, fb, ys, ms)
    assert [r.market_bin_label for r in rows] == ["0-50%", "50-60%", "60-70%", "70-100%", "Total"]
    total = rows[-1]
    assert total.disagree_count == sum(r.disagree_count for r in rows[:-1])
    assert total.wins_a == sum(r.wins_a for r in rows[:-1])
    assert total.wins_b == sum(r.wins_b for r in rows[:-1])
    assert all(r.wins_a + r.wins_b <= r.disagree_count for r in rows)


def test_disagreement_strata_boundaries():
    # strata are [lo, hi) except the last, which is closed at 1.0
    rows = disagreement_analysis([0.6] * 4, [0.4] * 4, [Y] * 4, [0.5, 0.6, 0.7, 1.0])
    assert [r.disagree_count for r in rows] == [0, 1, 1, 2, 4]


def test_disagreement_accepts_forecasts_and_checks_ids():
    from mentioncast import Forecast

    a = [Forecast("x", "market_baseline", 0.6)]
    with pytest.raises(ValidationError):
        disagreement_analysis(a, [Forecast("y", "mcp", 0.4)], [Y], [0.6])
    rows = disagreement_analysis(a, [Forecast("x", "mcp", 0.4)], [Y], [0.6])
    assert rows[2].wins_a == 1


def test_disagreement_misaligned():
    with pytest.raises(ValidationError):
        disagreement_analysis([0.1], [0.2, 0.3], [Y], [0.5])


# -- sweep -----------------------------------------------------------------

def test_alpha_grid():
    g = alpha_grid(0.01)
    assert len(g) == 101 and g[0] == 0.0 and g[-1] == 1.0 and g[70] == 0.7
    assert alpha_grid(0.3) == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    with pytest.raises(ValidationError):
        alpha_grid(0.6)


def test_sweep_perfect_market():
    m = [1.0, 0.0, 1.0]
    q = [0.6, 0.3, 0.2]
    assert alpha_sweep(m, q, m).best_alpha == 1.0


def test_sweep_perfect_mcp():
    q = [1.0, 0.0, 1.0]
    m = [0.6, 0.3, 0.2]
    assert alpha_sweep(m, q, q).best_alpha == 0.0


def test_sweep_single_instance_clamped():
    assert analytic_alpha([0.4], [0.8], [1]) == 0.0
    res = alpha_sweep([0.4], [0.8], [1])
    assert res.best_alpha == 0.0
    # curve matches the exact quadratic
    for a, s in res.curve[::10]:
        assert s == pytest.approx(float(oracles.mixture_brier([0.4], [0.8], [1], a)), abs=1e-12)


def test_sweep_degenerate_denominator():
    assert analytic_alpha([0.3, 0.7], [0.3, 0.7], [0, 1]) == 0.0
    assert alpha_sweep([0.3, 0.7], [0.3, 0.7], [0, 1]).best_alpha == 0.0


def test_sweep_length_mismatch():
    with pytest.raises(ValidationError):
        alpha_sweep([0.1], [0.2, 0.3], [1])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.integers(0, 1)), min_size=1, max_size=25))
def test_sweep_near_analytic_and_convex(rows):
    m, q, y = zip(*rows)
    res = alpha_sweep(m, q, y, 0.01)
    assert abs(res.best_alpha - analytic_alpha(m, q, y)) <= 0.01 + 1e-12
    s = [v for _, v in res.curve]
    assert all(s[i - 1] - 2 * s[i] + s[i + 1] >= -1e-12 for i in range(1, len(s) - 1))


def test_held_out_split_deterministic():
    ids = [f"i{k}" for k in range(200)]
    a = held_out_split(ids, seed=1)
    assert a == held_out_split(ids, seed=1)
    assert sorted(a[0] + a[1]) == sorted(ids)
    assert 70 < len(a[0]) < 130
    assert a != held_out_split(ids, seed=2)
