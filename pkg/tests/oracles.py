"""Brute-force reference implementations used only by the tests.

Written independently of the package: exact rational arithmetic for metrics,
an every-position scan for keyword resolution, direct edge comparisons for
binning.
"""

import unicodedata
from fractions import Fraction


def brier(probs, ys):
    total = Fraction(0)
    for p, y in zip(probs, ys):
        total += (Fraction(p) - y) ** 2
    return total / len(probs)


def bin_of(p, n_bins):
    p = Fraction(p)
    if p == 0:
        return 1
    for b in range(1, n_bins + 1):
        if Fraction(b - 1, n_bins) < p <= Fraction(b, n_bins):
            return b
    raise AssertionError(p)


def _float_bin(p, n_bins):
    # same boundary convention, comparing against the float edges b/B
    if p == 0:
        return 1
    for b in range(1, n_bins + 1):
        if (b - 1) / n_bins < p <= b / n_bins:
            return b
    raise AssertionError(p)


def ece(probs, ys, n_bins=10):
    groups = {}
    for p, y in zip(probs, ys):
        groups.setdefault(_float_bin(p, n_bins), []).append((Fraction(p), y))
    n = len(probs)
    total = Fraction(0)
    for members in groups.values():
        mean_p = sum(p for p, _ in members) / len(members)
        mean_y = Fraction(sum(y for _, y in members), len(members))
        total += Fraction(len(members), n) * abs(mean_y - mean_p)
    return total


def accuracy_f1(probs, ys, threshold=0.5):
    tp = fp = fn = tn = 0
    for p, y in zip(probs, ys):
        pred = 1 if p >= threshold else 0
        if pred and y:
            tp += 1
        elif pred and not y:
            fp += 1
        elif not pred and y:
            fn += 1
        else:
            tn += 1
    acc = Fraction(tp + tn, len(probs)) * 100
    if 2 * tp + fp + fn == 0:
        return acc, Fraction(0)
    # F1 = 2TP / (2TP + FP + FN), algebraically equal to the harmonic mean
    return acc, Fraction(2 * tp, 2 * tp + fp + fn)


def _is_word_char(ch):
    return unicodedata.category(ch)[0] in ("L", "N") or ch in "-'’"


def _normalize(text, case_sensitive):
    text = unicodedata.normalize("NFC", text)
    out = []
    in_space = False
    for ch in text:
        if ch.isspace():
            if not in_space:
                out.append(" ")
            in_space = True
        else:
            out.append(ch)
            in_space = False
    text = "".join(out)
    return text if case_sensitive else text.lower()


def resolve(keyword, transcript, case_sensitive=False, word_boundary=True):
    k = _normalize(keyword.strip(), case_sensitive)
    t = _normalize(transcript, case_sensitive)
    for start in range(len(t) - len(k) + 1):
        if t[start:start + len(k)] != k:
            continue
        if not word_boundary:
            return True
        before = t[start - 1] if start > 0 else ""
        after = t[start + len(k)] if start + len(k) < len(t) else ""
        if (before == "" or not _is_word_char(before)) and (after == "" or not _is_word_char(after)):
            return True
    return False


def mixture_brier(m, q, y, alpha):
    alpha = Fraction(alpha)
    return brier([alpha * Fraction(a) + (1 - alpha) * Fraction(b) for a, b in zip(m, q)], y)

