"""
Scoring probability forecasts
=============================

Brier score, expected calibration error and thresholded accuracy on a few
hand-made forecast sets, followed by a large calibrated synthetic sample.
"""

import numpy as np

from mentioncast.evaluation import brier, calibration_curve, classify_and_score, ece

# a forecaster that says 0.9 for five events, four of which happen
pairs = [(0.9, 1)] * 4 + [(0.9, 0)]
print("brier", brier(pairs))          # (4 * 0.01 + 0.81) / 5 = 0.17
print("ece  ", ece(pairs))            # |0.8 - 0.9| = 0.1

# the calibration curve holds everything needed to rebuild ECE
for row in calibration_curve(pairs):
    if row.count:
        print(f"bin {row.bin_index}: n={row.count} mean_pred={row.mean_pred:.2f} "
              f"mean_outcome={row.mean_outcome:.2f}")

# accuracy (percent) and F1 with YES predicted when p >= 0.5
acc, f1 = classify_and_score([(0.7, 1), (0.5, 0), (0.2, 0)])
print(f"accuracy {acc:.1f}%  F1 {f1:.3f}")

# forecasts on a 0.05 grid, outcomes drawn at the forecast value: ECE is small
rng = np.random.default_rng(0)
p = rng.integers(0, 21, size=10_000) / 20
y = (rng.random(p.size) < p).astype(int)
print("calibrated synthetic ece", round(ece(list(zip(p.tolist(), y.tolist()))), 4))
