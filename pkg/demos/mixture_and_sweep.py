"""
Blending a market price with a model forecast
=============================================

The mixture p = alpha * market + (1 - alpha) * model, its value at the default
alpha, and a sweep of alpha against the analytic minimizer of the Brier score.
"""

import numpy as np

from mentioncast.evaluation import alpha_sweep, analytic_alpha, mixture_brier
from mentioncast.forecasters import DEFAULT_ALPHA, mix

# market at 45%, model at 80%: the blend leans on the market
print("mix(0.45, 0.80) =", mix(0.45, 0.80, DEFAULT_ALPHA))   # 0.555

# simulate a market that is informative and a model that is noisier
rng = np.random.default_rng(7)
truth = rng.random(400)
y = (rng.random(400) < truth).astype(int)
market = np.clip(truth + rng.normal(0, 0.10, 400), 0, 1)
model = np.clip(truth + rng.normal(0, 0.20, 400), 0, 1)

result = alpha_sweep(market, model, y, grid_step=0.01)
print(f"grid minimizer  {result.best_alpha:.2f}")
print(f"analytic        {analytic_alpha(market, model, y):.4f}")
for a in (0.0, 0.5, DEFAULT_ALPHA, 1.0):
    print(f"  alpha={a:.1f}  brier={mixture_brier(market, model, y, a):.4f}")
