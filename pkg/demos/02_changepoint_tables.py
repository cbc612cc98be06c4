"""
Locating and testing a single mean shift
========================================

Runs the CUSUM estimator on synthetic sub-class series and prints a table
in the ``name | #tweets | changepoint`` layout.
"""

from datetime import date

import numpy as np

from countcusum import DailySeries, SignificanceConfig, cusum_curve, detect_amoc, render_report

rng = np.random.default_rng(42)
start = date(2020, 1, 1)


def stepped(label, tau, before, after):
    lam = np.where(np.arange(159) < tau, before, after)
    return DailySeries(label, start, rng.poisson(lam))


series = [
    stepped("CY", 89, 1400, 1600),  # last pre-change day: 29th March
    stepped("ON", 42, 550, 650),  # 11th February
    stepped("TW", 118, 540, 660),  # 27th April
    DailySeries("flat", start, rng.poisson(500, 159)),
]

# The statistic curve peaks at the estimated split.
curve = cusum_curve(series[0])
print("CY curve argmax:", curve.argmax, "max:", round(curve.max, 1))

config = SignificanceConfig(alpha=0.05, permutations=999, seed=1)
results = [detect_amoc(s, config) for s in series]
for r in results:
    print(f"{r.label:5s} tau_hat={r.tau_hat:3d} p={r.p_value:.3f} delta_hat={r.delta_hat:+.1f}")

print()
print(render_report([(r.label, r.total, r) for r in results]))

# The penalty rule (max Q / pooled variance > 3 ln T) is an alternative.
pen = [detect_amoc(s, SignificanceConfig(method="penalty")) for s in series]
print("penalty mode significant:", {r.label: r.significant for r in pen})
