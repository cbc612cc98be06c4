"""
Autocorrelation diagnostics
===========================

The CUSUM significance tests assume independent days.  The sample ACF with
its +/-1.96/sqrt(T) band shows when that assumption is doubtful.
"""

import numpy as np

from countcusum import acf

rng = np.random.default_rng(3)
T = 159

white = rng.poisson(100, T)
res = acf(white, 30)
print(f"band half-width {res.band_halfwidth:.4f}")
print("white noise, lags outside band:", res.outside_band().tolist())

# A slowly drifting level (day-to-day persistence) looks very different.
level = 100 + np.cumsum(rng.normal(0, 3, T))
drifting = rng.poisson(np.clip(level, 1, None))
res = acf(drifting, 30)
print("drifting level, lags outside band:", len(res.outside_band()), "of 30")
for k in (1, 2, 5, 10, 20, 30):
    print(f"  r_{k:<2d} = {res.correlations[k]:+.3f}")
