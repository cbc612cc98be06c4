"""
Calibration and power by simulation
===================================

Null series (no shift) should be flagged about alpha of the time; a
two-sigma shift at day 90 should be found almost always and placed within a
few days.
"""

from countcusum import SignificanceConfig, SyntheticSpec, evaluate

config = SignificanceConfig(alpha=0.05, permutations=199, seed=0)

null = SyntheticSpec(length=159, mu=10, sigma=1, seed=1)
s = evaluate(null, 300, config)
print(f"null: false positive rate {s.false_positive_rate:.3f} over {s.trials} trials")

for delta in (0.5, 1.0, 2.0):
    spec = SyntheticSpec(length=159, tau=90, mu=10, delta=delta, sigma=1, seed=2)
    s = evaluate(spec, 100, config)
    print(
        f"delta={delta}: detection rate {s.detection_rate:.2f}, "
        f"median |tau_hat - 90| = {s.median_abs_localization_error}"
    )

poisson = SyntheticSpec(length=159, tau=90, mu=20, delta=4, noise="poisson", sigma=None, seed=3)
s = evaluate(poisson, 100, config)
print(f"poisson mu=20 -> 24: detection rate {s.detection_rate:.2f}")
