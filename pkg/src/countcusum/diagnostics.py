"""Sample autocorrelation with white-noise confidence bands."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ZeroVarianceError

BAND_Z = 1.96


@dataclass(frozen=True, eq=False)
class AcfResult:
    label: str
    correlations: np.ndarray = field(repr=False)
    band_halfwidth: float
    series_length: int

    @property
    def max_lag(self) -> int:
        return self.correlations.size - 1

    def outside_band(self, start_lag: int = 1) -> np.ndarray:
        """Lags ``>= start_lag`` whose correlation leaves the band."""
        lags = np.arange(start_lag, self.max_lag + 1)
        return lags[np.abs(self.correlations[start_lag:]) > self.band_halfwidth]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "T": self.series_length,
            "band_halfwidth": self.band_halfwidth,
            "rows": [{"lag": k, "r": float(r)} for k, r in enumerate(self.correlations)],
        }

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lag", "r"])
            for k, r in enumerate(self.correlations):
                w.writerow([k, repr(float(r))])


def acf(series, max_lag: int) -> AcfResult:
    """Biased sample autocorrelations ``r_0..r_max_lag``.

    ``r_k = sum_{t<=T-k} (X_t - m)(X_{t+k} - m) / sum_t (X_t - m)**2`` with
    ``m`` the full-sample mean, which keeps every ``|r_k| <= 1``.  The band
    half-width is ``1.96 / sqrt(T)``.
    """
    x = np.asarray(series, dtype=np.float64)
    T = x.size
    if T < 2:
        raise ValueError(f"acf needs at least 2 observations, got {T}")
    if int(max_lag) != max_lag or max_lag < 1:
        raise ValueError(f"max_lag must be a positive integer, got {max_lag}")
    if max_lag >= T:
        raise ValueError(f"max_lag {max_lag} must be below the series length {T}")
    if np.all(x == x[0]):
        raise ZeroVarianceError("acf is undefined for a constant series")
    y = x - x.mean()
    denom = float(y @ y)
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for k in range(1, max_lag + 1):
        r[k] = float(y[:-k] @ y[k:]) / denom
    r.flags.writeable = False
    return AcfResult(getattr(series, "label", "series"), r, BAND_Z / math.sqrt(T), T)
