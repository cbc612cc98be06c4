"""CUSUM estimator for a single change in mean, with significance tests.

For a series ``X_1..X_T`` the statistic at split ``s`` (``1 <= s <= T-1``) is

    Q(s) = s (T - s) / T * (mean(X_1..X_s) - mean(X_{s+1}..X_T))**2

and the changepoint estimate is the smallest ``s`` maximising ``Q``; it is
the last pre-change index (1-based).  ``Q`` is evaluated from prefix sums via
the identity ``Q(s) = (T S_s - s S_T)**2 / (T s (T - s))``.  Integer-valued
input uses integer prefix sums, other input mean-centred ones.  Splits
whose floating-point values are within rounding error of the maximum are
compared in exact rational arithmetic, so ties resolve to the smallest split
and permutation maxima are compared with the observed one exactly.

Two significance procedures are available:

* ``"permutation"`` (default): ``p = (1 + #{b: M_b >= M_obs}) / (B + 1)``
  with ``M_b`` the maximum statistic of the ``b``-th random reordering.  The
  ``b``-th reordering is drawn from a generator seeded with ``(seed, b)``, so
  the p-value does not depend on evaluation order.
* ``"penalty"``: significant when ``max Q / sigma2 > penalty`` where
  ``sigma2`` is the pooled residual variance of the two-segment fit
  (denominator ``T``) and the default penalty is ``3 log T``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import ConfigError, SeriesTooShortError

Method = Literal["permutation", "penalty"]

# int64 headroom for T * S_T in the integer path
_EXACT_LIMIT = 2**52
_EPS = float(np.finfo(np.float64).eps)
# relative rounding allowance for the final square/divide, on the sqrt scale
_REL_SLACK = 1e-12


def _values(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def _exact_ok(x: np.ndarray) -> bool:
    if not np.all(x == np.round(x)):
        return False
    return float(np.abs(x).sum()) * x.shape[-1] < _EXACT_LIMIT


def _split_terms(x: np.ndarray, exact: bool) -> np.ndarray:
    """Floating-point Q(s) for s = 1..T-1 along the last axis of ``x``."""
    T = x.shape[-1]
    s = np.arange(1, T, dtype=np.float64)
    if exact:
        S = np.cumsum(x.astype(np.int64), axis=-1)
        D = T * S[..., :-1] - np.arange(1, T, dtype=np.int64) * S[..., -1:]
        D = D.astype(np.float64)
        return D * D / (T * s * (T - s))
    centred = x - x.mean(axis=-1, keepdims=True)
    C = np.cumsum(centred, axis=-1)[..., :-1]
    q = T * C * C / (s * (T - s))
    q[np.all(x == x[..., :1], axis=-1)] = 0.0
    return q


def _slack(x: np.ndarray, exact: bool) -> np.ndarray:
    """Absolute error bound on sqrt(Q(s)) from the prefix-sum evaluation.

    Zero for integer input (the numerators are exact); otherwise a
    worst-case bound on the error of the centred partial sums.
    """
    T = x.shape[-1]
    s = np.arange(1, T, dtype=np.float64)
    if exact:
        return np.zeros(T - 1)
    bound = 2 * _EPS * float(np.abs(x).max()) * (T * T + T * math.ceil(math.log2(T)) + T)
    return np.sqrt(T / (s * (T - s))) * bound


def _exact_ints(x: np.ndarray) -> list[int]:
    """The values as integers over a common power-of-two denominator."""
    ratios = [v.as_integer_ratio() for v in x.tolist()]
    shift = max(d.bit_length() for _, d in ratios)
    return [n << (shift - d.bit_length()) for n, d in ratios]


def _exact_keys(ints: list[int], splits) -> list[Fraction]:
    """Exact values proportional to Q(s) for the given 1-based splits."""
    T = len(ints)
    S = list(itertools.accumulate(ints))
    total = S[-1]
    keys = []
    for s in splits:
        s = int(s)
        D = T * S[s - 1] - s * total
        keys.append(Fraction(D * D, s * (T - s)))
    return keys


def _near_max(q: np.ndarray, slack: np.ndarray):
    r = np.sqrt(q)
    err = slack + r * _REL_SLACK
    return r - err, r + err


def _peak(x: np.ndarray, q: np.ndarray, slack: np.ndarray) -> int:
    """Smallest 1-based split attaining the exact maximum of Q.

    Splits whose floating-point value could tie with the largest one are
    re-evaluated in exact rational arithmetic.
    """
    lower, upper = _near_max(q, slack)
    cand = np.flatnonzero(upper >= lower.max())
    if cand.size == 1:
        return int(cand[0]) + 1
    keys = _exact_keys(_exact_ints(x), cand + 1)
    return int(cand[keys.index(max(keys))]) + 1


def _is_constant(x: np.ndarray) -> bool:
    return bool(np.all(x == x[0]))


@dataclass(frozen=True, eq=False)
class CusumCurve:
    """Statistic values ``Q(s)``; ``values[s - 1]`` holds ``Q(s)``."""

    values: np.ndarray = field(repr=False)
    series_length: int
    peak: int | None = None

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, s: int) -> float:
        """``Q(s)`` for the 1-based split ``s``."""
        if not 1 <= s < self.series_length:
            raise IndexError(f"split {s} outside 1..{self.series_length - 1}")
        return float(self.values[s - 1])

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def argmax(self) -> int:
        """Smallest 1-based split attaining the maximum."""
        if self.peak is not None:
            return self.peak
        return int(np.argmax(self.values)) + 1


def cusum_curve(series) -> CusumCurve:
    """CUSUM statistic for every split of ``series`` in O(T).

    Parameters
    ----------
    series : DailySeries or array_like
        Observations ``X_1..X_T`` with ``T >= 2``.

    Returns
    -------
    CusumCurve
        ``T - 1`` non-negative values.
    """
    x = _values(series)
    T = x.size
    if T < 2:
        raise SeriesTooShortError(f"CUSUM needs at least 2 observations, got {T}")
    exact = _exact_ok(x)
    q = _split_terms(x, exact)
    q.flags.writeable = False
    return CusumCurve(q, T, _peak(x, q, _slack(x, exact)))


def pooled_variance(series, tau: int) -> float:
    """Residual variance around the two-segment mean fit split after ``tau``."""
    x = _values(series)
    if not 1 <= tau < x.size:
        raise ValueError(f"split {tau} outside 1..{x.size - 1}")
    left, right = x[:tau], x[tau:]
    ss = ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
    return float(ss / x.size)


def default_penalty(T: int) -> float:
    return 3.0 * math.log(T)


@dataclass(frozen=True)
class SignificanceConfig:
    """How :func:`detect_amoc` judges significance.

    ``penalty_value=None`` means ``3 log T`` for the series at hand.
    """

    alpha: float = 0.05
    method: Method = "permutation"
    permutations: int = 999
    seed: int = 0
    penalty_value: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.method not in ("permutation", "penalty"):
            raise ConfigError(f"unknown significance method {self.method!r}")
        if int(self.permutations) != self.permutations or self.permutations < 19:
            raise ConfigError(f"permutations must be an integer >= 19, got {self.permutations}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.penalty_value is not None and not self.penalty_value > 0:
            raise ConfigError(f"penalty_value must be positive, got {self.penalty_value}")

    def penalty_for(self, T: int) -> float:
        return default_penalty(T) if self.penalty_value is None else float(self.penalty_value)


@dataclass(frozen=True, eq=False)
class ChangepointResult:
    label: str
    start: date | None
    series_length: int
    tau_hat: int
    max_stat: float
    curve: CusumCurve = field(repr=False)
    pre_mean: float
    post_mean: float
    delta_hat: float
    p_value: float | None
    significant: bool
    method: Method
    total: float

    @property
    def tau_date(self) -> date | None:
        """Calendar date of the last pre-change day."""
        if self.start is None:
            return None
        return self.start + timedelta(days=self.tau_hat - 1)

    def to_dict(self) -> dict:
        tau_date = self.tau_date
        total = int(self.total) if float(self.total).is_integer() else self.total
        return {
            "label": self.label,
            "T": self.series_length,
            "start": self.start.isoformat() if self.start else None,
            "tau_hat": self.tau_hat,
            "tau_date": tau_date.isoformat() if tau_date else None,
            "max_stat": self.max_stat,
            "p_value": self.p_value,
            "significant": self.significant,
            "pre_mean": self.pre_mean,
            "post_mean": self.post_mean,
            "delta_hat": self.delta_hat,
            "method": self.method,
            "total": total,
        }


def _replicate_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(b)])


def permutation_pvalue(series, B: int = 999, seed: int = 0) -> float:
    """Permutation p-value of the maximum CUSUM statistic.

    Parameters
    ----------
    series : DailySeries or array_like
        At least 4 observations.
    B : int
        Number of random reorderings, at least 19.
    seed : int
        Base seed; replicate ``b`` uses a generator seeded with ``(seed, b)``.

    Returns
    -------
    float
        ``(1 + #{b: M_b >= M_obs}) / (B + 1)``, or 1 for a constant series.
    """
    x = _values(series)
    T = x.size
    if T < 4:
        raise SeriesTooShortError(f"permutation test needs at least 4 observations, got {T}")
    if int(B) != B or B < 19:
        raise ValueError(f"B must be an integer >= 19, got {B}")
    if _is_constant(x):
        return 1.0
    exact = _exact_ok(x)
    slack = _slack(x, exact)
    ints = _exact_ints(x)
    q_obs = _split_terms(x, exact)
    tau = _peak(x, q_obs, slack)
    key_obs = _exact_keys(ints, [tau])[0]
    obs_lower, obs_upper = (v[tau - 1] for v in _near_max(q_obs, slack))

    chunk = max(1, min(B, 2**20 // T))
    exceed = 0
    for lo in range(0, B, chunk):
        idx = np.stack([_replicate_rng(seed, b).permutation(T) for b in range(lo, min(B, lo + chunk))])
        lower, upper = _near_max(_split_terms(x[idx], exact), slack)
        sure = lower.max(axis=1) >= obs_upper
        exceed += int(np.count_nonzero(sure))
        # rows too close to call in floating point are settled exactly
        for row in np.flatnonzero(~sure & (upper.max(axis=1) >= obs_lower)):
            cols = np.flatnonzero(upper[row] >= obs_lower) + 1
            row_ints = [ints[i] for i in idx[row]]
            if max(_exact_keys(row_ints, cols)) >= key_obs:
                exceed += 1
    return (1 + exceed) / (B + 1)


def penalty_test(curve, noise_variance_estimate: float, penalty_value: float) -> bool:
    """True iff ``max Q / noise_variance_estimate > penalty_value``."""
    if not noise_variance_estimate > 0:
        raise ValueError(
            f"noise variance estimate must be positive, got {noise_variance_estimate}"
        )
    if not penalty_value > 0:
        raise ValueError(f"penalty must be positive, got {penalty_value}")
    values = curve.values if isinstance(curve, CusumCurve) else np.asarray(curve)
    return bool(values.max() / noise_variance_estimate > penalty_value)


def detect_amoc(series, config: SignificanceConfig | None = None) -> ChangepointResult:
    """Locate and test a single change in mean.

    A constant series yields ``max_stat = 0``, ``p_value = 1`` and no
    significance under either method.  In penalty mode a non-constant series
    whose two-segment fit is perfect (zero pooled variance) is significant.

    Parameters
    ----------
    series : DailySeries or array_like
        At least 4 observations.  A :class:`DailySeries` contributes its
        label and start date to the result.
    config : SignificanceConfig, optional
        Defaults to a 999-replicate permutation test at ``alpha = 0.05``.
    """
    config = config or SignificanceConfig()
    x = _values(series)
    T = x.size
    if T < 4:
        raise SeriesTooShortError(f"changepoint detection needs at least 4 observations, got {T}")
    label = getattr(series, "label", "series")
    start = getattr(series, "start", None)
    curve = cusum_curve(x)

    if _is_constant(x):
        tau = 1
        max_stat = 0.0
        p_value: float | None = 1.0
        significant = False
    else:
        tau = curve.argmax
        max_stat = curve[tau]
        if config.method == "permutation":
            p_value = permutation_pvalue(x, config.permutations, config.seed)
            significant = p_value <= config.alpha
        else:
            p_value = None
            var = pooled_variance(x, tau)
            if var > 0:
                significant = penalty_test(curve, var, config.penalty_for(T))
            else:
                significant = max_stat > 0

    pre_mean = float(x[:tau].mean())
    post_mean = float(x[tau:].mean())
    return ChangepointResult(
        label=label,
        start=start,
        series_length=T,
        tau_hat=tau,
        max_stat=float(max_stat),
        curve=curve,
        pre_mean=pre_mean,
        post_mean=post_mean,
        delta_hat=post_mean - pre_mean,
        p_value=p_value,
        significant=bool(significant),
        method=config.method,
        total=float(x.sum()),
    )
