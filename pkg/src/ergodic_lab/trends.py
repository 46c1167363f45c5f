"""Reproducible decision rules that label finite traces of the condition sequences."""

import math

import numpy as np

VANISHING = "vanishing"
BOUNDED = "bounded"
DIVERGING = "diverging"
INCONCLUSIVE = "inconclusive"

TINY_FRACTION = 1e-6
DECAY_FRACTION = 0.1
ENVELOPE_RATIO = 0.97
LOG_SLOPE = 0.01
BOUND_SLACK = 1.05
SUPERLOG_EXPONENT = 1.5


def _log_slope(t, v):
    t = np.asarray(t, dtype=float)
    v = np.log(np.asarray(v, dtype=float))
    t = t - t.mean()
    denom = float(np.dot(t, t))
    if denom == 0.0:
        return 0.0
    return float(np.dot(t, v - v.mean()) / denom)


def classify_sequence(values) -> str:
    """Label a trace a_1..a_N as vanishing, diverging, bounded or inconclusive.

    Rules, applied in order:

    * vanishing: the last quarter sits below 1e-6 * max(a); or the last
      quarter decreases (strictly, or in envelope: the max over the final
      eighth is at most 0.97 times the max over the eighth before it) and has
      already dropped under 0.1 * max(a);
    * diverging: a non-finite value, or log a_n has regression slope above
      0.01 per step over the last half;
    * bounded: max over the last half <= 1.05 * max over the first half;
    * inconclusive otherwise.
    """
    a = np.asarray(values, dtype=float)
    n = a.size
    if n < 8:
        return INCONCLUSIVE
    if not np.all(np.isfinite(a)):
        return DIVERGING
    amax = float(a.max())
    quarter = a[n - max(n // 4, 2):]
    if amax == 0.0 or np.all(quarter <= TINY_FRACTION * amax):
        return VANISHING
    e = max(n // 8, 1)
    last, prev = a[n - e:], a[n - 2 * e:n - e]
    decreasing = bool(np.all(np.diff(quarter) < 0)) or last.max() <= ENVELOPE_RATIO * prev.max()
    if decreasing and last.max() <= DECAY_FRACTION * amax:
        return VANISHING
    half = a[n // 2:]
    idx = np.arange(n // 2, n) + 1
    if np.all(half > 0) and _log_slope(idx, half) > LOG_SLOPE:
        return DIVERGING
    if half.max() <= BOUND_SLACK * a[:n // 2].max():
        return BOUNDED
    return INCONCLUSIVE


def running_cesaro_sup(values) -> np.ndarray:
    """S_m = max_{k<=m} (1/k) * sum_{n<=k} b_n."""
    b = np.asarray(values, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        avg = np.cumsum(b) / np.arange(1, b.size + 1)
    return np.maximum.accumulate(avg) if b.size else avg


def classify_cesaro_bound(sups) -> str:
    """Label the running sup S_1..S_M of Cesàro averages.

    bounded if S_M <= 1.05 * S_ceil(M/2); diverging if non-finite or if
    log S_m grows faster than 1.5 * log log m over the last half (that is,
    faster than any fixed power of the logarithm up to that exponent);
    inconclusive otherwise.
    """
    S = np.asarray(sups, dtype=float)
    M = S.size
    if M < 8:
        return INCONCLUSIVE
    if not np.all(np.isfinite(S)):
        return DIVERGING
    if S[-1] <= BOUND_SLACK * S[math.ceil(M / 2) - 1]:
        return BOUNDED
    half = S[M // 2:]
    m = np.arange(M // 2, M) + 1.0
    if np.all(half > 0) and np.all(m > math.e):
        if _log_slope(np.log(np.log(m)), half) > SUPERLOG_EXPONENT:
            return DIVERGING
    return INCONCLUSIVE
