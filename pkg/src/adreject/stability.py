"""Stability-based confidence for anomaly scores.

Given ``n`` training scores and a contamination factor ``gamma``, the
probability that a score with training frequency ``psi_n`` would be
ranked among the top ``floor(n * gamma)`` scores of a resampled training
set is a binomial upper tail:

    P(anomaly | psi_n) = P(X >= n - a + 1),   X ~ Binomial(n, q)

with ``a = floor(n * gamma)`` and ``q = (1 + n * psi_n) / (2 + n)``.
Confidence in a prediction is ``|2 P - 1|``; predictions whose ``P``
falls inside ``[exp(-T), 1 - exp(-T)]`` are candidates for rejection.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import betainc, gammaln

from .core import (
    DegenerateStabilityMap,
    DomainError,
    NonFiniteInput,
    ScoreSet,
    ToleranceSpec,
    anomaly_count,
)

__all__ = [
    "training_frequency",
    "in_sample_frequencies",
    "stability_probability",
    "stability_tails",
    "confidence",
    "in_rejection_band",
    "reject_from_tails",
    "stability_inverse",
]


def training_frequency(train: ScoreSet, s):
    """Fraction of training scores less than or equal to ``s``.

    Ties count: a score equal to a training score includes it.

    Parameters
    ----------
    train : ScoreSet
    s : float or array-like
        Query score(s); must be finite.

    Returns
    -------
    float or ndarray
        ``|{i : s_i <= s}| / n``, in ``[0, 1]``.
    """
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("query scores must be finite")
    psi = np.searchsorted(train.sorted_scores, arr, side="right") / train.n
    return float(psi) if arr.ndim == 0 else psi


def in_sample_frequencies(train: ScoreSet) -> np.ndarray:
    """Training frequency of each training score, in input order."""
    return np.searchsorted(train.sorted_scores, train.scores, side="right") / train.n


def _validate_n_gamma(n: int, gamma: float) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not (0.0 <= gamma < 0.5):
        raise DomainError(f"gamma must lie in [0, 0.5), got {gamma}")


@lru_cache(maxsize=8)
def _log_binom_coeffs(k: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Outcome indices ``k..n`` and their log binomial coefficients."""
    i = np.arange(k, n + 1, dtype=float)
    lc = gammaln(n + 1.0) - gammaln(i + 1.0) - gammaln(n - i + 1.0)
    i.setflags(write=False)
    lc.setflags(write=False)
    return i, lc


def _log_binom_tail_many(k: int, n: int, qs: np.ndarray) -> np.ndarray:
    """log P(X >= k) by log-space summation, vectorized over ``qs``."""
    if k <= 0:
        return np.zeros(qs.shape)
    if k > n:
        return np.full(qs.shape, -np.inf)
    i, lc = _log_binom_coeffs(k, n)
    out = np.empty(qs.shape)
    # Chunk so the (terms x points) matrix stays modest in memory.
    step = max(1, 4_000_000 // i.size)
    for lo in range(0, qs.size, step):
        qc = qs[lo:lo + step]
        t = (
            lc[:, None]
            + i[:, None] * np.log(qc)[None, :]
            + (n - i)[:, None] * np.log1p(-qc)[None, :]
        )
        m = t.max(axis=0)
        out[lo:lo + step] = m + np.log(np.exp(t - m).sum(axis=0))
    return out


def _log_binom_tail(k: int, n: int, q: float) -> float:
    """log P(X >= k) by compensated summation in log space."""
    return float(_log_binom_tail_many(k, n, np.asarray([q], dtype=float))[0])


# Below this magnitude the incomplete-beta routine can return values
# with only a couple of correct digits (observed ~5e-2 relative error
# near 1e-300); the log-space summation is good to ~1e-12 there.
_BETAINC_TRUST_FLOOR = 1e-250


def _binom_upper_tail(k, n: int, q):
    """P(X >= k) for X ~ Binomial(n, q), vectorized over k and q.

    Uses the regularized incomplete beta identity
    ``P(X >= k) = I_q(k, n - k + 1)``.  scipy reports no error estimate,
    so the log-space summation stands in whenever the beta routine
    returns a non-finite value or anything below the magnitude where
    its accuracy has been spot-checked.
    """
    k = np.asarray(k)
    q = np.asarray(q, dtype=float)
    out = np.empty(np.broadcast(k, q).shape, dtype=float)
    kb, qb = np.broadcast_arrays(k, q)
    inside = (kb >= 1) & (kb <= n)
    out[kb < 1] = 1.0
    out[kb > n] = 0.0
    if np.any(inside):
        ki = kb[inside].astype(float)
        out[inside] = betainc(ki, n - ki + 1.0, qb[inside])
    bad = inside & (~np.isfinite(out) | (out < _BETAINC_TRUST_FLOOR))
    if np.any(bad):
        kb_bad = kb[bad].astype(int)
        qb_bad = qb[bad].astype(float)
        res = np.empty(qb_bad.shape)
        for kv in np.unique(kb_bad):
            sel = kb_bad == kv
            res[sel] = np.exp(_log_binom_tail_many(int(kv), n, qb_bad[sel]))
        out[bad] = res
    return out


def _binom_lower_tail(m, n: int, q):
    """P(X <= m) for X ~ Binomial(n, q), computed directly (not as 1 - upper)."""
    m = np.asarray(m)
    q = np.asarray(q, dtype=float)
    # P(X <= m) = P(Y >= n - m) for Y ~ Binomial(n, 1 - q).
    return _binom_upper_tail(n - m, n, 1.0 - q)


def _q_of_psi(psi, n: int):
    return (1.0 + n * np.asarray(psi, dtype=float)) / (2.0 + n)


def _check_psi(psi) -> np.ndarray:
    arr = np.asarray(psi, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("psi_n must lie in [0, 1]")
    return arr


def stability_probability(psi_n, n: int, gamma: float):
    """Probability that a score with training frequency ``psi_n`` would be
    predicted anomalous under a resampled training set.

    Parameters
    ----------
    psi_n : float or array-like
        Training frequency, in ``[0, 1]``.
    n : int
        Training set size.
    gamma : float
        Contamination factor, in ``[0, 0.5)``.

    Returns
    -------
    float or ndarray
        ``P(X >= n - a + 1)`` with ``a = floor(n * gamma)`` and
        ``X ~ Binomial(n, (1 + n * psi_n) / (2 + n))``.  Zero when
        ``a == 0`` (the empty sum).
    """
    arr = _check_psi(psi_n)
    _validate_n_gamma(n, gamma)
    a = anomaly_count(n, gamma)
    if a == 0:
        out = np.zeros_like(arr)
        return float(out) if arr.ndim == 0 else out
    out = _binom_upper_tail(n - a + 1, n, _q_of_psi(arr, n))
    return float(out) if arr.ndim == 0 else out


def stability_tails(psi_n, n: int, gamma: float):
    """Upper and lower binomial tails of the stability distribution.

    Returns
    -------
    (upper, lower) : pair of float or ndarray
        ``upper = P(X >= n - a + 1)`` is the anomaly probability;
        ``lower = P(X <= n - a)`` is its complement, computed directly
        so that values near one keep full relative accuracy.
    """
    arr = _check_psi(psi_n)
    _validate_n_gamma(n, gamma)
    a = anomaly_count(n, gamma)
    if a == 0:
        up = np.zeros_like(arr)
        lo = np.ones_like(arr)
    else:
        q = _q_of_psi(arr, n)
        up = _binom_upper_tail(n - a + 1, n, q)
        lo = _binom_lower_tail(n - a, n, q)
    if arr.ndim == 0:
        return float(up), float(lo)
    return up, lo


def confidence(p_anomaly):
    """Confidence of the base prediction: ``|2 p - 1|``."""
    p = np.asarray(p_anomaly, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0) or not np.all(np.isfinite(p)):
        raise DomainError("p_anomaly must lie in [0, 1]")
    out = np.abs(2.0 * p - 1.0)
    return float(out) if p.ndim == 0 else out


def in_rejection_band(p_anomaly, tol: ToleranceSpec):
    """True when ``p_anomaly`` lies in the closed band
    ``[exp(-T), 1 - exp(-T)]``.

    Equivalent to ``confidence <= 1 - 2 exp(-T)`` but compared in
    probability space, where both band edges are far from the rounding
    cliff at 1.
    """
    p = np.asarray(p_anomaly, dtype=float)
    edge = tol.band_edge
    out = (p >= edge) & (p <= 1.0 - edge)
    return bool(out) if p.ndim == 0 else out


def reject_from_tails(upper, lower, tol: ToleranceSpec):
    """Band membership from both tails: ``upper >= exp(-T)`` and
    ``1 - p = lower >= exp(-T)``, each tail computed directly."""
    edge = tol.band_edge
    up = np.asarray(upper, dtype=float)
    lo = np.asarray(lower, dtype=float)
    out = (up >= edge) & (lo >= edge)
    return bool(out) if up.ndim == 0 else out


def stability_inverse(
    target_p: float,
    n: int,
    gamma: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Smallest training frequency whose stability probability reaches
    ``target_p``.

    The stability probability is non-decreasing in ``psi_n``, so the
    preimage boundary is found by bisection.  Targets below ``1e-8`` are
    bracketed on the log of the tail to keep relative accuracy.

    Parameters
    ----------
    target_p : float
        Target probability, in ``(0, 1)``.
    n, gamma
        As in :func:`stability_probability`; ``floor(n * gamma)`` must be
        positive.
    tol : float
        Absolute tolerance on ``psi_n``.
    max_iter : int
        Bisection iteration cap.

    Returns
    -------
    float
        ``inf {psi : P(psi) >= target_p}``, clipped to 0 when the target
        is already met at ``psi = 0`` and to 1 when it is never met.

    Raises
    ------
    DegenerateStabilityMap
        If ``floor(n * gamma) == 0``: the map is identically zero.
    """
    _validate_n_gamma(n, gamma)
    if not (0.0 < target_p < 1.0):
        raise DomainError(f"target_p must lie in (0, 1), got {target_p}")
    a = anomaly_count(n, gamma)
    if a == 0:
        raise DegenerateStabilityMap(
            f"floor(n * gamma) == 0 for n={n}, gamma={gamma}"
        )
    k = n - a + 1
    log_mode = target_p < 1e-8
    if log_mode:
        target = math.log(target_p)

        def reaches(psi: float) -> bool:
            return _log_binom_tail(k, n, float(_q_of_psi(psi, n))) >= target

    else:

        def reaches(psi: float) -> bool:
            return float(_binom_upper_tail(k, n, _q_of_psi(psi, n))) >= target_p

    if reaches(0.0):
        return 0.0
    if not reaches(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi
