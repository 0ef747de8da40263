"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, obvious way (loops,
exact rational or high-precision decimal arithmetic) and shares no code
with the package internals beyond the public parameter conventions.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np


def brute_binom_upper_tail(k: int, n: int, q: Fraction) -> Fraction:
    """P(X >= k), X ~ Binomial(n, q), by term recurrence in exact rationals."""
    if k <= 0:
        return Fraction(1)
    if k > n:
        return Fraction(0)
    # term(j) = C(n, j) q^j (1-q)^(n-j), built iteratively from term(k).
    term = Fraction(1)
    for j in range(k):
        term *= Fraction(n - j, j + 1)
    term *= q**k * (1 - q) ** (n - k)
    total = term
    for j in range(k, n):
        term *= Fraction(n - j, j + 1) * q / (1 - q)
        total += term
    return total


def snapped_floor(x: float, snap: float = 1e-9) -> int:
    """floor(x), except values within ``snap`` of an integer round to it."""
    r = round(x)
    if abs(x - r) <= snap:
        return int(r)
    return math.floor(x)


def brute_stability(psi: float, n: int, gamma: float) -> Fraction:
    """Exact anomaly-stability probability at training frequency psi."""
    a = snapped_floor(n * gamma)
    if a == 0:
        return Fraction(0)
    q = (1 + n * Fraction(psi)) / (n + 2)
    return brute_binom_upper_tail(n - a + 1, n, q)


def brute_training_frequency(train_scores, s: float) -> float:
    count = sum(1 for v in train_scores if v <= s)
    return count / len(train_scores)


def decimal_band_edges(n: int, gamma: float, T: float) -> tuple[Decimal, Decimal]:
    """Band edges in 50-digit decimal arithmetic, before clipping."""
    getcontext().prec = 50
    dn = Decimal(n)
    dg = Decimal(repr(gamma))
    dT = Decimal(repr(T))
    root = (dT / (2 * dn)).sqrt() * (1 + 2 / dn)
    center = (1 - dg) * (1 + 2 / dn)
    t1 = center + 2 / (dn * dn) - root
    t2 = center - 1 / dn + root
    return t1, t2


def brute_cost(base_anomaly, rejected, labels, c_fp: float, c_fn: float,
               c_r: float) -> float:
    total = 0.0
    for b, r, y in zip(base_anomaly, rejected, labels):
        if r:
            total += c_r
        elif b and not y:
            total += c_fp
        elif not b and y:
            total += c_fn
    return total / len(labels)


def brute_knn_scores(train: np.ndarray, queries: np.ndarray, k: int) -> list[float]:
    """Distance to the k-th nearest neighbor, one exact match excluded."""
    out = []
    for x in queries:
        dists = sorted(float(np.linalg.norm(x - t)) for t in train)
        if dists[0] == 0.0:
            dists = dists[1:]
        out.append(dists[k - 1])
    return out


def brute_hbos_scores(train: np.ndarray, queries: np.ndarray,
                      n_bins: int) -> list[float]:
    """Sum over features of -log Laplace-smoothed bin density."""
    n, d = train.shape
    feat = []
    for j in range(d):
        col = train[:, j]
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            feat.append(None)
            continue
        edges = [lo + (hi - lo) * i / n_bins for i in range(n_bins + 1)]
        counts = [0] * n_bins
        for v in col:
            b = min(int((v - lo) / (hi - lo) * n_bins), n_bins - 1)
            counts[b] += 1
        feat.append((lo, hi, counts))
    out = []
    for x in queries:
        s = 0.0
        for j in range(d):
            if feat[j] is None:
                continue
            lo, hi, counts = feat[j]
            b = int((x[j] - lo) / (hi - lo) * n_bins)
            b = min(max(b, 0), n_bins - 1)
            s += -np.log((counts[b] + 1) / (n + n_bins))
        out.append(float(s))
    return out
