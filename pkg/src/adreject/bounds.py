"""Certified bounds on rejection behaviour.

Three guarantees are computed from training data alone:

* a closed-form frequency band ``[t1, t2]``: any score whose training
  frequency lands inside it has confidence at most ``1 - 2 exp(-T)``
  and is therefore rejected;
* a plug-in estimate ``r_hat`` of the rejection rate, obtained by
  pushing the band edges through the empirical frequency distribution;
* a distribution-free upper bound ``h`` on the true rejection rate and
  an upper bound on the expected per-example prediction cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    CostSpec,
    DegenerateStabilityMap,
    DomainError,
    EmptyInterval,
    ScoreSet,
    ToleranceSpec,
)
from .stability import (
    in_sample_frequencies,
    reject_from_tails,
    stability_inverse,
    stability_tails,
)

__all__ = [
    "band_edges",
    "raw_band_edges",
    "RejectionBandSpec",
    "rejection_band",
    "band_implication_holds",
    "RateEstimate",
    "rejection_rate_estimate",
    "rejection_rate_upper_bound",
    "CostBound",
    "expected_cost_upper_bound",
    "cost_bound",
    "score_rejection_interval",
]


def _validate_band_args(n: int, gamma: float, T: float) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not (0.0 <= gamma < 0.5):
        raise DomainError(f"gamma must lie in [0, 0.5), got {gamma}")
    if not math.isfinite(T) or T < 4.0:
        raise DomainError(f"T must be >= 4 and finite, got {T}")


def band_edges(n: int, gamma: float, T: float) -> tuple[float, float]:
    """Closed-form frequency band ``[t1, t2]`` covering all rejections.

    A training frequency at or below ``t1`` forces the stability
    probability down to ``exp(-T)`` or less (a confident normal), and
    one at or above ``t2`` forces it to ``1 - exp(-T)`` or more (a
    confident anomaly), so every rejected score has its frequency
    strictly inside the band.  Both edges solve the same Hoeffding
    inequality ``2 n d(psi)^2 >= T`` for the relevant tail deviation
    ``d``; with ``g = gamma`` and ``r = (1 + 2/n) sqrt(T / (2n))``:

        t1 = (1-g)(1 + 2/n) + 2/n^2 - r
        t2 = (1-g)(1 + 2/n) - 1/n   + r

    both clipped to ``[0, 1]``.  The edges are written with ``1/n``
    factors so no intermediate grows like ``n**3``.
    """
    t1, t2 = raw_band_edges(n, gamma, T)
    return min(max(t1, 0.0), 1.0), min(max(t2, 0.0), 1.0)


def raw_band_edges(n: int, gamma: float, T: float) -> tuple[float, float]:
    """The band edges before clipping to ``[0, 1]``.

    Useful for telling a genuinely interior edge from a clipped one:
    guarantees at an edge are vacuous when the raw value lies outside
    the unit interval.
    """
    _validate_band_args(n, gamma, T)
    inv = 1.0 / n
    one_m_g = 1.0 - gamma
    disc = (T * inv / 2.0) * (1.0 + 2.0 * inv) ** 2
    if disc < 0.0:
        # Cannot occur for finite T >= 4; clamp defensively rather than crash.
        warnings.warn(
            f"negative discriminant {disc} clamped to 0 (n={n}, gamma={gamma}, T={T})",
            RuntimeWarning,
        )
        disc = 0.0
    root = math.sqrt(disc)
    center = one_m_g * (1.0 + 2.0 * inv)
    t1 = center + 2.0 * inv * inv - root
    t2 = center - inv + root
    return t1, t2


def _dkw_term(n: int, delta: float) -> float:
    return 2.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * n))


@dataclass(frozen=True)
class RejectionBandSpec:
    """Frequency band plus the distribution-free rejection-rate bound.

    ``h = t2 - t1 + 2 sqrt(ln(2/delta) / (2n))``, clipped to ``[0, 1]``;
    the true rejection rate is at most ``h`` with probability at least
    ``1 - delta`` over the training sample.
    """

    n: int
    gamma: float
    T: float
    delta: float
    t1: float
    t2: float
    h: float

    def __post_init__(self) -> None:
        _validate_band_args(self.n, self.gamma, self.T)
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not (self.t1 <= 1.0 - self.gamma <= self.t2):
            raise DomainError(
                f"band [{self.t1}, {self.t2}] must straddle 1 - gamma"
            )


def rejection_band(
    n: int, gamma: float, T: float, delta: float = 0.05
) -> RejectionBandSpec:
    """Build the band spec for a training size and tolerance."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    t1, t2 = band_edges(n, gamma, T)
    h = min(max(t2 - t1 + _dkw_term(n, delta), 0.0), 1.0)
    return RejectionBandSpec(n=n, gamma=gamma, T=T, delta=delta, t1=t1, t2=t2, h=h)


def rejection_rate_upper_bound(
    n: int, gamma: float, T: float, delta: float = 0.05
) -> float:
    """The bound ``h`` alone; see :class:`RejectionBandSpec`."""
    return rejection_band(n, gamma, T, delta).h


def band_implication_holds(n: int, gamma: float, T: float, psi) -> bool:
    """Check, for each ``psi``, that a rejected frequency lies in
    ``[t1, t2]``.

    The band is an outer cover of the rejection region: frequencies at
    or below ``t1`` have stability probability at most ``exp(-T)``
    (confidently normal) and frequencies at or above ``t2`` at least
    ``1 - exp(-T)`` (confidently anomalous), so anything rejected must
    sit inside the band.  This is the direction the rejection-rate
    bound relies on.
    """
    t1, t2 = band_edges(n, gamma, T)
    arr = np.asarray(psi, dtype=float)
    up, lo = stability_tails(arr, n, gamma)
    rejected = np.asarray(reject_from_tails(up, lo, ToleranceSpec(T)))
    inside = (arr >= t1) & (arr <= t2)
    return bool(np.all(inside[rejected])) if np.any(rejected) else True


@dataclass(frozen=True)
class RateEstimate:
    """Plug-in rejection-rate estimate from training frequencies.

    ``below_band`` is the empirical mass of training scores whose
    stability stays below the band (confident normals); ``up_to_band``
    is the mass not above it; their difference is ``r_hat``.
    """

    below_band: float
    up_to_band: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.below_band <= self.up_to_band <= 1.0):
            raise DomainError(
                f"need 0 <= A <= B <= 1, got A={self.below_band}, B={self.up_to_band}"
            )

    @property
    def r_hat(self) -> float:
        return self.up_to_band - self.below_band


def rejection_rate_estimate(train: ScoreSet, tol: ToleranceSpec) -> RateEstimate:
    """Estimate the rejection rate from the training sample.

    The band edges ``exp(-T)`` and ``1 - exp(-T)`` are pulled back
    through the stability map to frequencies ``psi_lo, psi_hi``; the
    empirical CDF of in-sample training frequencies evaluated there
    gives ``A = F(psi_lo)`` and ``B = F(psi_hi)``, and
    ``r_hat = B - A``.

    Raises
    ------
    DegenerateStabilityMap
        If ``floor(n * gamma) == 0``; callers that want a usable
        rejector in that regime should catch this and report a zero
        estimate (nothing is ever rejected there).
    """
    n, gamma = train.n, train.gamma
    psi_lo = stability_inverse(tol.band_edge, n, gamma)
    psi_hi = stability_inverse(1.0 - tol.band_edge, n, gamma)
    psis = np.sort(in_sample_frequencies(train))
    a = np.searchsorted(psis, psi_lo, side="right") / n
    b = np.searchsorted(psis, psi_hi, side="right") / n
    return RateEstimate(below_band=float(a), up_to_band=float(b))


@dataclass(frozen=True)
class CostBound:
    """Expected-cost bound assembled from a rate estimate."""

    below_band: float
    up_to_band: float
    gamma: float
    costs: CostSpec
    bound: float


def expected_cost_upper_bound(
    below_band: float, up_to_band: float, gamma: float, costs: CostSpec
) -> float:
    """Upper bound on the expected per-example cost.

    With ``A = below_band`` and ``B = up_to_band``:

        min(gamma, A) * c_fn + (1 - B) * c_fp + (B - A) * c_r

    False negatives can claim at most the smaller of the anomaly mass
    and the confident-normal mass; false positives at most the mass
    above the band; everything in between pays the rejection cost.
    """
    if not (0.0 <= below_band <= up_to_band <= 1.0):
        raise DomainError(
            f"need 0 <= A <= B <= 1, got A={below_band}, B={up_to_band}"
        )
    if not (0.0 <= gamma < 0.5):
        raise DomainError(f"gamma must lie in [0, 0.5), got {gamma}")
    return (
        min(gamma, below_band) * costs.c_fn
        + (1.0 - up_to_band) * costs.c_fp
        + (up_to_band - below_band) * costs.c_r
    )


def cost_bound(est: RateEstimate, gamma: float, costs: CostSpec) -> CostBound:
    """Wrap :func:`expected_cost_upper_bound` with its inputs for reports."""
    value = expected_cost_upper_bound(est.below_band, est.up_to_band, gamma, costs)
    return CostBound(
        below_band=est.below_band,
        up_to_band=est.up_to_band,
        gamma=gamma,
        costs=costs,
        bound=value,
    )


def score_rejection_interval(
    train: ScoreSet, tol: ToleranceSpec
) -> tuple[float, float]:
    """Training-score interval covering every rejected training score.

    ``low`` is the smallest training score whose frequency reaches
    ``t1``; ``high`` the largest whose frequency does not exceed ``t2``.

    Raises
    ------
    EmptyInterval
        If no training frequency falls inside ``[t1, t2]``.
    """
    t1, t2 = band_edges(train.n, train.gamma, tol.T)
    ss = train.sorted_scores
    psis = np.searchsorted(ss, ss, side="right") / train.n
    inside = (psis >= t1) & (psis <= t2)
    if not np.any(inside):
        raise EmptyInterval(
            f"no training frequency lies in [{t1}, {t2}] (n={train.n})"
        )
    idx = np.flatnonzero(inside)
    return float(ss[idx[0]]), float(ss[idx[-1]])
