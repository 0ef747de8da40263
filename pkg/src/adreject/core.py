"""Core types and validation for score-based rejection.

A rejector consumes real-valued anomaly scores (higher means more
anomalous), a contamination factor ``gamma``, and a tolerance parameter
``T``.  The types below carry those inputs through the rest of the
package and enforce their domains at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "AdrejectError",
    "DomainError",
    "NonFiniteInput",
    "InsufficientData",
    "DimensionMismatch",
    "LabelLengthMismatch",
    "InadmissibleRejectionCost",
    "DegenerateStabilityMap",
    "EmptyInterval",
    "ParseError",
    "MissingGamma",
    "NonBinaryLabels",
    "EmptyResults",
    "Decision",
    "ScoreSet",
    "ToleranceSpec",
    "CostSpec",
    "validate_cost_spec",
    "anomaly_count",
    "anomaly_rank",
]


class AdrejectError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AdrejectError):
    """An argument lies outside its mathematical domain."""


class NonFiniteInput(AdrejectError):
    """Scores or features contain NaN or infinity."""


class InsufficientData(AdrejectError):
    """Too few rows for the requested operation."""


class DimensionMismatch(AdrejectError):
    """Query feature dimension differs from the fitted dimension."""


class LabelLengthMismatch(AdrejectError):
    """Label vector length differs from the number of scores."""


class InadmissibleRejectionCost(AdrejectError):
    """Rejection cost exceeds the cost of always predicting one class."""


class DegenerateStabilityMap(AdrejectError):
    """floor(n * gamma) == 0, so the stability map is identically zero
    and has no inverse for positive targets."""


class EmptyInterval(AdrejectError):
    """No training score falls inside the requested frequency band."""


class ParseError(AdrejectError):
    """A CSV cell could not be parsed; carries row/column coordinates."""


class MissingGamma(AdrejectError):
    """No labels and no explicit contamination factor were provided."""


class NonBinaryLabels(AdrejectError):
    """Labels contain values other than 0 and 1."""


class EmptyResults(AdrejectError):
    """Aggregation was requested over zero trial results."""


class Decision(Enum):
    """Three-way prediction outcome."""

    NORMAL = "normal"
    ANOMALY = "anomaly"
    REJECT = "reject"

    def __str__(self) -> str:  # CSV and JSON use the lowercase value.
        return self.value


# Products n * gamma that are within this distance of an integer are
# snapped to it, so that e.g. n=100, gamma=0.1 counts exactly 10 ranks
# even though 100 * float(0.1) == 10.000000000000002.
_INT_SNAP = 1e-9


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) < _INT_SNAP else x


def anomaly_count(n: int, gamma: float) -> int:
    """floor(n * gamma): the number of training ranks treated as anomalous
    by the stability sum."""
    return int(math.floor(_snap(n * gamma)))


def anomaly_rank(n: int, gamma: float) -> int:
    """ceil(n * gamma): the rank (from the top) of the decision threshold."""
    return int(math.ceil(_snap(n * gamma)))


def _as_float_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """A bag of training anomaly scores with a contamination factor.

    Parameters
    ----------
    scores : array-like of float, shape (n,)
        Real-valued anomaly scores, higher means more anomalous.
    gamma : float
        Expected fraction of anomalies, in ``[0, 0.5)``.

    Raises
    ------
    InsufficientData
        If fewer than one score is given.
    NonFiniteInput
        If any score is NaN or infinite.
    DomainError
        If ``gamma`` is outside ``[0, 0.5)``.
    """

    scores: np.ndarray
    gamma: float
    sorted_scores: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        arr = _as_float_vector(self.scores, "scores")
        if arr.size < 1:
            raise InsufficientData("need at least one training score")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput("training scores must be finite")
        g = float(self.gamma)
        if not (0.0 <= g < 0.5) or not math.isfinite(g):
            raise DomainError(f"gamma must lie in [0, 0.5), got {g}")
        arr = arr.copy()
        arr.setflags(write=False)
        srt = np.sort(arr)
        srt.setflags(write=False)
        object.__setattr__(self, "scores", arr)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "sorted_scores", srt)

    @property
    def n(self) -> int:
        return int(self.scores.size)


@dataclass(frozen=True)
class ToleranceSpec:
    """Rejection tolerance derived from a single parameter ``T >= 4``.

    ``epsilon = 2 * exp(-T)`` is stored; the confidence threshold
    ``tau = 1 - epsilon`` is always derived from it, so the identity
    ``tau + epsilon == 1`` holds by construction.  Predictions whose
    anomaly probability lies in ``[epsilon / 2, 1 - epsilon / 2]``
    (equivalently, confidence at most ``tau``) are rejected.
    """

    T: float
    epsilon: float = field(init=False)

    def __post_init__(self) -> None:
        t = float(self.T)
        if not math.isfinite(t) or t < 4.0:
            raise DomainError(f"T must be >= 4 and finite, got {t}")
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "epsilon", 2.0 * math.exp(-t))

    @property
    def tau(self) -> float:
        """Confidence threshold ``1 - epsilon``."""
        return 1.0 - self.epsilon

    @property
    def band_edge(self) -> float:
        """``exp(-T) = epsilon / 2``: each tail of the rejection band."""
        return self.epsilon / 2.0


@dataclass(frozen=True)
class CostSpec:
    """Per-example costs for false positives, false negatives, rejections."""

    c_fp: float
    c_fn: float
    c_r: float

    def __post_init__(self) -> None:
        for name in ("c_fp", "c_fn", "c_r"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.c_fp <= 0.0 or self.c_fn <= 0.0:
            raise DomainError("c_fp and c_fn must be positive")
        if self.c_r < 0.0:
            raise DomainError("c_r must be non-negative")


def validate_cost_spec(costs: CostSpec, gamma: float) -> None:
    """Check that rejecting is never dearer than always predicting.

    A rejection cost is admissible when ``c_r <= min((1 - gamma) * c_fp,
    gamma * c_fn)``: predicting all-normal incurs ``gamma * c_fn`` per
    example and all-anomalous ``(1 - gamma) * c_fp``, so a dearer
    rejection could never be preferred.

    Raises
    ------
    InadmissibleRejectionCost
        If ``c_r`` exceeds the bound (boundary equality is admissible).
    """
    if not (0.0 <= gamma < 0.5):
        raise DomainError(f"gamma must lie in [0, 0.5), got {gamma}")
    cap = min((1.0 - gamma) * costs.c_fp, gamma * costs.c_fn)
    if costs.c_r > cap:
        raise InadmissibleRejectionCost(
            f"c_r={costs.c_r} exceeds min((1-gamma)*c_fp, gamma*c_fn)={cap}"
        )
