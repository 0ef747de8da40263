"""Fit a rejector on training scores; predict normal / anomaly / reject.

The decision threshold ``lambda`` is the ``ceil(n * gamma)``-th largest
training score; scores at or above it are predicted anomalous.  A
prediction is replaced by ``Reject`` when its stability probability
falls inside ``[exp(-T), 1 - exp(-T)]``.  The rejection threshold on
confidence is the constant ``1 - 2 exp(-T)``: no labels, no search.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    RateEstimate,
    RejectionBandSpec,
    rejection_band,
    rejection_rate_estimate,
)
from .core import (
    CostSpec,
    Decision,
    DegenerateStabilityMap,
    LabelLengthMismatch,
    NonBinaryLabels,
    NonFiniteInput,
    ScoreSet,
    ToleranceSpec,
    anomaly_rank,
)
from .stability import (
    confidence as _confidence,
    reject_from_tails,
    stability_tails,
    training_frequency,
)

__all__ = [
    "StabilityResult",
    "BatchPredictions",
    "FittedRejector",
    "fit",
    "predict",
    "predict_batch",
    "oracle_threshold",
    "decision_threshold",
    "save_model",
    "load_model",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StabilityResult:
    """Per-score stability diagnostics backing one decision."""

    psi_n: float
    p_anomaly: float
    confidence: float
    base_label: Decision


@dataclass(frozen=True, eq=False)
class BatchPredictions:
    """Vectorized predictions for a batch of scores."""

    psi_n: np.ndarray
    p_anomaly: np.ndarray
    confidence: np.ndarray
    base_anomaly: np.ndarray
    rejected: np.ndarray

    def __len__(self) -> int:
        return int(self.psi_n.size)

    @property
    def decisions(self) -> list[Decision]:
        out = []
        for rej, anom in zip(self.rejected, self.base_anomaly):
            if rej:
                out.append(Decision.REJECT)
            elif anom:
                out.append(Decision.ANOMALY)
            else:
                out.append(Decision.NORMAL)
        return out

    def row(self, i: int) -> tuple[Decision, StabilityResult]:
        res = StabilityResult(
            psi_n=float(self.psi_n[i]),
            p_anomaly=float(self.p_anomaly[i]),
            confidence=float(self.confidence[i]),
            base_label=Decision.ANOMALY if self.base_anomaly[i] else Decision.NORMAL,
        )
        return self.decisions[i], res


def decision_threshold(train: ScoreSet) -> float:
    """The ``ceil(n * gamma)``-th largest training score; ``+inf`` when
    ``gamma == 0`` (nothing is ever predicted anomalous)."""
    k = anomaly_rank(train.n, train.gamma)
    if k == 0:
        return math.inf
    return float(train.sorted_scores[train.n - k])


@dataclass(frozen=True, eq=False)
class FittedRejector:
    """A rejector fitted on a :class:`ScoreSet`.

    Attributes
    ----------
    train : ScoreSet
    tol : ToleranceSpec
    threshold : float
        Decision threshold ``lambda``; ``+inf`` for ``gamma == 0``.
    band : RejectionBandSpec
        Frequency band and rejection-rate bound ``h``.
    estimate : RateEstimate
        Plug-in rejection-rate estimate; ``(1, 1)`` (rate 0) when the
        stability map is degenerate.
    degenerate : bool
        True when ``floor(n * gamma) == 0``: stability is identically
        zero, so nothing is ever rejected.
    """

    train: ScoreSet
    tol: ToleranceSpec
    threshold: float
    band: RejectionBandSpec
    estimate: RateEstimate
    degenerate: bool


def fit(train: ScoreSet, tol: ToleranceSpec, delta: float = 0.05) -> FittedRejector:
    """Fit the rejector: threshold, band, and rate estimate.

    Never raises on degenerate inputs (``floor(n * gamma) == 0``); the
    fitted rejector then predicts without ever rejecting and reports a
    zero rate estimate.
    """
    band = rejection_band(train.n, train.gamma, tol.T, delta)
    try:
        estimate = rejection_rate_estimate(train, tol)
        degenerate = False
    except DegenerateStabilityMap:
        estimate = RateEstimate(below_band=1.0, up_to_band=1.0)
        degenerate = True
    return FittedRejector(
        train=train,
        tol=tol,
        threshold=decision_threshold(train),
        band=band,
        estimate=estimate,
        degenerate=degenerate,
    )


def predict(rejector: FittedRejector, s: float) -> tuple[Decision, StabilityResult]:
    """Predict one score; see :func:`predict_batch` for the semantics."""
    batch = predict_batch(rejector, np.asarray([s], dtype=float))
    return batch.row(0)


def predict_batch(rejector: FittedRejector, scores) -> BatchPredictions:
    """Vectorized three-way prediction.

    Base label: anomaly iff ``s >= threshold``.  The base label is
    replaced by ``Reject`` iff the stability probability lies in the
    closed band ``[exp(-T), 1 - exp(-T)]``, tested on both binomial
    tails so that neither side loses accuracy to cancellation.
    """
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1:
        arr = np.atleast_1d(np.squeeze(arr))
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("scores to predict must be finite")
    train = rejector.train
    psi = np.asarray(training_frequency(train, arr))
    upper, lower = stability_tails(psi, train.n, train.gamma)
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    rejected = np.atleast_1d(np.asarray(reject_from_tails(upper, lower, rejector.tol)))
    base = arr >= rejector.threshold
    return BatchPredictions(
        psi_n=np.atleast_1d(psi),
        p_anomaly=upper,
        confidence=_confidence(upper),
        base_anomaly=base,
        rejected=rejected,
    )


def _check_labels(labels, n: int) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size != n:
        raise LabelLengthMismatch(f"expected {n} labels, got shape {lab.shape}")
    lab = lab.astype(float)
    if not np.all(np.isin(lab, (0.0, 1.0))):
        raise NonBinaryLabels("labels must be 0 (normal) or 1 (anomaly)")
    return lab.astype(bool)


def empirical_cost(
    base_anomaly: np.ndarray,
    rejected: np.ndarray,
    labels: np.ndarray,
    costs: CostSpec,
) -> float:
    """Average per-example cost of three-way decisions against labels."""
    kept = ~rejected
    fp = np.count_nonzero(kept & base_anomaly & ~labels)
    fn = np.count_nonzero(kept & ~base_anomaly & labels)
    nr = np.count_nonzero(rejected)
    m = labels.size
    return (costs.c_fp * fp + costs.c_fn * fn + costs.c_r * nr) / m


def oracle_sweep(
    rejector: FittedRejector, labels, costs: CostSpec
) -> tuple[float, float]:
    """Label-informed exhaustive search for the best confidence threshold.

    Candidates are every distinct training confidence plus ``{0, 1}``
    and the constant threshold ``1 - 2 exp(-T)``; each candidate
    ``theta`` rejects training scores with confidence at most ``theta``
    and is charged the empirical cost.  Ties prefer the smallest
    threshold.

    Returns
    -------
    (threshold, cost) : tuple of float
        Best threshold and its training cost.
    """
    train = rejector.train
    lab = _check_labels(labels, train.n)
    batch = predict_batch(rejector, train.scores)
    conf = batch.confidence
    base = batch.base_anomaly
    candidates = np.unique(np.concatenate([conf, [0.0, 1.0, rejector.tol.tau]]))
    best_theta, best_cost = None, None
    for theta in candidates:  # ascending, so ties keep the smallest theta
        rej = conf <= theta
        cost = empirical_cost(base, rej, lab, costs)
        if best_cost is None or cost < best_cost:
            best_theta, best_cost = float(theta), float(cost)
    return best_theta, best_cost


def oracle_threshold(rejector: FittedRejector, labels, costs: CostSpec) -> float:
    """The threshold picked by :func:`oracle_sweep`."""
    return oracle_sweep(rejector, labels, costs)[0]


def _band_to_dict(band: RejectionBandSpec) -> dict:
    return {
        "n": band.n,
        "gamma": band.gamma,
        "T": band.T,
        "delta": band.delta,
        "t1": band.t1,
        "t2": band.t2,
        "h": band.h,
    }


def to_dict(rejector: FittedRejector, score_column: str | None = None,
            detector: dict | None = None) -> dict:
    """Serializable model state; ``lambda`` is ``None`` when infinite."""
    thr = rejector.threshold
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "rejector-model",
        "gamma": rejector.train.gamma,
        "t_tolerance": rejector.tol.T,
        "delta": rejector.band.delta,
        "lambda": None if math.isinf(thr) else thr,
        "scores_sorted": [float(s) for s in rejector.train.sorted_scores],
        "band": _band_to_dict(rejector.band),
        "estimate": {
            "below_band": rejector.estimate.below_band,
            "up_to_band": rejector.estimate.up_to_band,
            "r_hat": rejector.estimate.r_hat,
        },
        "degenerate": rejector.degenerate,
        "score_column": score_column,
        "detector": detector,
    }


def from_dict(state: dict) -> FittedRejector:
    """Rebuild a rejector from :func:`to_dict` output.

    The threshold, band, and estimate are recomputed from the stored
    scores and parameters; stored values are cross-checked so a
    corrupted file fails loudly instead of predicting quietly.
    """
    if state.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {state.get('schema_version')}")
    train = ScoreSet(np.asarray(state["scores_sorted"], dtype=float), state["gamma"])
    rej = fit(train, ToleranceSpec(state["t_tolerance"]), delta=state["delta"])
    stored = state["lambda"]
    stored_thr = math.inf if stored is None else float(stored)
    if stored_thr != rej.threshold:
        raise ValueError(
            f"stored threshold {stored_thr} disagrees with recomputed {rej.threshold}"
        )
    return rej


def save_model(rejector: FittedRejector, path, score_column: str | None = None,
               detector: dict | None = None) -> None:
    Path(path).write_text(
        json.dumps(to_dict(rejector, score_column, detector), indent=1) + "\n"
    )


def load_model(path) -> tuple[FittedRejector, dict]:
    """Load a model file; returns the rejector and the raw state dict
    (the CLI needs ``score_column`` and ``detector`` from it)."""
    state = json.loads(Path(path).read_text())
    return from_dict(state), state
