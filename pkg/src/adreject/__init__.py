"""Learning-to-reject toolkit for unsupervised anomaly detection.

Wraps any real-valued anomaly scorer with a stability-based confidence,
rejects predictions whose confidence is at most a constant threshold,
and reports certified estimates and bounds on the rejection rate and
the expected prediction cost.
"""

from .core import (
    AdrejectError,
    CostSpec,
    Decision,
    DegenerateStabilityMap,
    DimensionMismatch,
    DomainError,
    EmptyInterval,
    EmptyResults,
    InadmissibleRejectionCost,
    InsufficientData,
    LabelLengthMismatch,
    MissingGamma,
    NonBinaryLabels,
    NonFiniteInput,
    ParseError,
    ScoreSet,
    ToleranceSpec,
    anomaly_count,
    anomaly_rank,
    validate_cost_spec,
)
from .stability import (
    confidence,
    in_rejection_band,
    in_sample_frequencies,
    stability_inverse,
    stability_probability,
    stability_tails,
    training_frequency,
)
from .bounds import (
    CostBound,
    RateEstimate,
    RejectionBandSpec,
    band_edges,
    band_implication_holds,
    cost_bound,
    expected_cost_upper_bound,
    rejection_band,
    rejection_rate_estimate,
    rejection_rate_upper_bound,
    score_rejection_interval,
)
from .rejector import (
    BatchPredictions,
    FittedRejector,
    StabilityResult,
    decision_threshold,
    empirical_cost,
    fit,
    load_model,
    oracle_sweep,
    oracle_threshold,
    predict,
    predict_batch,
    save_model,
)
from .detectors import DETECTOR_KINDS, DetectorSpec, fit_detector
from .bench import (
    COST_PRESETS,
    Dataset,
    TrialResult,
    aggregate,
    cost_preset,
    cost_presets,
    load_csv,
    make_folds,
    rank_auc,
    run_benchmark,
    run_trial,
    synthetic_suite,
    write_report_files,
)

__version__ = "0.1.0"

__all__ = [
    "AdrejectError",
    "BatchPredictions",
    "COST_PRESETS",
    "CostBound",
    "CostSpec",
    "DETECTOR_KINDS",
    "Dataset",
    "Decision",
    "DegenerateStabilityMap",
    "DetectorSpec",
    "DimensionMismatch",
    "DomainError",
    "EmptyInterval",
    "EmptyResults",
    "FittedRejector",
    "InadmissibleRejectionCost",
    "InsufficientData",
    "LabelLengthMismatch",
    "MissingGamma",
    "NonBinaryLabels",
    "NonFiniteInput",
    "ParseError",
    "RateEstimate",
    "RejectionBandSpec",
    "ScoreSet",
    "StabilityResult",
    "ToleranceSpec",
    "TrialResult",
    "aggregate",
    "anomaly_count",
    "anomaly_rank",
    "band_edges",
    "band_implication_holds",
    "confidence",
    "cost_bound",
    "cost_preset",
    "cost_presets",
    "decision_threshold",
    "empirical_cost",
    "expected_cost_upper_bound",
    "fit",
    "fit_detector",
    "in_rejection_band",
    "in_sample_frequencies",
    "load_csv",
    "load_model",
    "make_folds",
    "oracle_sweep",
    "oracle_threshold",
    "predict",
    "predict_batch",
    "rank_auc",
    "rejection_band",
    "rejection_rate_estimate",
    "rejection_rate_upper_bound",
    "run_benchmark",
    "run_trial",
    "save_model",
    "score_rejection_interval",
    "stability_inverse",
    "stability_probability",
    "stability_tails",
    "synthetic_suite",
    "training_frequency",
    "validate_cost_spec",
    "write_report_files",
]
