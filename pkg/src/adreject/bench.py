"""Benchmark harness: datasets, cross-validated trials, reports.

Each trial fits a detector on a training fold, scores train and test,
fits the rejector on the training scores, and charges the test fold
``c_fp`` per accepted false positive, ``c_fn`` per accepted false
negative, and ``c_r`` per rejection.  Three methods are compared:

* ``rejex``: reject at the constant confidence threshold;
* ``noreject``: always keep the base prediction;
* ``oracle``: exhaustive label-informed threshold search on the
  training fold (a ceiling, not a competitor).

The contamination factor comes from the full dataset's labels; the
decision threshold is recomputed on every training fold.
"""

from __future__ import annotations

import csv
import json
import math
import time
import zlib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .bounds import expected_cost_upper_bound
from .core import (
    CostSpec,
    DomainError,
    EmptyResults,
    InsufficientData,
    LabelLengthMismatch,
    MissingGamma,
    NonBinaryLabels,
    NonFiniteInput,
    ParseError,
    ScoreSet,
    ToleranceSpec,
    validate_cost_spec,
)
from .detectors import DetectorSpec, fit_detector
from .rejector import empirical_cost, fit, oracle_sweep, predict_batch
from .bounds import rejection_rate_estimate
from .core import DegenerateStabilityMap

__all__ = [
    "METHODS",
    "COST_PRESETS",
    "Dataset",
    "TrialResult",
    "cost_preset",
    "cost_presets",
    "read_csv_table",
    "load_csv",
    "synthetic_suite",
    "make_folds",
    "detector_seed",
    "compute_fold_scores",
    "run_trial",
    "rank_auc",
    "aggregate",
    "write_report_files",
    "run_benchmark",
]

METHODS = ("rejex", "noreject", "oracle")
COST_PRESETS = ("q1", "case1", "case2", "case3")
MAX_ROWS = 20000
REPORT_SCHEMA_VERSION = 1


def cost_preset(name: str, gamma: float) -> CostSpec:
    """Named cost triples; each sets ``c_r`` to its admissibility cap.

    ``q1``: (1, 1, gamma) — uniform error costs.
    ``case1``: (10, 1, min(10 (1-gamma), gamma)) — dear false alarms.
    ``case2``: (1, 10, min(1-gamma, 10 gamma)) — dear missed anomalies.
    ``case3``: (5, 5, gamma) — dear errors of both kinds.
    """
    if name == "q1":
        spec = CostSpec(1.0, 1.0, gamma)
    elif name == "case1":
        spec = CostSpec(10.0, 1.0, min(10.0 * (1.0 - gamma), gamma))
    elif name == "case2":
        spec = CostSpec(1.0, 10.0, min(1.0 - gamma, 10.0 * gamma))
    elif name == "case3":
        spec = CostSpec(5.0, 5.0, gamma)
    else:
        raise DomainError(f"unknown cost preset {name!r}, expected one of {COST_PRESETS}")
    validate_cost_spec(spec, gamma)
    return spec


def cost_presets() -> dict[str, object]:
    """Mapping of preset name to a ``gamma -> CostSpec`` constructor."""
    return {name: (lambda g, _n=name: cost_preset(_n, g)) for name in COST_PRESETS}


@dataclass(frozen=True, eq=False)
class Dataset:
    """A labeled (or score-only) benchmark dataset.

    ``gamma`` is the declared contamination; when labels are present it
    equals their mean.  ``X`` holds features, or a single column of
    precomputed scores for externally scored data.
    """

    name: str
    X: np.ndarray
    labels: np.ndarray | None
    gamma: float
    feature_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput(f"dataset {self.name}: features must be finite")
        if X.shape[0] > MAX_ROWS:
            raise DomainError(
                f"dataset {self.name}: {X.shape[0]} rows exceeds cap {MAX_ROWS}"
            )
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels)
            if labels.shape != (X.shape[0],):
                raise LabelLengthMismatch(
                    f"dataset {self.name}: {labels.shape} labels for {X.shape[0]} rows"
                )
            lab = labels.astype(float)
            if not np.all(np.isin(lab, (0.0, 1.0))):
                raise NonBinaryLabels(f"dataset {self.name}: labels must be 0/1")
            labels = lab.astype(int)
            if abs(float(lab.mean()) - self.gamma) > 1.0 / X.shape[0]:
                raise DomainError(
                    f"dataset {self.name}: gamma {self.gamma} is not the label mean"
                )
        if not (0.0 <= self.gamma < 0.5):
            raise DomainError(
                f"dataset {self.name}: gamma must lie in [0, 0.5), got {self.gamma}"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])


def read_csv_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row.

    Raises
    ------
    ParseError
        On a non-numeric cell or ragged row, with 1-based coordinates
        (the header is row 1).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        rows: list[list[float]] = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {i} has {len(row)} cells, header has {len(header)}"
                )
            out = []
            for j, cell in enumerate(row, start=1):
                try:
                    out.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {i}, column {j}: could not parse {cell.strip()!r}"
                    ) from None
            rows.append(out)
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header)))
    return header, data


def load_csv(
    path,
    label_column: str = "label",
    gamma_override: float | None = None,
    subsample_seed: int = 0,
) -> Dataset:
    """Load a benchmark dataset from CSV.

    The label column is optional; without it ``gamma_override`` is
    required.  Files longer than 20000 rows are subsampled without
    replacement (seeded, so loading is a pure function of the inputs).
    """
    path = Path(path)
    header, data = read_csv_table(path)
    if data.shape[0] == 0:
        raise InsufficientData(f"{path}: no data rows")
    labels = None
    if label_column in header:
        li = header.index(label_column)
        labels = data[:, li]
        feat_cols = [j for j in range(len(header)) if j != li]
    else:
        feat_cols = list(range(len(header)))
    if labels is None and gamma_override is None:
        raise MissingGamma(
            f"{path}: no {label_column!r} column and no explicit gamma"
        )
    X = data[:, feat_cols]
    names = tuple(header[j] for j in feat_cols)
    if X.shape[0] > MAX_ROWS:
        rng = np.random.default_rng(subsample_seed)
        keep = np.sort(rng.choice(X.shape[0], size=MAX_ROWS, replace=False))
        X = X[keep]
        labels = labels[keep] if labels is not None else None
    if labels is not None and not np.all(np.isin(labels, (0.0, 1.0))):
        raise NonBinaryLabels(f"{path}: labels must be 0/1")
    if gamma_override is not None:
        gamma = float(gamma_override)
    else:
        gamma = float(labels.mean())
    return Dataset(
        name=path.stem, X=X, labels=labels, gamma=gamma, feature_names=names
    )


def _moons(rng: np.random.Generator, m: int, noise: float) -> np.ndarray:
    t = rng.uniform(0.0, math.pi, m)
    upper = rng.random(m) < 0.5
    x = np.where(upper, np.cos(t), 1.0 - np.cos(t))
    y = np.where(upper, np.sin(t), 0.5 - np.sin(t))
    pts = np.column_stack([x, y])
    return pts + rng.normal(0.0, noise, pts.shape)


def _severity_ladder(
    rng: np.random.Generator, m: int, lo: float, hi: float
) -> np.ndarray:
    # Evenly spaced severities (shuffled) give every set a continuum from
    # borderline to obvious anomalies, even when m is small.
    s = lo + (np.arange(m) + 0.5) / m * (hi - lo)
    return rng.permutation(s)[:, None]


def _make_family(rng: np.random.Generator, family: str, n: int, d: int,
                 gamma: float) -> tuple[np.ndarray, np.ndarray]:
    # Anomalies reuse the inlier generator and are pushed outward by a
    # per-example severity factor, so detector mistakes concentrate near
    # the decision boundary instead of vanishing for clean geometries.
    n_anom = round(gamma * n)
    n_norm = n - n_anom
    if family == "gauss":
        smax = 1.0 + 2.4 / d ** 0.25
        inliers = rng.normal(0.0, 1.0, (n_norm, d))
        s = _severity_ladder(rng, n_anom, 1.0, smax)
        anomalies = rng.normal(0.0, 1.0, (n_anom, d)) * s
    elif family == "clusters":
        smax = 1.0 + 2.3 / d ** 0.25
        centers = rng.uniform(-2.0, 2.0, (3, d))
        which = rng.integers(3, size=n_norm)
        inliers = centers[which] + rng.normal(0.0, 0.8, (n_norm, d))
        assigned = rng.integers(3, size=n_anom)
        s = _severity_ladder(rng, n_anom, 1.0, smax)
        anomalies = centers[assigned] + rng.normal(0.0, 0.8, (n_anom, d)) * s
    elif family == "moons":
        m_scale = math.sqrt(d - 2) if d > 2 else 1.0

        def _block(m: int) -> np.ndarray:
            base = _moons(rng, m, 0.25) * m_scale
            if d > 2:
                return np.hstack([base, rng.normal(0.0, 0.5, (m, d - 2))])
            return base

        inliers = _block(n_norm)
        anomalies = _block(n_anom)
        direction = rng.normal(size=(n_anom, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        s = _severity_ladder(rng, n_anom, 1.0, 3.5)
        anomalies = anomalies + direction * (s - 1.0) * 2.0
        if d > 2:
            # A random orthogonal rotation spreads the planar structure
            # across all features; it leaves pairwise distances unchanged.
            q, _ = np.linalg.qr(rng.normal(size=(d, d)))
            inliers = inliers @ q
            anomalies = anomalies @ q
    else:
        raise DomainError(f"unknown synthetic family {family!r}")
    X = np.vstack([inliers, anomalies])
    y = np.concatenate([np.zeros(n_norm, int), np.ones(n_anom, int)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


# One configuration per (n, d, gamma) axis value for each family keeps
# the full suite within a desk-scale time budget.
_SUITE_CONFIGS = ((500, 2, 0.02), (2000, 8, 0.1), (5000, 32, 0.3))
_SUITE_FAMILIES = ("gauss", "clusters", "moons")


def synthetic_suite(seed: int = 0) -> list[Dataset]:
    """Deterministic labeled datasets varying family, n, d, and gamma."""
    out = []
    idx = 0
    for family in _SUITE_FAMILIES:
        for n, d, gamma in _SUITE_CONFIGS:
            rng = np.random.default_rng([seed, idx])
            X, y = _make_family(rng, family, n, d, gamma)
            name = f"{family}-n{n}-d{d}-g{gamma:g}"
            out.append(
                Dataset(name=name, X=X, labels=y, gamma=float(y.mean()),
                        feature_names=tuple(f"f{j}" for j in range(X.shape[1])))
            )
            idx += 1
    return out


def _dataset_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def detector_seed(seed: int, dataset_name: str, kind: str, fold: int) -> int:
    """Stable per-trial detector seed derived from the run seed."""
    return zlib.crc32(f"{seed}|{dataset_name}|{kind}|{fold}".encode("utf-8"))


def make_folds(
    n: int, n_folds: int, split_seed: int, dataset_name: str = ""
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic partition into cross-validation folds.

    The permutation depends only on ``(split_seed, dataset_name, n)``;
    fold ``i`` uses part ``i`` as test and the rest as training.
    """
    if n_folds < 2 or n_folds > n:
        raise DomainError(f"need 2 <= n_folds <= n, got {n_folds} for n={n}")
    rng = np.random.default_rng([split_seed, _dataset_key(dataset_name), n])
    perm = rng.permutation(n)
    parts = np.array_split(perm, n_folds)
    folds = []
    for i in range(n_folds):
        test = np.sort(parts[i])
        train = np.sort(np.concatenate([parts[j] for j in range(n_folds) if j != i]))
        folds.append((train, test))
    return folds


def compute_fold_scores(
    dataset: Dataset, kind: str, fold: int, n_folds: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Fit one detector on a training fold; return (train, test) scores.

    Seeding matches :func:`run_benchmark`, so callers can precompute a
    score cache and replay trials for several cost presets without
    refitting detectors or changing any output.
    """
    train_idx, test_idx = make_folds(dataset.n, n_folds, seed, dataset.name)[fold]
    spec = DetectorSpec(kind=kind, seed=detector_seed(seed, dataset.name, kind, fold))
    det = fit_detector(spec, dataset.X[train_idx])
    return det.score(dataset.X[train_idx]), det.score(dataset.X[test_idx])


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one (dataset, detector, fold, method) evaluation."""

    dataset: str
    detector: str
    method: str
    fold: int
    n_train: int
    n_test: int
    gamma: float
    cost_per_example: float
    rejection_rate: float
    fp_rate: float
    fn_rate: float
    r_hat: float
    bound_h: float
    cost_bound: float
    wall_time_threshold_ms: float


def run_trial(
    dataset: Dataset,
    detector_spec: DetectorSpec | None,
    method: str,
    costs: CostSpec,
    tol: ToleranceSpec,
    split_seed: int,
    fold: int,
    n_folds: int = 5,
    delta: float = 0.05,
    scores: tuple[np.ndarray, np.ndarray] | None = None,
    detector_name: str | None = None,
) -> TrialResult:
    """Run one cross-validation trial.

    ``scores`` optionally carries precomputed (train, test) detector
    scores for this exact fold so a harness can share one detector fit
    across the three methods; passing it changes nothing but wall time.
    With ``detector_spec=None`` the scores are mandatory and the trial
    is recorded under ``detector_name`` (default ``"precomputed"``).
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}, expected one of {METHODS}")
    if dataset.labels is None:
        raise MissingGamma(
            f"dataset {dataset.name}: labels are required to evaluate cost"
        )
    validate_cost_spec(costs, dataset.gamma)
    folds = make_folds(dataset.n, n_folds, split_seed, dataset.name)
    if not (0 <= fold < n_folds):
        raise DomainError(f"fold must lie in [0, {n_folds}), got {fold}")
    train_idx, test_idx = folds[fold]
    if scores is None:
        if detector_spec is None:
            raise DomainError("run_trial needs a detector spec or precomputed scores")
        det = fit_detector(detector_spec, dataset.X[train_idx])
        s_train = det.score(dataset.X[train_idx])
        s_test = det.score(dataset.X[test_idx])
    else:
        s_train, s_test = scores
    if detector_name is None:
        detector_name = detector_spec.kind if detector_spec is not None else "precomputed"
    train_set = ScoreSet(s_train, dataset.gamma)
    rej = fit(train_set, tol, delta)
    y_train = dataset.labels[train_idx].astype(bool)
    y_test = dataset.labels[test_idx].astype(bool)

    if method == "rejex":
        t0 = time.perf_counter()
        _ = ToleranceSpec(tol.T)
        try:
            rejection_rate_estimate(train_set, tol)
        except DegenerateStabilityMap:
            pass
        wall_ms = (time.perf_counter() - t0) * 1000.0
    elif method == "oracle":
        t0 = time.perf_counter()
        theta, _ = oracle_sweep(rej, y_train, costs)
        wall_ms = (time.perf_counter() - t0) * 1000.0
    else:
        wall_ms = 0.0

    batch = predict_batch(rej, s_test)
    if method == "rejex":
        rejected = batch.rejected
    elif method == "noreject":
        rejected = np.zeros(len(batch), dtype=bool)
    else:
        rejected = batch.confidence <= theta
    cost = empirical_cost(batch.base_anomaly, rejected, y_test, costs)
    kept = ~rejected
    m = y_test.size
    fp = np.count_nonzero(kept & batch.base_anomaly & ~y_test) / m
    fn = np.count_nonzero(kept & ~batch.base_anomaly & y_test) / m
    est = rej.estimate
    return TrialResult(
        dataset=dataset.name,
        detector=detector_name,
        method=method,
        fold=fold,
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
        gamma=dataset.gamma,
        cost_per_example=float(cost),
        rejection_rate=float(np.count_nonzero(rejected) / m),
        fp_rate=float(fp),
        fn_rate=float(fn),
        r_hat=float(est.r_hat),
        bound_h=float(rej.band.h),
        cost_bound=float(
            expected_cost_upper_bound(
                est.below_band, est.up_to_band, dataset.gamma, costs
            )
        ),
        wall_time_threshold_ms=float(wall_ms),
    )


def rank_auc(scores, labels) -> float:
    """Area under the ROC curve via the rank statistic (ties averaged)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    n_pos = int(np.count_nonzero(y))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DomainError("AUC needs both classes present")
    ranks = rankdata(s)
    return (ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def aggregate(results: list[TrialResult]) -> dict:
    """Summarize trials: per-detector method means, ranks, violations.

    Ranks: within each (dataset, detector, fold) group the methods are
    ranked by cost, 1 = cheapest, ties averaged.
    """
    if not results:
        raise EmptyResults("no trial results to aggregate")
    methods = sorted({r.method for r in results})
    detectors = sorted({r.detector for r in results})
    groups: dict[tuple[str, str, int], list[TrialResult]] = {}
    for r in results:
        groups.setdefault((r.dataset, r.detector, r.fold), []).append(r)
    ranks: dict[str, list[float]] = {m: [] for m in methods}
    det_ranks: dict[tuple[str, str], list[float]] = {}
    for key, rs in groups.items():
        rs = sorted(rs, key=lambda r: r.method)
        rk = rankdata([r.cost_per_example for r in rs])
        for r, rank in zip(rs, rk):
            ranks[r.method].append(float(rank))
            det_ranks.setdefault((r.detector, r.method), []).append(float(rank))
    per_detector: dict[str, dict] = {}
    for det in detectors:
        per_detector[det] = {}
        for m in methods:
            rows = [r for r in results if r.detector == det and r.method == m]
            if not rows:
                continue
            cost_mean, cost_std = _mean_std([r.cost_per_example for r in rows])
            rate_mean, rate_std = _mean_std([r.rejection_rate for r in rows])
            per_detector[det][m] = {
                "trials": len(rows),
                "cost_mean": cost_mean,
                "cost_std": cost_std,
                "rejection_rate_mean": rate_mean,
                "rejection_rate_std": rate_std,
                "mean_rank": float(np.mean(det_ranks.get((det, m), [math.nan]))),
            }
    overall = {}
    for m in methods:
        rows = [r for r in results if r.method == m]
        cost_mean, cost_std = _mean_std([r.cost_per_example for r in rows])
        overall[m] = {
            "trials": len(rows),
            "cost_mean": cost_mean,
            "cost_std": cost_std,
            "mean_rank": float(np.mean(ranks[m])) if ranks[m] else math.nan,
        }
    rejex_rows = [r for r in results if r.method == "rejex"]
    violations = {
        "trials": len(rejex_rows),
        "rejection_rate_over_h": sum(
            1 for r in rejex_rows if r.rejection_rate > r.bound_h
        ),
        "cost_over_bound": sum(
            1 for r in rejex_rows if r.cost_per_example > r.cost_bound
        ),
    }
    oracle_gap = {}
    if "rejex" in methods and "oracle" in methods:
        for det in detectors + ["overall"]:
            sel = (
                results
                if det == "overall"
                else [r for r in results if r.detector == det]
            )
            rx = np.mean([r.cost_per_example for r in sel if r.method == "rejex"])
            orc = np.mean([r.cost_per_example for r in sel if r.method == "oracle"])
            if orc > 0:
                oracle_gap[det] = float((rx - orc) / orc * 100.0)
            else:
                oracle_gap[det] = math.inf if rx > 0 else 0.0
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "methods": methods,
        "detectors": detectors,
        "n_trials": len(results),
        "datasets": sorted({r.dataset for r in results}),
        "per_detector": per_detector,
        "overall": overall,
        "bound_violations": violations,
        "oracle_gap_pct": oracle_gap,
    }


_TRIAL_COLUMNS = [f.name for f in fields(TrialResult) if f.name != "wall_time_threshold_ms"]


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_report_files(results: list[TrialResult], report: dict, out_dir) -> dict:
    """Write report.json, trials.csv, rates_and_bounds.csv, timings.csv.

    All files except timings.csv are byte-deterministic for a fixed
    seed; timings.csv carries the wall-clock threshold-step column.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: (r.dataset, r.detector, r.fold, r.method))
    trials_path = out / "trials.csv"
    with trials_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_TRIAL_COLUMNS)
        for r in ordered:
            w.writerow([_fmt(getattr(r, c)) for c in _TRIAL_COLUMNS])
    timings_path = out / "timings.csv"
    with timings_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "detector", "fold", "method", "wall_time_threshold_ms"])
        for r in ordered:
            w.writerow(
                [r.dataset, r.detector, r.fold, r.method, _fmt(r.wall_time_threshold_ms)]
            )
    rates_path = out / "rates_and_bounds.csv"
    rejex_by_ds: dict[str, list[TrialResult]] = {}
    for r in ordered:
        if r.method == "rejex":
            rejex_by_ds.setdefault(r.dataset, []).append(r)
    with rates_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "dataset",
                "r_hat_mean",
                "rejection_rate_mean",
                "bound_h_mean",
                "cost_mean",
                "cost_bound_mean",
            ]
        )
        for ds in sorted(rejex_by_ds):
            rows = rejex_by_ds[ds]
            w.writerow(
                [
                    ds,
                    _fmt(float(np.mean([r.r_hat for r in rows]))),
                    _fmt(float(np.mean([r.rejection_rate for r in rows]))),
                    _fmt(float(np.mean([r.bound_h for r in rows]))),
                    _fmt(float(np.mean([r.cost_per_example for r in rows]))),
                    _fmt(float(np.mean([r.cost_bound for r in rows]))),
                ]
            )
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    return {
        "report": str(report_path),
        "trials": str(trials_path),
        "rates_and_bounds": str(rates_path),
        "timings": str(timings_path),
    }


def run_benchmark(
    datasets: list[Dataset],
    detector_kinds: tuple[str, ...] = ("knn", "lof", "iforest", "hbos"),
    preset: str = "q1",
    T: float = 32.0,
    delta: float = 0.05,
    n_folds: int = 5,
    seed: int = 0,
    methods: tuple[str, ...] = METHODS,
    custom_costs: CostSpec | None = None,
    scores_only: bool = False,
) -> list[TrialResult]:
    """Run the full trial grid; detector fits are shared across methods.

    With ``scores_only`` each dataset's single feature column is taken
    as a precomputed anomaly score and no detectors are fitted.
    """
    tol = ToleranceSpec(T)
    results = []
    for dataset in datasets:
        costs = custom_costs if custom_costs is not None else cost_preset(
            preset, dataset.gamma
        )
        folds = make_folds(dataset.n, n_folds, seed, dataset.name)
        if scores_only:
            if dataset.X.shape[1] != 1:
                raise DomainError(
                    f"dataset {dataset.name}: scores-only mode needs exactly one "
                    f"score column, found {dataset.X.shape[1]}"
                )
            for fold, (train_idx, test_idx) in enumerate(folds):
                shared = (dataset.X[train_idx, 0], dataset.X[test_idx, 0])
                for method in methods:
                    results.append(
                        run_trial(
                            dataset, None, method, costs, tol, seed, fold,
                            n_folds=n_folds, delta=delta, scores=shared,
                        )
                    )
            continue
        for kind in detector_kinds:
            for fold in range(len(folds)):
                spec = DetectorSpec(
                    kind=kind, seed=detector_seed(seed, dataset.name, kind, fold)
                )
                shared = compute_fold_scores(dataset, kind, fold, n_folds, seed)
                for method in methods:
                    results.append(
                        run_trial(
                            dataset,
                            spec,
                            method,
                            costs,
                            tol,
                            seed,
                            fold,
                            n_folds=n_folds,
                            delta=delta,
                            scores=shared,
                        )
                    )
    return results
