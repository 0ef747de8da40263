"""Minimal unsupervised anomaly scorers for the benchmark harness.

Four detectors over real-valued feature matrices, all returning scores
where higher means more anomalous:

* ``knn``: Euclidean distance to the k-th nearest training point;
* ``lof``: local outlier factor (mean local-reachability-density ratio);
* ``iforest``: isolation forest with expected-path-length scores;
* ``hbos``: per-feature equal-width histograms, summed negative log
  density.

kNN and LOF treat a query that coincides exactly with a training row
as that row: one zero-distance match is discarded, so scoring the
training set itself behaves like leave-one-out.  The forest sorts rows
lexicographically before seeded subsampling, making its scores
invariant to training row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import (
    DimensionMismatch,
    DomainError,
    InsufficientData,
    NonFiniteInput,
)

__all__ = ["DETECTOR_KINDS", "DetectorSpec", "fit_detector"]

DETECTOR_KINDS = ("knn", "lof", "iforest", "hbos")

_EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class DetectorSpec:
    """Detector kind plus hyperparameters (unused ones are ignored)."""

    kind: str
    k: int = 10
    n_trees: int = 100
    subsample: int = 256
    n_bins: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in DETECTOR_KINDS:
            raise DomainError(
                f"unknown detector kind {self.kind!r}, expected one of {DETECTOR_KINDS}"
            )
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.n_trees < 1:
            raise DomainError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.subsample < 2:
            raise DomainError(f"subsample must be >= 2, got {self.subsample}")
        if self.n_bins < 1:
            raise DomainError(f"n_bins must be >= 1, got {self.n_bins}")


def _check_matrix(X, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DomainError(f"features must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("features must be finite")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(
            f"query has {arr.shape[1]} features, fitted on {dim}"
        )
    return arr


def _query_loo(tree: cKDTree, Q: np.ndarray, k: int):
    """k nearest training rows per query, discarding one exact match.

    Returns distances and indices of shape (m, k).  When the nearest
    neighbour sits at distance exactly zero (the query equals a
    training row) it is skipped, so train and test scoring share one
    code path.
    """
    dist, idx = tree.query(Q, k=k + 1)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    exact = dist[:, :1] == 0.0
    dsel = np.where(exact, dist[:, 1 : k + 1], dist[:, 0:k])
    isel = np.where(exact, idx[:, 1 : k + 1], idx[:, 0:k])
    return dsel, isel


class _KnnDetector:
    def __init__(self, spec: DetectorSpec, X: np.ndarray):
        self.spec = spec
        self.dim = X.shape[1]
        self._tree = cKDTree(X)

    def score(self, Q) -> np.ndarray:
        Q = _check_matrix(Q, self.dim)
        if Q.shape[0] == 0:
            return np.empty(0)
        dsel, _ = _query_loo(self._tree, Q, self.spec.k)
        return dsel[:, -1].copy()


class _LofDetector:
    def __init__(self, spec: DetectorSpec, X: np.ndarray):
        self.spec = spec
        self.dim = X.shape[1]
        self._tree = cKDTree(X)
        # Training neighbourhoods exclude the point itself.
        dist, idx = self._tree.query(X, k=spec.k + 1)
        ndist, nidx = dist[:, 1:], idx[:, 1:]
        self._kdist = ndist[:, -1]
        reach = np.maximum(self._kdist[nidx], ndist)
        self._lrd = 1.0 / (reach.mean(axis=1) + 1e-10)

    def score(self, Q) -> np.ndarray:
        Q = _check_matrix(Q, self.dim)
        if Q.shape[0] == 0:
            return np.empty(0)
        dsel, isel = _query_loo(self._tree, Q, self.spec.k)
        reach = np.maximum(self._kdist[isel], dsel)
        lrd_q = 1.0 / (reach.mean(axis=1) + 1e-10)
        return self._lrd[isel].mean(axis=1) / lrd_q


def _path_norm(m: float) -> float:
    """Expected path length of an unsuccessful search in a BST of m keys."""
    if m <= 1.0:
        return 0.0
    if m == 2.0:
        return 1.0
    return 2.0 * (math.log(m - 1.0) + _EULER_GAMMA) - 2.0 * (m - 1.0) / m


_path_norm_vec = np.vectorize(_path_norm, otypes=[float])


class _IsolationTree:
    __slots__ = ("feature", "threshold", "left", "right", "size")

    def __init__(self, X: np.ndarray, rng: np.random.Generator, max_depth: int):
        feat, thr, left, right, size = [], [], [], [], []

        def build(rows: np.ndarray, depth: int) -> int:
            node = len(feat)
            feat.append(-1)
            thr.append(0.0)
            left.append(-1)
            right.append(-1)
            size.append(rows.size)
            if depth >= max_depth or rows.size <= 1:
                return node
            sub = X[rows]
            mins = sub.min(axis=0)
            maxs = sub.max(axis=0)
            usable = np.flatnonzero(maxs > mins)
            if usable.size == 0:
                return node
            f = int(usable[rng.integers(usable.size)])
            split = float(rng.uniform(mins[f], maxs[f]))
            if split == mins[f]:
                # uniform() may return its lower edge; keep both children
                # nonempty by moving the split just above the minimum.
                split = float(np.nextafter(split, maxs[f]))
            go_left = sub[:, f] < split
            feat[node] = f
            thr[node] = split
            left[node] = build(rows[go_left], depth + 1)
            right[node] = build(rows[~go_left], depth + 1)
            return node

        build(np.arange(X.shape[0]), 0)
        self.feature = np.asarray(feat, dtype=np.int32)
        self.threshold = np.asarray(thr, dtype=float)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.size = np.asarray(size, dtype=float)

    def path_lengths(self, Q: np.ndarray) -> np.ndarray:
        node = np.zeros(Q.shape[0], dtype=np.int32)
        path = np.zeros(Q.shape[0], dtype=float)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            nd = node[active]
            f = self.feature[nd]
            vals = Q[active, f]
            nxt = np.where(vals < self.threshold[nd], self.left[nd], self.right[nd])
            node[active] = nxt
            path[active] += 1.0
            active = active[self.feature[nxt] >= 0]
        return path + _path_norm_vec(self.size[node])


class _IForestDetector:
    def __init__(self, spec: DetectorSpec, X: np.ndarray):
        self.spec = spec
        self.dim = X.shape[1]
        n = X.shape[0]
        # Canonical row order: scores must not depend on how the caller
        # happened to order the training rows.
        order = np.lexsort(X.T[::-1])
        Xs = X[order]
        sub = min(spec.subsample, n)
        max_depth = int(math.ceil(math.log2(sub))) if sub > 1 else 1
        rng = np.random.default_rng(spec.seed)
        self._trees = []
        for _ in range(spec.n_trees):
            pick = rng.choice(n, size=sub, replace=False)
            self._trees.append(_IsolationTree(Xs[pick], rng, max_depth))
        self._norm = _path_norm(float(sub))

    def score(self, Q) -> np.ndarray:
        Q = _check_matrix(Q, self.dim)
        if Q.shape[0] == 0:
            return np.empty(0)
        total = np.zeros(Q.shape[0], dtype=float)
        for tree in self._trees:
            total += tree.path_lengths(Q)
        mean_path = total / len(self._trees)
        return np.power(2.0, -mean_path / self._norm)


class _HbosDetector:
    def __init__(self, spec: DetectorSpec, X: np.ndarray):
        self.spec = spec
        self.dim = X.shape[1]
        n = X.shape[0]
        b = spec.n_bins
        self._edges: list[np.ndarray | None] = []
        self._log_density: list[np.ndarray] = []
        for j in range(self.dim):
            col = X[:, j]
            lo, hi = float(col.min()), float(col.max())
            if lo == hi:
                # Single occupied bin: identical contribution everywhere.
                self._edges.append(None)
                self._log_density.append(np.zeros(1))
                continue
            edges = np.linspace(lo, hi, b + 1)
            counts, _ = np.histogram(col, bins=edges)
            self._edges.append(edges)
            self._log_density.append(np.log((counts + 1.0) / (n + b)))

    def score(self, Q) -> np.ndarray:
        Q = _check_matrix(Q, self.dim)
        if Q.shape[0] == 0:
            return np.empty(0)
        total = np.zeros(Q.shape[0], dtype=float)
        for j in range(self.dim):
            edges = self._edges[j]
            logd = self._log_density[j]
            if edges is None:
                total -= logd[0]
                continue
            # Out-of-range queries fall into the nearest edge bin.
            bins = np.searchsorted(edges, Q[:, j], side="right") - 1
            bins = np.clip(bins, 0, logd.size - 1)
            total -= logd[bins]
        return total


_FITTERS = {
    "knn": _KnnDetector,
    "lof": _LofDetector,
    "iforest": _IForestDetector,
    "hbos": _HbosDetector,
}


def fit_detector(spec: DetectorSpec, X):
    """Fit a detector on a feature matrix.

    Returns an object with ``spec``, ``dim``, and ``score(Q)``; scores
    are finite for any finite query.

    Raises
    ------
    InsufficientData
        Fewer than 2 rows, or fewer than ``k + 1`` rows for the
        neighbour-based detectors.
    """
    arr = _check_matrix(X)
    n = arr.shape[0]
    if n < 2:
        raise InsufficientData(f"need at least 2 training rows, got {n}")
    if spec.kind in ("knn", "lof") and n < spec.k + 1:
        raise InsufficientData(
            f"{spec.kind} with k={spec.k} needs at least {spec.k + 1} rows, got {n}"
        )
    return _FITTERS[spec.kind](spec, arr)
