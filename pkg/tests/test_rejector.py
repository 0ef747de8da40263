import json
import math

import numpy as np
import pytest

from adreject.core import (
    CostSpec,
    Decision,
    LabelLengthMismatch,
    NonBinaryLabels,
    ScoreSet,
    ToleranceSpec,
)
from adreject.rejector import (
    SCHEMA_VERSION,
    decision_threshold,
    empirical_cost,
    fit,
    from_dict,
    load_model,
    oracle_sweep,
    oracle_threshold,
    predict,
    predict_batch,
    save_model,
    to_dict,
)

from oracles import brute_cost


def _fit(scores, gamma, T=8.0):
    return fit(ScoreSet(scores, gamma), ToleranceSpec(T))


class TestDecisionThreshold:
    def test_kth_largest(self):
        train = ScoreSet(np.arange(1.0, 101.0), 0.1)
        # ceil(100 * 0.1) = 10; the 10th largest of 1..100 is 91.
        assert decision_threshold(train) == 91.0

    def test_gamma_zero_is_infinite(self):
        assert decision_threshold(ScoreSet([1.0, 2.0, 3.0], 0.0)) == math.inf

    def test_rank_snapping(self):
        # 30 * 0.1 is 3.0000000000000004 in floats; the snapped rank is
        # still 3, so the threshold is the 3rd largest score.
        train = ScoreSet(np.arange(1.0, 31.0), 0.1)
        assert decision_threshold(train) == 28.0

    def test_duplicates(self):
        train = ScoreSet([5.0, 5.0, 5.0, 1.0, 2.0, 6.0, 7.0, 8.0, 9.0, 10.0], 0.2)
        # 2nd largest is 9.
        assert decision_threshold(train) == 9.0


class TestPredict:
    def test_scalar_matches_batch(self):
        rej = _fit(np.arange(1.0, 201.0), 0.1)
        for s in (0.0, 91.3, 180.0, 250.0):
            decision, res = predict(rej, s)
            batch = predict_batch(rej, [s])
            assert res.psi_n == batch.psi_n[0]
            assert res.p_anomaly == batch.p_anomaly[0]
            assert res.confidence == batch.confidence[0]
            want = (
                Decision.REJECT
                if batch.rejected[0]
                else (Decision.ANOMALY if batch.base_anomaly[0] else Decision.NORMAL)
            )
            assert decision is want

    def test_base_rule_is_threshold_comparison(self):
        rej = _fit(np.arange(1.0, 101.0), 0.1)
        batch = predict_batch(rej, [90.9, 91.0, 91.1, 200.0, -5.0])
        assert batch.base_anomaly.tolist() == [False, True, True, True, False]

    def test_rejections_contiguous_in_score(self):
        rng = np.random.default_rng(5)
        rej = _fit(rng.normal(size=2000), 0.1, T=8.0)
        grid = np.linspace(-4.0, 4.0, 4001)
        rejected = predict_batch(rej, grid).rejected
        idx = np.flatnonzero(rejected)
        assert idx.size > 0
        assert np.array_equal(idx, np.arange(idx[0], idx[-1] + 1))

    def test_confidence_definition(self):
        rej = _fit(np.arange(1.0, 101.0), 0.1)
        batch = predict_batch(rej, np.linspace(0.0, 120.0, 50))
        assert np.allclose(
            batch.confidence, np.abs(2.0 * batch.p_anomaly - 1.0), rtol=0, atol=0
        )

    def test_degenerate_never_rejects_never_flags(self):
        rej = _fit([3.0, 1.0, 2.0], 0.0)
        assert rej.degenerate
        assert rej.estimate.r_hat == 0.0
        batch = predict_batch(rej, [0.0, 2.0, 99.0])
        assert not batch.base_anomaly.any()
        assert not batch.rejected.any()
        decision, _ = predict(rej, 99.0)
        assert decision is Decision.NORMAL


class TestEmpiricalCost:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        m = 500
        base = rng.random(m) < 0.3
        rejected = rng.random(m) < 0.2
        labels = rng.random(m) < 0.1
        costs = CostSpec(1.0, 10.0, 0.5)
        got = empirical_cost(base, rejected, labels, costs)
        want = brute_cost(base, rejected, labels, 1.0, 10.0, 0.5)
        assert got == pytest.approx(want, abs=1e-12)

    def test_decomposition(self):
        base = np.asarray([True, True, False, False, True])
        rejected = np.asarray([False, True, False, True, False])
        labels = np.asarray([False, False, True, True, True])
        costs = CostSpec(c_fp=2.0, c_fn=3.0, c_r=0.25)
        # kept: fp at index 0, fn at index 2; rejected: indices 1 and 3.
        want = (2.0 * 1 + 3.0 * 1 + 0.25 * 2) / 5
        assert empirical_cost(base, rejected, labels, costs) == pytest.approx(
            want, rel=1e-15
        )


class TestOracleSweep:
    def _setup(self, seed=0, n=60, gamma=0.2):
        rng = np.random.default_rng(seed)
        scores = rng.normal(size=n)
        labels = rng.random(n) < gamma
        rej = _fit(scores, gamma)
        return rej, labels

    def test_matches_exhaustive_search(self):
        rej, labels = self._setup()
        costs = CostSpec(1.0, 1.0, 0.15)
        theta, cost = oracle_sweep(rej, labels, costs)
        batch = predict_batch(rej, rej.train.scores)
        best = None
        for cand in sorted(set(batch.confidence.tolist()) | {0.0, 1.0, rej.tol.tau}):
            c = brute_cost(
                batch.base_anomaly, batch.confidence <= cand, labels, 1.0, 1.0, 0.15
            )
            if best is None or c < best[1] - 1e-15:
                best = (cand, c)
        assert theta == pytest.approx(best[0], abs=0.0)
        assert cost == pytest.approx(best[1], abs=1e-12)

    def test_tie_prefers_smallest_threshold(self):
        rej, labels = self._setup(seed=1)
        # With free rejection every threshold >= max confidence costs 0,
        # and so do many others; the sweep must return the smallest.
        costs = CostSpec(1.0, 1.0, 0.0)
        theta, cost = oracle_sweep(rej, labels, costs)
        batch = predict_batch(rej, rej.train.scores)
        cheaper = [
            c
            for c in np.unique(np.concatenate([batch.confidence, [0.0]]))
            if c < theta
            and empirical_cost(
                batch.base_anomaly, batch.confidence <= c, labels, costs
            )
            <= cost
        ]
        assert cheaper == []

    def test_oracle_never_worse_than_fixed_threshold(self):
        for seed in range(5):
            rej, labels = self._setup(seed=seed, n=200, gamma=0.1)
            costs = CostSpec(1.0, 1.0, 0.1)
            _, oracle_cost = oracle_sweep(rej, labels, costs)
            batch = predict_batch(rej, rej.train.scores)
            fixed = empirical_cost(batch.base_anomaly, batch.rejected, labels, costs)
            assert oracle_cost <= fixed + 1e-12

    def test_oracle_threshold_helper(self):
        rej, labels = self._setup(seed=3)
        costs = CostSpec(1.0, 1.0, 0.15)
        assert oracle_threshold(rej, labels, costs) == oracle_sweep(rej, labels, costs)[0]

    def test_rejection_beats_no_rejection_on_adversarial_labels(self):
        # Labels disagree with the base rule exactly on the rejected
        # points, so keeping them costs 1 each while rejecting costs c_r.
        rej, _ = self._setup(seed=2, n=300, gamma=0.1)
        batch = predict_batch(rej, rej.train.scores)
        labels = np.where(batch.rejected, ~batch.base_anomaly, batch.base_anomaly)
        costs = CostSpec(1.0, 1.0, 0.05)
        with_reject = empirical_cost(batch.base_anomaly, batch.rejected, labels, costs)
        without = empirical_cost(
            batch.base_anomaly, np.zeros_like(batch.rejected), labels, costs
        )
        assert batch.rejected.any()
        assert with_reject < without

    def test_label_length_mismatch(self):
        rej, labels = self._setup()
        with pytest.raises(LabelLengthMismatch):
            oracle_sweep(rej, labels[:-1], CostSpec(1.0, 1.0, 0.1))

    def test_non_binary_labels(self):
        rej, labels = self._setup()
        bad = labels.astype(float)
        bad[0] = 0.5
        with pytest.raises(NonBinaryLabels):
            oracle_sweep(rej, bad, CostSpec(1.0, 1.0, 0.1))


class TestSerialization:
    def test_round_trip_identical_predictions(self, tmp_path):
        rng = np.random.default_rng(9)
        rej = _fit(rng.normal(size=500), 0.1, T=16.0)
        path = tmp_path / "model.json"
        save_model(rej, path, score_column="score")
        loaded, extras = load_model(path)
        assert extras["score_column"] == "score"
        queries = rng.normal(size=100)
        a = predict_batch(rej, queries)
        b = predict_batch(loaded, queries)
        assert np.array_equal(a.p_anomaly, b.p_anomaly)
        assert np.array_equal(a.base_anomaly, b.base_anomaly)
        assert np.array_equal(a.rejected, b.rejected)
        assert loaded.threshold == rej.threshold

    def test_json_payload_round_trips_floats(self, tmp_path):
        rej = _fit(np.random.default_rng(2).normal(size=64), 0.25)
        path = tmp_path / "model.json"
        save_model(rej, path)
        state = json.loads(path.read_text())
        assert state["schema_version"] == SCHEMA_VERSION
        assert state["lambda"] == rej.threshold
        assert state["scores_sorted"] == [float(s) for s in rej.train.sorted_scores]

    def test_lambda_none_when_gamma_zero(self, tmp_path):
        rej = _fit([1.0, 2.0, 3.0], 0.0)
        path = tmp_path / "model.json"
        save_model(rej, path)
        state = json.loads(path.read_text())
        assert state["lambda"] is None
        loaded, _ = load_model(path)
        assert loaded.threshold == math.inf
        assert loaded.degenerate

    def test_schema_mismatch_rejected(self):
        rej = _fit(np.arange(20.0), 0.2)
        state = to_dict(rej)
        state["schema_version"] = 99
        with pytest.raises(ValueError, match="schema_version"):
            from_dict(state)

    def test_tampered_threshold_rejected(self):
        rej = _fit(np.arange(20.0), 0.2)
        state = to_dict(rej)
        state["lambda"] = state["lambda"] + 1.0
        with pytest.raises(ValueError, match="threshold"):
            from_dict(state)

    def test_detector_extras_preserved(self, tmp_path):
        rej = _fit(np.arange(30.0), 0.1)
        det = {"kind": "knn", "k": 5}
        path = tmp_path / "model.json"
        save_model(rej, path, detector=det)
        _, extras = load_model(path)
        assert extras["detector"] == det
