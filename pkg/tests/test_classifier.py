import math
import random

import numpy as np
import pytest

from metablocking.classifier import (
    LogisticRegressionScorer,
    TrainedModel,
    TrainingSet,
    log_loss_and_gradient,
    predict,
    sample_training,
    score_pairs,
    train,
)
from metablocking.model import CandidatePair, GroundTruth
from metablocking.weighting import BLAST_SET, FeatureId, FeatureSet

JS_ONLY = FeatureSet((FeatureId.JS,))
TWO_D = FeatureSet((FeatureId.JS, FeatureId.RS))


def _featured_pairs(n_pos=40, n_neg=60, seed=1):
    rng = random.Random(seed)
    pairs, matches = [], []
    for n in range(n_pos):
        i, j = 2 * n, 2 * n + 1
        pairs.append(CandidatePair(i, j, features=(0.5 + rng.random(), rng.random())))
        matches.append((i, j))
    base = 2 * n_pos
    for n in range(n_neg):
        i, j = base + 2 * n, base + 2 * n + 1
        pairs.append(CandidatePair(i, j, features=(rng.random() * 0.5, rng.random())))
    return pairs, GroundTruth.from_pairs(matches)


class TestSampleTraining:
    def test_balanced_counts(self):
        pairs, gt = _featured_pairs()
        ts = sample_training(pairs, gt, per_class=25, seed=0)
        assert ts.positives == 25
        assert ts.negatives == 25
        assert len(ts.vectors) == 50

    def test_larger_sample(self):
        pairs, gt = _featured_pairs(n_pos=260, n_neg=300)
        ts = sample_training(pairs, gt, per_class=250, seed=0)
        assert len(ts.vectors) == 500

    def test_same_seed_reproduces(self):
        pairs, gt = _featured_pairs()
        a = sample_training(pairs, gt, per_class=10, seed=7)
        b = sample_training(pairs, gt, per_class=10, seed=7)
        assert a.pair_keys == b.pair_keys
        assert np.array_equal(a.vectors, b.vectors)

    def test_different_seed_differs(self):
        pairs, gt = _featured_pairs()
        a = sample_training(pairs, gt, per_class=10, seed=1)
        b = sample_training(pairs, gt, per_class=10, seed=2)
        assert a.pair_keys != b.pair_keys

    def test_insufficient_positives_named(self):
        pairs, gt = _featured_pairs(n_pos=3)
        with pytest.raises(ValueError, match="positive"):
            sample_training(pairs, gt, per_class=10, seed=0)

    def test_insufficient_negatives_named(self):
        pairs, gt = _featured_pairs(n_neg=3)
        with pytest.raises(ValueError, match="negative"):
            sample_training(pairs, gt, per_class=10, seed=0)


class TestGradient:
    @pytest.mark.parametrize("point", range(10))
    def test_matches_central_finite_differences(self, point):
        rng = np.random.default_rng(point)
        X = rng.normal(size=(30, 4))
        y = (rng.random(30) > 0.5).astype(float)
        w = rng.normal(size=4)
        b = float(rng.normal())
        l2 = 1e-4
        _, grad_w, grad_b = log_loss_and_gradient(w, b, X, y, l2)

        eps = 1e-6
        for slot in range(4):
            delta = np.zeros(4)
            delta[slot] = eps
            hi, _, _ = log_loss_and_gradient(w + delta, b, X, y, l2)
            lo, _, _ = log_loss_and_gradient(w - delta, b, X, y, l2)
            numeric = (hi - lo) / (2 * eps)
            assert abs(grad_w[slot] - numeric) <= 1e-5 * max(1.0, abs(numeric))
        hi, _, _ = log_loss_and_gradient(w, b + eps, X, y, l2)
        lo, _, _ = log_loss_and_gradient(w, b - eps, X, y, l2)
        numeric = (hi - lo) / (2 * eps)
        assert abs(grad_b - numeric) <= 1e-5 * max(1.0, abs(numeric))


class TestTrain:
    def _training_set(self, vectors, labels, seed=0):
        return TrainingSet(
            vectors=np.array(vectors, dtype=float),
            labels=np.array(labels, dtype=float),
            pair_keys=tuple((n, n + 1000) for n in range(len(labels))),
            seed=seed,
        )

    def test_separable_set_scores_positives_high(self):
        vectors = [(0.9, 0.8), (0.8, 0.9), (0.1, 0.2), (0.2, 0.1)]
        ts = self._training_set(vectors, [1, 1, 0, 0])
        model = train(ts, TWO_D)
        pairs = [
            CandidatePair(n, n + 1000, features=tuple(v)) for n, v in enumerate(vectors)
        ]
        probs = [p.probability for p in score_pairs(model, pairs)]
        assert probs[0] > 0.5 and probs[1] > 0.5
        assert probs[2] < 0.5 and probs[3] < 0.5

    def test_identical_vectors_opposite_labels(self):
        ts = self._training_set([(0.4,), (0.4,)], [1, 0])
        model = train(ts, JS_ONLY)
        prob = predict(model, CandidatePair(0, 1, features=(0.4,)))
        assert prob == pytest.approx(0.5, abs=1e-9)

    def test_converged_gradient_is_small(self):
        rng = np.random.default_rng(3)
        X = np.concatenate([rng.normal(1, 1, (25, 2)), rng.normal(-1, 1, (25, 2))])
        y = np.array([1.0] * 25 + [0.0] * 25)
        ts = self._training_set(X, y)
        model = train(ts, TWO_D)
        Xs = (X - np.array(model.means)) / np.array(model.scales)
        _, grad_w, grad_b = log_loss_and_gradient(
            np.array(model.weights), model.intercept, Xs, y, 1e-4
        )
        assert np.abs(grad_w).max() < 1e-2
        assert abs(grad_b) < 1e-2

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 2))
        y = (X[:, 0] > 0).astype(float)
        a = train(self._training_set(X, y), TWO_D)
        b = train(self._training_set(X, y), TWO_D)
        assert a == b

    def test_label_swap_antisymmetry(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(30, 2))
        y = (X.sum(axis=1) > 0).astype(float)
        m1 = train(self._training_set(X, y), TWO_D)
        m2 = train(self._training_set(X, 1 - y), TWO_D)
        pairs = [CandidatePair(n, n + 1000, features=tuple(v)) for n, v in enumerate(X)]
        p1 = [p.probability for p in score_pairs(m1, pairs)]
        p2 = [p.probability for p in score_pairs(m2, pairs)]
        for a, b in zip(p1, p2):
            assert a + b == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch_rejected(self):
        ts = self._training_set([(0.4, 0.2)], [1])
        with pytest.raises(ValueError, match="slots"):
            train(ts, JS_ONLY)

    def test_non_finite_features_name_pair(self):
        ts = self._training_set([(float("nan"),), (0.2,)], [1, 0])
        with pytest.raises(ValueError, match=r"\(0, 1000\)"):
            train(ts, JS_ONLY)

    def test_empty_training_set_rejected(self):
        ts = TrainingSet(np.empty((0, 1)), np.empty(0), (), 0)
        with pytest.raises(ValueError, match="empty"):
            train(ts, JS_ONLY)


class TestPredict:
    def _identity_model(self, weights, intercept, fs):
        dim = fs.dimension
        return TrainedModel(
            feature_set=fs,
            weights=tuple(weights),
            intercept=intercept,
            means=(0.0,) * dim,
            scales=(1.0,) * dim,
            seed=0,
        )

    def test_zero_logit_gives_half(self):
        model = self._identity_model((0.0,), 0.0, JS_ONLY)
        assert predict(model, CandidatePair(0, 1, features=(3.0,))) == 0.5

    def test_saturation(self):
        model = self._identity_model((100.0,), 0.0, JS_ONLY)
        assert predict(model, CandidatePair(0, 1, features=(10.0,))) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_published_weight_vector_matches_direct_sigmoid(self):
        # fitted coefficients for the (cf-ibf, raccb, rs, nrs) layout
        weights = {"cf-ibf": -0.1814, "raccb": 10.8719, "rs": -45.1, "nrs": -1.3549}
        intercept = 41.7934
        ordered = tuple(weights[f.value] for f in BLAST_SET.features)
        model = self._identity_model(ordered, intercept, BLAST_SET)
        x = (3.0, 0.6, 0.45, 0.3)
        logit = intercept + sum(w * v for w, v in zip(ordered, x))
        expected = 1.0 / (1.0 + math.exp(-logit))
        got = predict(model, CandidatePair(0, 1, features=x))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch_is_hard_error(self):
        model = self._identity_model((1.0,), 0.0, JS_ONLY)
        with pytest.raises(ValueError, match="dimension"):
            predict(model, CandidatePair(0, 1, features=(1.0, 2.0)))

    def test_probabilities_in_unit_interval(self):
        rng = np.random.default_rng(2)
        model = self._identity_model((50.0, -50.0), 3.0, TWO_D)
        pairs = [
            CandidatePair(n, n + 100, features=tuple(v))
            for n, v in enumerate(rng.normal(size=(50, 2)) * 100)
        ]
        for p in score_pairs(model, pairs):
            assert 0.0 <= p.probability <= 1.0
            assert math.isfinite(p.probability)


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(20, 2))
        y = (X[:, 0] > 0).astype(float)
        ts = TrainingSet(X, y, tuple((n, n + 50) for n in range(20)), seed=4)
        model = train(ts, TWO_D)
        restored = TrainedModel.from_json(model.to_json())
        assert restored == model

    def test_version_checked(self):
        with pytest.raises(ValueError, match="format"):
            TrainedModel.from_json('{"format_version": 99}')


class TestScorerEstimatorApi:
    def test_get_params_roundtrip(self):
        scorer = LogisticRegressionScorer(learning_rate=0.2)
        params = scorer.get_params()
        assert params["learning_rate"] == 0.2
        clone = LogisticRegressionScorer(**params)
        assert clone.get_params() == params

    def test_predict_thresholds_at_half(self):
        X = np.array([[0.0], [1.0], [0.1], [0.9]])
        y = np.array([0, 1, 0, 1])
        scorer = LogisticRegressionScorer().fit(X, y)
        assert list(scorer.predict(X)) == [0, 1, 0, 1]
