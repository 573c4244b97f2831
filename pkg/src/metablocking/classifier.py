"""Balanced training-set sampling and the probabilistic pair classifier.

The classifier is logistic regression fitted by full-batch gradient descent
on z-scored features (learning rate 0.1, at most 5000 iterations, stop when
the loss improves by less than 1e-8, L2 penalty 1e-4 to keep separable
training sets well-posed). Everything is deterministic given (data, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .model import CandidatePair, GroundTruth
from .weighting import FeatureId, FeatureSet

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainingSet:
    """Balanced labelled sample drawn from the candidate set."""

    vectors: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) of 0/1
    pair_keys: tuple[tuple[int, int], ...]
    seed: int

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def negatives(self) -> int:
        return int(len(self.labels) - self.labels.sum())


def sample_training(
    candidates: Iterable[CandidatePair],
    gt: GroundTruth,
    per_class: int,
    seed: int,
) -> TrainingSet:
    """Draw ``per_class`` positives and negatives uniformly without
    replacement, reproducibly from ``seed``. Candidates must carry features."""
    ordered = sorted(candidates, key=lambda p: p.key)
    positives = [p for p in ordered if p.key in gt]
    negatives = [p for p in ordered if p.key not in gt]
    if len(positives) < per_class:
        raise ValueError(
            f"not enough positive candidates: need {per_class}, have {len(positives)}"
        )
    if len(negatives) < per_class:
        raise ValueError(
            f"not enough negative candidates: need {per_class}, have {len(negatives)}"
        )
    rng = Random(seed)
    chosen = rng.sample(positives, per_class) + rng.sample(negatives, per_class)
    for p in chosen:
        if p.features is None:
            raise ValueError(f"candidate {p.key} has no feature vector")
    vectors = np.array([p.features for p in chosen], dtype=float)
    labels = np.array([1] * per_class + [0] * per_class, dtype=float)
    return TrainingSet(
        vectors=vectors,
        labels=labels,
        pair_keys=tuple(p.key for p in chosen),
        seed=seed,
    )


def log_loss_and_gradient(
    weights: np.ndarray,
    intercept: float,
    X: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, float]:
    """Mean binary cross-entropy plus L2 penalty, and its gradient."""
    z = X @ weights + intercept
    # numerically stable log(1 + exp(-|z|)) formulation
    loss = float(np.mean(np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))))
    loss += 0.5 * l2 * float(weights @ weights)
    p = 1.0 / (1.0 + np.exp(-z))
    residual = p - y
    grad_w = X.T @ residual / len(y) + l2 * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


class LogisticRegressionScorer(BaseEstimator):
    """Binary probabilistic classifier with a scikit-learn style surface."""

    def __init__(self, learning_rate=0.1, max_iter=5000, tol=1e-8, l2=1e-4):
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol
        self.l2 = l2

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("X must be (n, d) with matching labels")
        if not np.isfinite(X).all():
            raise ValueError("non-finite feature values in training data")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        # constant feature slots are passed through unscaled
        self.scale_ = np.where(std > 0, std, 1.0)
        Xs = (X - self.mean_) / self.scale_

        w = np.zeros(X.shape[1])
        b = 0.0
        prev_loss = math.inf
        for _ in range(self.max_iter):
            loss, grad_w, grad_b = log_loss_and_gradient(w, b, Xs, y, self.l2)
            if abs(prev_loss - loss) < self.tol:
                break
            prev_loss = loss
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights_ = w
        self.intercept_ = b
        return self

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        Xs = (X - self.mean_) / self.scale_
        z = np.clip(Xs @ self.weights_ + self.intercept_, -500, 500)
        return 1.0 / (1.0 + np.exp(-z))

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(int)


@dataclass(frozen=True)
class TrainedModel:
    """Fitted weights plus the normalization statistics and feature layout."""

    feature_set: FeatureSet
    weights: tuple[float, ...]
    intercept: float
    means: tuple[float, ...]
    scales: tuple[float, ...]
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": MODEL_FORMAT_VERSION,
                "feature_set": [f.value for f in self.feature_set.features],
                "weights": list(self.weights),
                "intercept": self.intercept,
                "means": list(self.means),
                "scales": list(self.scales),
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        data = json.loads(text)
        if data.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format: {data.get('format_version')}")
        return cls(
            feature_set=FeatureSet(tuple(FeatureId(v) for v in data["feature_set"])),
            weights=tuple(data["weights"]),
            intercept=float(data["intercept"]),
            means=tuple(data["means"]),
            scales=tuple(data["scales"]),
            seed=int(data["seed"]),
        )


def train(ts: TrainingSet, fs: FeatureSet, **scorer_params) -> TrainedModel:
    if len(ts.vectors) == 0:
        raise ValueError("empty training set")
    if ts.vectors.shape[1] != fs.dimension:
        raise ValueError(
            f"training vectors have {ts.vectors.shape[1]} slots, "
            f"feature set expects {fs.dimension}"
        )
    bad = [k for k, v in zip(ts.pair_keys, ts.vectors) if not np.isfinite(v).all()]
    if bad:
        raise ValueError(f"non-finite feature values for pairs: {bad}")
    scorer = LogisticRegressionScorer(**scorer_params).fit(ts.vectors, ts.labels)
    return TrainedModel(
        feature_set=fs,
        weights=tuple(scorer.weights_),
        intercept=float(scorer.intercept_),
        means=tuple(scorer.mean_),
        scales=tuple(scorer.scale_),
        seed=ts.seed,
    )


def predict_proba_many(m: TrainedModel, vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[1] != len(m.weights):
        raise ValueError(
            f"feature dimension {vectors.shape[1]} does not match model "
            f"dimension {len(m.weights)}"
        )
    Xs = (vectors - np.array(m.means)) / np.array(m.scales)
    z = np.clip(Xs @ np.array(m.weights) + m.intercept, -500, 500)
    return 1.0 / (1.0 + np.exp(-z))


def predict(m: TrainedModel, pair: CandidatePair) -> float:
    """Matching probability for one featurized pair. Use ``score_pairs``
    when scoring in bulk."""
    if pair.features is None:
        raise ValueError(f"candidate {pair.key} has no feature vector")
    vec = np.array([pair.features], dtype=float)
    return float(predict_proba_many(m, vec)[0])


def score_pairs(
    m: TrainedModel, pairs: Sequence[CandidatePair]
) -> list[CandidatePair]:
    """Attach classifier probabilities, preserving input order."""
    if not pairs:
        return []
    vectors = np.array([p.features for p in pairs], dtype=float)
    probs = predict_proba_many(m, vectors)
    return [p.with_probability(float(prob)) for p, prob in zip(pairs, probs)]
