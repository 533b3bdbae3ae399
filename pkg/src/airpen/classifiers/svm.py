"""One-vs-rest linear SVM on flattened trajectory features."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from ..gestures import CLASS_NAMES
from ..trajectory import NormTrajectory, featurize
from .base import (ClassifierModel, Prediction, PreprocessConfig, TrainConfig,
                   features_matrix, make_prediction)
from ..nn import OptimState, sgd_step


class SvmModel(ClassifierModel):
    kind = "svm"

    def __init__(self, weights: np.ndarray, feat_mean: np.ndarray, feat_std: np.ndarray,
                 preprocess_cfg: PreprocessConfig, seed: int):
        super().__init__(preprocess_cfg, seed)
        self.weights = weights      # (10, D+1), last column is the bias
        self.feat_mean = feat_mean  # (D,)
        self.feat_std = feat_std    # (D,)

    def _scores(self, x: np.ndarray) -> np.ndarray:
        z = (x - self.feat_mean) / self.feat_std
        return np.append(z, 1.0) @ self.weights.T

    def predict_norm(self, norm: NormTrajectory) -> Prediction:
        scores = self._scores(featurize(norm).reshape(-1))
        # Calibrate scores into a distribution with a stabilized softmax.
        shifted = scores - scores.max()
        exps = np.exp(shifted)
        probs = exps / exps.sum()
        # Exact score ties resolve to the lower class code.
        argmax = int(np.flatnonzero(scores == scores.max())[0])
        return make_prediction(probs, argmax)

    def tensors(self):
        return {"weights": self.weights, "feat_mean": self.feat_mean,
                "feat_std": self.feat_std}


def svm_train(config: TrainConfig, dataset) -> SvmModel:
    """Hinge loss + L2, minibatch SGD, deterministic in the seed."""
    feats, _, labels = features_matrix(dataset.train, config.preprocess)
    if len(np.unique(labels)) < 2:
        raise InvalidArgumentError("svm training needs at least 2 classes")
    X = feats.reshape(feats.shape[0], -1)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std < 1e-9] = 1.0
    Xz = np.hstack([(X - mean) / std, np.ones((X.shape[0], 1))])
    n, d = Xz.shape
    K = len(CLASS_NAMES)
    Y = np.full((n, K), -1.0)
    Y[np.arange(n), labels] = 1.0

    W = np.zeros((K, d))
    rng = np.random.default_rng(config.seed)
    state = OptimState(config.learning_rate, config.momentum)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = Xz[idx], Y[idx]
            scores = xb @ W.T
            viol = (config.svm_margin - yb * scores) > 0
            dscores = np.where(viol, -yb, 0.0) / len(idx)
            grad = dscores.T @ xb + config.svm_lambda * W
            grad[:, -1] -= config.svm_lambda * W[:, -1]  # bias not regularized
            sgd_step(state, [W], [grad])
    return SvmModel(W, mean, std, config.preprocess, config.seed)
