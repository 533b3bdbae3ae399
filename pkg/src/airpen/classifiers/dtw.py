"""Dynamic-time-warping distance and the k-NN classifier built on it."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError, ModelError
from ..gestures import CLASS_NAMES, GestureClass
from ..trajectory import NormTrajectory
from .base import (ClassifierModel, Prediction, PreprocessConfig, TrainConfig,
                   features_matrix, make_prediction)


def _as_points(x) -> np.ndarray:
    pts = x.points if isinstance(x, NormTrajectory) else np.asarray(x, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != 2:
        raise InvalidArgumentError("dtw inputs must be non-empty (N, 2) sequences")
    return pts


def dtw_distances(query, stack: np.ndarray) -> np.ndarray:
    """DTW cost from one query to each sequence in stack (N, M, 2).

    Full-grid dynamic programming with Euclidean local cost, vectorized
    over the N comparison sequences; the (i, j) recurrence itself stays
    sequential.
    """
    q = _as_points(query)
    stack = np.asarray(stack, dtype=np.float64)
    n, m = q.shape[0], stack.shape[1]
    # cost[k, i, j] = |q_i - stack_k_j|
    diff = q[None, :, None, :] - stack[:, None, :, :]
    cost = np.sqrt((diff ** 2).sum(axis=-1))
    big = np.inf
    prev = np.full((stack.shape[0], m), big)
    for i in range(n):
        cur = np.empty_like(prev)
        ci = cost[:, i, :]
        if i == 0:
            cur[:, 0] = ci[:, 0]
        else:
            cur[:, 0] = ci[:, 0] + prev[:, 0]
        for j in range(1, m):
            # prev is all-inf on row 0, so only the left move survives there
            best = np.minimum(np.minimum(cur[:, j - 1], prev[:, j]), prev[:, j - 1])
            cur[:, j] = ci[:, j] + best
        prev = cur
    return prev[:, -1]


def dtw_distance(a, b) -> float:
    """Alignment cost between two sequences (symmetric, zero on identity)."""
    return float(dtw_distances(a, _as_points(b)[None, :, :])[0])


class DtwKnnModel(ClassifierModel):
    kind = "dtw_knn"

    def __init__(self, exemplars: np.ndarray, labels: np.ndarray, k: int,
                 preprocess_cfg: PreprocessConfig, seed: int):
        super().__init__(preprocess_cfg, seed)
        if exemplars.shape[0] < k:
            raise ModelError(f"need at least k={k} exemplars, have {exemplars.shape[0]}")
        self.exemplars = exemplars  # (N, L, 2)
        self.labels = labels        # (N,)
        self.k = k

    def predict_norm(self, norm: NormTrajectory) -> Prediction:
        if self.exemplars.shape[0] == 0:
            raise ModelError("empty exemplar store")
        dists = dtw_distances(norm, self.exemplars)
        k = self.k
        nearest = np.argpartition(dists, k - 1)[:k]
        votes = np.zeros(len(CLASS_NAMES))
        mean_dist = np.full(len(CLASS_NAMES), np.inf)
        for c in range(len(CLASS_NAMES)):
            mask = self.labels[nearest] == c
            votes[c] = mask.sum()
            if votes[c]:
                mean_dist[c] = dists[nearest[mask]].mean()
        probs = votes / k
        # Ties: most votes, then smaller mean distance, then lower code.
        order = sorted(range(len(CLASS_NAMES)),
                       key=lambda c: (-votes[c], mean_dist[c], c))
        return make_prediction(probs, order[0])

    def tensors(self):
        return {"exemplars": self.exemplars, "labels": self.labels.astype(np.float64)}

    def header_extra(self):
        return {"k": self.k}


def dtw_knn_train(config: TrainConfig, dataset) -> DtwKnnModel:
    _, norms, labels = features_matrix(dataset.train, config.preprocess)
    # Cap the per-class store: prediction cost is linear in exemplar
    # count, and the full training set would blow the latency budget.
    keep = []
    for c in range(len(CLASS_NAMES)):
        keep.extend(np.flatnonzero(labels == c)[:config.dtw_exemplar_cap].tolist())
    keep = np.asarray(sorted(keep), dtype=np.int64)
    return DtwKnnModel(norms[keep], labels[keep], config.dtw_k,
                       config.preprocess, config.seed)
