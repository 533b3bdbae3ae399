"""Shared classifier interface: predictions, configs, persistence header."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, ModelError
from ..gestures import CLASS_NAMES, GestureClass
from ..trajectory import (DEFAULT_RESAMPLE_LEN, DEFAULT_SMOOTH_WINDOW,
                          NormTrajectory, RawTrajectory, featurize, preprocess)

MODEL_VERSION = "airpen-model-v1"
KINDS = ("dtw_knn", "svm", "lstm", "bilstm")


@dataclass(frozen=True)
class Prediction:
    probs: np.ndarray          # (10,) summing to 1
    argmax_class: GestureClass
    confidence: float

    def __post_init__(self):
        if self.probs.shape != (len(CLASS_NAMES),):
            raise InvalidArgumentError("probs must cover all 10 classes")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("probs must be non-negative and sum to 1")


def make_prediction(probs: np.ndarray, argmax: int | None = None) -> Prediction:
    probs = np.asarray(probs, dtype=np.float64)
    if argmax is None:
        argmax = int(np.argmax(probs))
    return Prediction(probs, GestureClass(argmax), float(probs[argmax]))


@dataclass(frozen=True)
class PreprocessConfig:
    L: int = DEFAULT_RESAMPLE_LEN
    smooth_window: int = DEFAULT_SMOOTH_WINDOW


@dataclass
class TrainConfig:
    kind: str = "bilstm"
    epochs: int = 60
    learning_rate: float = 0.05
    hidden_size: int = 64
    batch_size: int = 16
    momentum: float = 0.9
    seed: int = 0
    svm_margin: float = 1.0
    svm_lambda: float = 1e-4
    dtw_k: int = 5
    dtw_exemplar_cap: int = 4
    label_smoothing: float = 0.1
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown model kind {self.kind!r}")
        if min(self.epochs, self.learning_rate, self.hidden_size, self.batch_size) <= 0:
            raise InvalidArgumentError("hyperparameters must be positive")
        if self.dtw_k < 1 or self.dtw_k % 2 == 0:
            raise InvalidArgumentError("dtw neighbor count k must be odd")
        if self.dtw_exemplar_cap < 1:
            raise InvalidArgumentError("dtw exemplar cap must be positive")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise InvalidArgumentError("label smoothing must be in [0, 1)")


class ClassifierModel:
    """Base for the four classifier kinds; subclasses set `kind`."""

    kind: str = ""

    def __init__(self, preprocess_cfg: PreprocessConfig, seed: int):
        self.preprocess_cfg = preprocess_cfg
        self.seed = seed
        self.last_predict_ms: float | None = None

    def predict_norm(self, norm: NormTrajectory) -> Prediction:
        raise NotImplementedError

    def predict(self, traj: NormTrajectory | RawTrajectory) -> Prediction:
        """Classify a trajectory, timing the call."""
        if isinstance(traj, RawTrajectory):
            traj = preprocess(traj, self.preprocess_cfg.smooth_window, self.preprocess_cfg.L)
        if traj.L != self.preprocess_cfg.L:
            raise InvalidArgumentError(
                f"model expects length {self.preprocess_cfg.L}, got {traj.L}")
        t0 = time.perf_counter()
        pred = self.predict_norm(traj)
        self.last_predict_ms = (time.perf_counter() - t0) * 1000.0
        return pred

    def tensors(self) -> dict:
        raise NotImplementedError

    def header_extra(self) -> dict:
        return {}

    def base_header(self) -> dict:
        return {
            "model_version": MODEL_VERSION,
            "kind": self.kind,
            "L": self.preprocess_cfg.L,
            "smooth_window": self.preprocess_cfg.smooth_window,
            "seed": self.seed,
            "classes": CLASS_NAMES,
            **self.header_extra(),
        }


def features_matrix(samples, cfg: PreprocessConfig):
    """Preprocess labeled samples into (X (N,L,4), norms (N,L,2), y (N,))."""
    if not samples:
        raise InvalidArgumentError("dataset must be non-empty")
    feats, norms, labels = [], [], []
    for s in samples:
        norm = preprocess(s.trajectory, cfg.smooth_window, cfg.L)
        norms.append(norm.points)
        feats.append(featurize(norm))
        labels.append(int(s.label))
    return np.stack(feats), np.stack(norms), np.asarray(labels, dtype=np.int64)
