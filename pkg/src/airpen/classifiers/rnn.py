"""LSTM and Bi-LSTM sequence classifiers with from-scratch training."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError, NumericError
from ..gestures import CLASS_NAMES
from ..trajectory import NormTrajectory, featurize
from ..nn import (DenseParams, LstmCellParams, OptimState, dense_apply,
                  dense_backward, lstm_backward_seq, lstm_forward_seq,
                  sgd_step, softmax_cross_entropy_batch)
from .base import (ClassifierModel, Prediction, PreprocessConfig, TrainConfig,
                   features_matrix, make_prediction)

INPUT_SIZE = 4  # (x, y, dx, dy)


def _smoothed_ce_batch(logits: np.ndarray, labels: np.ndarray, eps: float):
    """Mean cross-entropy against smoothed targets (1-eps on the label).

    Smoothing keeps trained confidence bounded, which is what lets the
    0.85 decision threshold reject structureless strokes.
    """
    B, K = logits.shape
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=1, keepdims=True)
    logp = shifted - np.log(exps.sum(axis=1, keepdims=True))
    q = np.full((B, K), eps / K)
    q[np.arange(B), labels] += 1.0 - eps
    loss = float(-(q * logp).sum(axis=1).mean())
    return loss, (probs - q) / B


def _init_cell(rng: np.random.Generator, input_size: int, hidden: int) -> LstmCellParams:
    def uni(rows, cols):
        bound = 1.0 / np.sqrt(cols)
        return rng.uniform(-bound, bound, size=(rows, cols))

    W = uni(4 * hidden, input_size)
    U = uni(4 * hidden, hidden)
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0  # forget gate opens at init
    return LstmCellParams(W, U, b)


class RnnModel(ClassifierModel):
    """kind is "lstm" (forward only) or "bilstm" (both directions)."""

    def __init__(self, kind: str, cells: list[LstmCellParams], head: DenseParams,
                 preprocess_cfg: PreprocessConfig, seed: int,
                 loss_history: list[float] | None = None,
                 label_smoothing: float = 0.1):
        super().__init__(preprocess_cfg, seed)
        self.kind = kind
        self.cells = cells  # [forward] or [forward, backward]
        self.head = head
        self.loss_history = loss_history or []
        self.label_smoothing = label_smoothing

    @property
    def hidden_size(self):
        return self.cells[0].hidden_size

    def _logits(self, X: np.ndarray) -> np.ndarray:
        h_parts = [lstm_forward_seq(self.cells[0], X)[0]]
        if len(self.cells) == 2:
            h_parts.append(lstm_forward_seq(self.cells[1], X[:, ::-1, :])[0])
        return dense_apply(self.head, np.hstack(h_parts))

    def predict_norm(self, norm: NormTrajectory) -> Prediction:
        feats = featurize(norm)
        if feats.shape != (self.preprocess_cfg.L, INPUT_SIZE):
            raise InvalidArgumentError(
                f"model expects sequences of shape ({self.preprocess_cfg.L}, {INPUT_SIZE})")
        logits = self._logits(feats[None])[0]
        shifted = logits - logits.max()
        exps = np.exp(shifted)
        return make_prediction(exps / exps.sum())

    def param_list(self):
        params = []
        for cell in self.cells:
            params += [cell.W, cell.U, cell.b]
        params += [self.head.weight, self.head.bias]
        return params

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray):
        """Mean cross-entropy over the batch plus gradients for param_list()."""
        caches = []
        h_parts = []
        seqs = [X] + ([X[:, ::-1, :]] if len(self.cells) == 2 else [])
        for cell, seq in zip(self.cells, seqs):
            h, cache = lstm_forward_seq(cell, seq)
            caches.append(cache)
            h_parts.append(h)
        h_cat = np.hstack(h_parts)
        logits = dense_apply(self.head, h_cat)
        if self.label_smoothing > 0:
            loss, dlogits = _smoothed_ce_batch(logits, y, self.label_smoothing)
        else:
            loss, _, dlogits = softmax_cross_entropy_batch(logits, y)
        dh_cat, dWd, dbd = dense_backward(self.head, h_cat, dlogits)
        H = self.hidden_size
        grads = []
        for d, (cell, cache) in enumerate(zip(self.cells, caches)):
            dh = dh_cat[:, d * H:(d + 1) * H]
            dW, dU, db, _ = lstm_backward_seq(cell, cache, dh)
            grads += [dW, dU, db]
        grads += [dWd, dbd]
        return loss, grads

    def tensors(self):
        out = {"head.weight": self.head.weight, "head.bias": self.head.bias,
               "loss_history": np.asarray(self.loss_history)}
        names = ["fwd", "bwd"]
        for name, cell in zip(names, self.cells):
            out[f"{name}.W"] = cell.W
            out[f"{name}.U"] = cell.U
            out[f"{name}.b"] = cell.b
        return out

    def header_extra(self):
        return {"hidden_size": self.hidden_size}


def build_rnn(kind: str, config: TrainConfig, rng: np.random.Generator) -> RnnModel:
    H = config.hidden_size
    n_dir = 2 if kind == "bilstm" else 1
    cells = [_init_cell(rng, INPUT_SIZE, H) for _ in range(n_dir)]
    bound = 1.0 / np.sqrt(n_dir * H)
    head = DenseParams(rng.uniform(-bound, bound, size=(len(CLASS_NAMES), n_dir * H)),
                       np.zeros(len(CLASS_NAMES)))
    return RnnModel(kind, cells, head, config.preprocess, config.seed,
                    label_smoothing=config.label_smoothing)


def rnn_train(config: TrainConfig, dataset) -> RnnModel:
    if config.kind not in ("lstm", "bilstm"):
        raise InvalidArgumentError(f"rnn_train cannot build kind {config.kind!r}")
    X, _, y = features_matrix(dataset.train, config.preprocess)
    rng = np.random.default_rng(config.seed)
    model = build_rnn(config.kind, config, rng)
    params = model.param_list()
    state = OptimState(config.learning_rate, config.momentum)
    n = X.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = model.loss_and_grads(X[idx], y[idx])
            if not np.isfinite(loss):
                raise NumericError(f"training loss diverged at epoch {epoch}")
            sgd_step(state, params, grads)
            losses.append(loss)
        model.loss_history.append(float(np.mean(losses)))
    return model
