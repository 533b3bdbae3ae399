"""The four trajectory classifiers behind one train/predict interface."""
from __future__ import annotations

import numpy as np

from ..errors import ModelError, ModelFormatError
from ..nn import DenseParams, LstmCellParams, load_tensors, save_tensors
from .base import (KINDS, MODEL_VERSION, ClassifierModel, Prediction,
                   PreprocessConfig, TrainConfig, make_prediction)
from .dtw import DtwKnnModel, dtw_distance, dtw_distances, dtw_knn_train
from .rnn import RnnModel, rnn_train
from .svm import SvmModel, svm_train

__all__ = [
    "KINDS", "MODEL_VERSION", "ClassifierModel", "Prediction", "PreprocessConfig",
    "TrainConfig", "make_prediction", "DtwKnnModel", "dtw_distance", "dtw_distances",
    "dtw_knn_train", "RnnModel", "rnn_train", "SvmModel", "svm_train",
    "train_model", "save_model", "load_model",
]


def train_model(config: TrainConfig, dataset) -> ClassifierModel:
    if config.kind == "dtw_knn":
        return dtw_knn_train(config, dataset)
    if config.kind == "svm":
        return svm_train(config, dataset)
    return rnn_train(config, dataset)


def save_model(model: ClassifierModel, path: str) -> None:
    save_tensors(path, model.tensors(), model.base_header())


def load_model(path: str) -> ClassifierModel:
    tensors, header = load_tensors(path)
    version = header.get("model_version")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported model version {version!r}")
    kind = header.get("kind")
    cfg = PreprocessConfig(int(header["L"]), int(header["smooth_window"]))
    seed = int(header.get("seed", 0))
    if kind == "dtw_knn":
        return DtwKnnModel(tensors["exemplars"], tensors["labels"].astype(np.int64),
                           int(header["k"]), cfg, seed)
    if kind == "svm":
        return SvmModel(tensors["weights"], tensors["feat_mean"], tensors["feat_std"],
                        cfg, seed)
    if kind in ("lstm", "bilstm"):
        cells = [LstmCellParams(tensors["fwd.W"], tensors["fwd.U"], tensors["fwd.b"])]
        if kind == "bilstm":
            cells.append(LstmCellParams(tensors["bwd.W"], tensors["bwd.U"], tensors["bwd.b"]))
        head = DenseParams(tensors["head.weight"], tensors["head.bias"])
        history = tensors.get("loss_history")
        return RnnModel(kind, cells, head, cfg, seed,
                        list(history) if history is not None else [])
    raise ModelError(f"{path}: unknown model kind {kind!r}")
