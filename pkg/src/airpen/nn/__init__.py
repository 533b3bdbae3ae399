"""From-scratch float64 neural kernels with exact hand-derived gradients."""
from .layers import (Conv2dParams, DenseParams, LstmCellParams, PoolSpec,
                     conv2d_apply, conv2d_backward, dense_apply, dense_backward,
                     lstm_backward_seq, lstm_cell_step, lstm_forward_seq,
                     lstm_run, maxpool_apply, maxpool_backward, relu,
                     relu_backward, sigmoid, softmax_cross_entropy,
                     softmax_cross_entropy_batch)
from .optim import AdamState, OptimState, adam_step, sgd_step
from .gradcheck import grad_check
from .serialize import load_tensors, save_tensors

__all__ = [
    "Conv2dParams", "DenseParams", "LstmCellParams", "PoolSpec",
    "conv2d_apply", "conv2d_backward", "dense_apply", "dense_backward",
    "lstm_backward_seq", "lstm_cell_step", "lstm_forward_seq", "lstm_run",
    "maxpool_apply", "maxpool_backward", "relu", "relu_backward", "sigmoid",
    "softmax_cross_entropy", "softmax_cross_entropy_batch",
    "AdamState", "OptimState", "adam_step", "sgd_step",
    "grad_check", "load_tensors", "save_tensors",
]
