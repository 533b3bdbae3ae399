"""Gradient-descent update rules operating on lists of parameter arrays."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError


@dataclass
class OptimState:
    learning_rate: float
    momentum: float = 0.0
    velocities: list | None = None
    step: int = 0


def _check_shapes(params, grads, accs=None):
    if len(params) != len(grads):
        raise ShapeError("params and grads differ in count")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"grad {i} shape {g.shape} != param shape {p.shape}")
        if accs is not None and accs[i].shape != p.shape:
            raise ShapeError(f"accumulator {i} shape mismatch")


def sgd_step(state: OptimState, params: list[np.ndarray], grads: list[np.ndarray]):
    """In-place w -= lr * g, with classical momentum when configured."""
    if state.momentum and state.velocities is None:
        state.velocities = [np.zeros_like(p) for p in params]
    _check_shapes(params, grads, state.velocities)
    for i, (p, g) in enumerate(zip(params, grads)):
        if state.momentum:
            v = state.velocities[i]
            v *= state.momentum
            v += g
            p -= state.learning_rate * v
        else:
            p -= state.learning_rate * g
    state.step += 1
    return params


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: list | None = None
    v: list | None = None
    step: int = 0


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]):
    """Standard Adam with bias correction, in place."""
    if state.m is None:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    _check_shapes(params, grads, state.m)
    state.step += 1
    t = state.step
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g * g
        mhat = state.m[i] / (1 - state.beta1 ** t)
        vhat = state.v[i] / (1 - state.beta2 ** t)
        p -= state.learning_rate * mhat / (np.sqrt(vhat) + state.eps)
    return params
