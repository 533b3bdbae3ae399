"""Finite-difference verification of analytic gradients."""
from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidArgumentError, NumericError


def grad_check(loss_and_grad_fn, params: list[np.ndarray], epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    loss_and_grad_fn(params) must return (scalar loss, list of gradient
    arrays matching params). Relative error per element is
    |a - n| / max(|a|, |n|, 1e-8).
    """
    if not (1e-7 <= epsilon <= 1e-3):
        raise InvalidArgumentError(f"epsilon must be in [1e-7, 1e-3], got {epsilon}")
    loss, grads = loss_and_grad_fn(params)
    if not math.isfinite(loss):
        raise NumericError("loss is not finite")
    worst = 0.0
    for pi, p in enumerate(params):
        flat = p.reshape(-1)
        gflat = grads[pi].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            lp, _ = loss_and_grad_fn(params)
            flat[j] = orig - epsilon
            lm, _ = loss_and_grad_fn(params)
            flat[j] = orig
            if not (math.isfinite(lp) and math.isfinite(lm)):
                raise NumericError("perturbed loss is not finite")
            numeric = (lp - lm) / (2.0 * epsilon)
            analytic = gflat[j]
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
