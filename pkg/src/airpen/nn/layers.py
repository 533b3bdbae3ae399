"""Dense, LSTM, convolution, pooling and softmax kernels.

Everything operates on float64 numpy arrays. Each kernel has a forward
function and a matching backward that returns exact analytic gradients;
the pair is validated against finite differences by gradcheck tests.

Batched variants take a leading batch axis; the single-sample entry
points mirror the public operation contracts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, NumericError, ShapeError


def sigmoid(x):
    # Split by sign for stability at large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x):
    return np.maximum(x, 0.0)


def relu_backward(x, dy):
    return dy * (x > 0)


# --- dense ---

@dataclass
class DenseParams:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)

    def __post_init__(self):
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError("dense weight must be (out, in) with bias (out,)")


def dense_apply(p: DenseParams, x: np.ndarray) -> np.ndarray:
    """y = W x + b; x may be (in,) or (B, in)."""
    if x.shape[-1] != p.weight.shape[1]:
        raise ShapeError(f"dense expects input size {p.weight.shape[1]}, got {x.shape[-1]}")
    return x @ p.weight.T + p.bias


def dense_backward(p: DenseParams, x: np.ndarray, dy: np.ndarray):
    """Returns (dx, dW, db) for y = W x + b."""
    x2 = np.atleast_2d(x)
    dy2 = np.atleast_2d(dy)
    dW = dy2.T @ x2
    db = dy2.sum(axis=0)
    dx = dy2 @ p.weight
    return dx.reshape(x.shape), dW, db


# --- LSTM ---

@dataclass
class LstmCellParams:
    """Packed cell parameters, gate order [input, forget, cell, output]."""

    W: np.ndarray  # (4H, I)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    def __post_init__(self):
        H4 = self.W.shape[0]
        if H4 % 4 != 0 or self.U.shape != (H4, H4 // 4) or self.b.shape != (H4,):
            raise ShapeError("LSTM params must be W (4H,I), U (4H,H), b (4H,)")

    @property
    def hidden_size(self):
        return self.W.shape[0] // 4

    @property
    def input_size(self):
        return self.W.shape[1]


def _lstm_gates(p: LstmCellParams, x2, h2):
    H = p.hidden_size
    z = x2 @ p.W.T + h2 @ p.U.T + p.b
    i = sigmoid(z[:, :H])
    f = sigmoid(z[:, H:2 * H])
    g = np.tanh(z[:, 2 * H:3 * H])
    o = sigmoid(z[:, 3 * H:])
    return i, f, g, o


def lstm_cell_step(p: LstmCellParams, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    """One step of the standard LSTM cell; returns (h', c')."""
    if x.shape != (p.input_size,) or h.shape != (p.hidden_size,) or c.shape != (p.hidden_size,):
        raise ShapeError("lstm_cell_step shapes do not match the cell parameters")
    i, f, g, o = _lstm_gates(p, x[None, :], h[None, :])
    c2 = f * c[None, :] + i * g
    h2 = o * np.tanh(c2)
    return h2[0], c2[0]


def lstm_forward_seq(p: LstmCellParams, X: np.ndarray):
    """Unroll over X (B, T, I) from zero state; returns (h_final, cache)."""
    B, T, _ = X.shape
    H = p.hidden_size
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = []
    for t in range(T):
        x = X[:, t, :]
        i, f, g, o = _lstm_gates(p, x, h)
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        cache.append((x, h, c, i, f, g, o, tanh_c))
        h = o * tanh_c
        c = c_new
    return h, cache


def lstm_backward_seq(p: LstmCellParams, cache, dh_final: np.ndarray):
    """Backprop through time from a gradient on the final hidden state.

    Returns (dW, dU, db, dX) with dX shaped (B, T, I).
    """
    B = dh_final.shape[0]
    T = len(cache)
    dW = np.zeros_like(p.W)
    dU = np.zeros_like(p.U)
    db = np.zeros_like(p.b)
    dX = np.zeros((B, T, p.input_size))
    dh = dh_final
    dc = np.zeros_like(dh_final)
    for t in range(T - 1, -1, -1):
        x, h_prev, c_prev, i, f, g, o, tanh_c = cache[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c ** 2)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc = dc * f
        dz = np.hstack([di * i * (1 - i), df * f * (1 - f),
                        dg * (1 - g ** 2), do * o * (1 - o)])
        dW += dz.T @ x
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dX[:, t, :] = dz @ p.W
        dh = dz @ p.U
    return dW, dU, db, dX


def lstm_run(p: LstmCellParams, seq: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Final hidden state after unrolling over seq (T, I) from zero state."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] < 1:
        raise InvalidArgumentError("sequence must be non-empty with shape (T, I)")
    if direction not in ("forward", "backward"):
        raise InvalidArgumentError(f"direction must be forward or backward, got {direction!r}")
    if direction == "backward":
        seq = seq[::-1]
    h, _ = lstm_forward_seq(p, seq[None, :, :])
    return h[0]


# --- convolution ---

@dataclass
class Conv2dParams:
    kernels: np.ndarray  # (C_out, C_in, k, k)
    bias: np.ndarray     # (C_out,)
    stride: int = 1

    def __post_init__(self):
        if self.kernels.ndim != 4 or self.kernels.shape[2] != self.kernels.shape[3]:
            raise ShapeError("kernels must be (C_out, C_in, k, k)")
        if self.bias.shape != (self.kernels.shape[0],):
            raise ShapeError("conv bias must be (C_out,)")
        if self.stride < 1:
            raise ShapeError("stride must be >= 1")


def _im2col(x: np.ndarray, k: int, stride: int) -> np.ndarray:
    # x (B, C, H, W) -> (B, C*k*k, H'*W'); filled with k*k plain slice
    # copies, which beats gathering a transposed sliding-window view.
    B, C, H, W = x.shape
    Ho = (H - k) // stride + 1
    Wo = (W - k) // stride + 1
    cols = np.empty((B, C, k, k, Ho, Wo))
    for a in range(k):
        for d in range(k):
            cols[:, :, a, d] = x[:, :, a:a + stride * Ho:stride, d:d + stride * Wo:stride]
    return cols.reshape(B, C * k * k, Ho * Wo)


def conv2d_apply(p: Conv2dParams, x: np.ndarray) -> np.ndarray:
    """Valid cross-correlation; x is (C_in, H, W) or (B, C_in, H, W)."""
    single = x.ndim == 3
    if single:
        x = x[None]
    Co, Ci, k, _ = p.kernels.shape
    if x.ndim != 4 or x.shape[1] != Ci:
        raise ShapeError(f"conv input must be (B, {Ci}, H, W), got {x.shape}")
    if x.shape[2] < k or x.shape[3] < k:
        raise ShapeError(f"kernel {k}x{k} larger than input {x.shape[2]}x{x.shape[3]}")
    B, _, H, W = x.shape
    Ho = (H - k) // p.stride + 1
    Wo = (W - k) // p.stride + 1
    cols = _im2col(x, k, p.stride)
    y = np.matmul(p.kernels.reshape(Co, -1)[None], cols).reshape(B, Co, Ho, Wo)
    y += p.bias[None, :, None, None]
    return y[0] if single else y


def conv2d_apply_cached(p: Conv2dParams, x: np.ndarray):
    """Batched stride-1 forward that also returns the im2col buffer."""
    Co, Ci, k, _ = p.kernels.shape
    B, _, H, W = x.shape
    Ho, Wo = H - k + 1, W - k + 1
    if H < k or W < k:
        raise ShapeError(f"kernel {k}x{k} larger than input {H}x{W}")
    cols = _im2col(x, k, 1)
    y = np.matmul(p.kernels.reshape(Co, -1)[None], cols).reshape(B, Co, Ho, Wo)
    y += p.bias[None, :, None, None]
    return y, cols


def conv2d_backward(p: Conv2dParams, x: np.ndarray, dy: np.ndarray,
                    cols: np.ndarray | None = None, need_dx: bool = True):
    """Returns (dx, dkernels, dbias); stride-1 valid convolutions only.

    cols may pass the forward pass's im2col buffer to avoid recomputing
    it; need_dx=False skips the input gradient (first-layer case).
    """
    if p.stride != 1:
        raise ShapeError("conv2d_backward supports stride 1 only")
    single = x.ndim == 3
    if single:
        x, dy = x[None], dy[None]
    Co, Ci, k, _ = p.kernels.shape
    B = x.shape[0]
    if cols is None:
        cols = _im2col(x, k, 1)  # (B, Ci*k*k, Ho*Wo)
    dy_mat = dy.reshape(B, Co, -1)
    dk = np.matmul(dy_mat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(p.kernels.shape)
    db = dy_mat.sum(axis=(0, 2))
    dx = None
    if need_dx:
        # dx is the full correlation of dy with 180-degree-rotated kernels.
        pad = k - 1
        dy_pad = np.pad(dy, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        w_rot = p.kernels[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)  # (Ci, Co, k, k)
        dx = conv2d_apply(Conv2dParams(np.ascontiguousarray(w_rot), np.zeros(Ci)), dy_pad)
        if single:
            dx = dx[0]
    return dx, dk, db


# --- pooling ---

@dataclass
class PoolSpec:
    window: int = 2
    stride: int = 2

    def __post_init__(self):
        if self.window != 2 or self.stride != 2:
            raise ShapeError("only 2x2/stride-2 max pooling is supported")


def maxpool_apply(spec: PoolSpec, x: np.ndarray):
    """Max over non-overlapping 2x2 windows; returns (pooled, argmax).

    argmax holds each window's flat winner index (0..3) for backward.
    Spatial dims must be even; crop beforehand if they are not.
    """
    single = x.ndim == 3
    if single:
        x = x[None]
    B, C, H, W = x.shape
    if H % 2 or W % 2:
        raise ShapeError(f"maxpool requires even spatial dims, got {H}x{W}")
    win = x.reshape(B, C, H // 2, 2, W // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    win = win.reshape(B, C, H // 2, W // 2, 4)
    arg = win.argmax(axis=-1)
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    if single:
        out, arg = out[0], arg[0]
    return out, arg


def maxpool_backward(spec: PoolSpec, x_shape, arg: np.ndarray, dy: np.ndarray):
    """Routes each upstream gradient to its window's argmax."""
    single = len(x_shape) == 3
    if single:
        x_shape = (1,) + tuple(x_shape)
        arg, dy = arg[None], dy[None]
    B, C, H, W = x_shape
    onehot = np.zeros((B, C, H // 2, W // 2, 4))
    np.put_along_axis(onehot, arg[..., None], 1.0, axis=-1)
    dwin = onehot * dy[..., None]
    dx = dwin.reshape(B, C, H // 2, W // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, H, W)
    return dx[0] if single else dx


# --- softmax cross-entropy ---

def softmax_cross_entropy(logits: np.ndarray, label: int):
    """Returns (loss, probs, grad_logits) for one sample.

    Stabilized by max subtraction; loss = -ln probs[label] and
    grad_logits = probs - onehot(label).
    """
    logits = np.asarray(logits, dtype=np.float64)
    K = logits.shape[0]
    if K < 2:
        raise InvalidArgumentError("need at least 2 classes")
    if not 0 <= label < K:
        raise InvalidArgumentError(f"label {label} out of range for {K} classes")
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    shifted = logits - logits.max()
    exps = np.exp(shifted)
    probs = exps / exps.sum()
    loss = -(shifted[label] - np.log(exps.sum()))
    grad = probs.copy()
    grad[label] -= 1.0
    return float(loss), probs, grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray):
    """Mean loss over a batch; grad is already divided by the batch size."""
    B, K = logits.shape
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=1, keepdims=True)
    logsum = np.log(exps.sum(axis=1))
    losses = logsum - shifted[np.arange(B), labels]
    grad = probs.copy()
    grad[np.arange(B), labels] -= 1.0
    return float(losses.mean()), probs, grad / B
