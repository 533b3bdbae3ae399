"""Desk-scale fingertip regressor: synthetic renders and the CNN.

The renderer replaces real egocentric imagery: each image is a skin
toned capsule ("finger") joined to an elliptical blob ("hand") over a
cool-toned textured background, with the capsule's far endpoint as the
ground-truth fingertip. The network maps 3x99x99 pixels to an (x, y)
location through two conv blocks (3 convs + max-pool each) and three
dense layers, with a logistic squash keeping outputs inside the frame.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericError, ShapeError
from .nn import (AdamState, Conv2dParams, DenseParams, PoolSpec, adam_step,
                 conv2d_backward, dense_apply, dense_backward, load_tensors,
                 maxpool_apply, maxpool_backward, relu, relu_backward,
                 save_tensors, sigmoid)
from .nn.layers import conv2d_apply_cached

IMAGE_SIZE = 99
TIP_MARGIN = 4.0
MODEL_HEADER = "fingertip-v1"
_POOL = PoolSpec()


# --- synthetic rendering ---

@dataclass(frozen=True)
class SynthImage:
    pixels: np.ndarray    # (3, 99, 99) in [0, 1]
    truth_tip: tuple[float, float]  # pixel coordinates, inside the margin box


def render_synthetic_hand(seed: int, size: int = IMAGE_SIZE) -> SynthImage:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xF1)))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    # Cool-toned background: gradient + low-frequency waves + grain.
    img = np.empty((3, size, size))
    for ch, base in enumerate((0.25, 0.35, 0.45)):
        g = rng.uniform(-0.3, 0.3, size=2)
        phase = rng.uniform(0, 2 * np.pi, size=2)
        freq = rng.uniform(0.02, 0.08, size=2)
        img[ch] = (base + rng.uniform(-0.1, 0.1)
                   + g[0] * xx / size + g[1] * yy / size
                   + 0.06 * np.sin(freq[0] * xx * 2 * np.pi + phase[0])
                   + 0.06 * np.sin(freq[1] * yy * 2 * np.pi + phase[1]))
    img += rng.normal(0.0, 0.03, size=img.shape)

    lo = TIP_MARGIN
    hi = size - 1 - TIP_MARGIN
    tip = rng.uniform(lo, hi, size=2)
    angle = rng.uniform(0.0, 2 * np.pi)
    direction = np.array([np.cos(angle), np.sin(angle)])
    length = rng.uniform(26.0, 44.0)
    radius = rng.uniform(2.5, 5.0)
    base_pt = tip + direction * length

    # Skin tone with r > g > b; the hand blob is a shaded variant.
    r = rng.uniform(0.55, 0.95)
    finger_color = np.array([r, r * rng.uniform(0.62, 0.85), r * rng.uniform(0.35, 0.6)])
    hand_color = np.clip(finger_color * rng.uniform(0.85, 1.1), 0.0, 1.0)

    # Capsule: distance from each pixel to the tip->base segment.
    p = np.stack([xx, yy], axis=-1)
    seg = base_pt - tip
    seg_len2 = float(seg @ seg)
    t = np.clip(((p - tip) @ seg) / seg_len2, 0.0, 1.0)
    closest = tip + t[..., None] * seg
    dist = np.linalg.norm(p - closest, axis=-1)
    finger_mask = np.clip(radius + 0.8 - dist, 0.0, 1.0)  # soft edge

    # Hand ellipse centered past the finger base, aligned with it.
    center = base_pt + direction * rng.uniform(8.0, 16.0)
    ax_major = rng.uniform(14.0, 24.0)
    ax_minor = rng.uniform(10.0, 18.0)
    rel = p - center
    u = rel @ direction
    v = rel @ np.array([-direction[1], direction[0]])
    q = (u / ax_major) ** 2 + (v / ax_minor) ** 2
    hand_mask = np.clip((1.0 - q) * 6.0, 0.0, 1.0)

    for ch in range(3):
        img[ch] = img[ch] * (1 - hand_mask) + hand_color[ch] * hand_mask
        img[ch] = img[ch] * (1 - finger_mask) + finger_color[ch] * finger_mask
    img = np.clip(img, 0.0, 1.0)
    return SynthImage(img, (float(tip[0]), float(tip[1])))


def render_batch(seeds) -> tuple[np.ndarray, np.ndarray]:
    imgs, tips = [], []
    for s in seeds:
        im = render_synthetic_hand(int(s))
        imgs.append(im.pixels)
        tips.append(im.truth_tip)
    return np.stack(imgs), np.asarray(tips)


# --- network ---

@dataclass(frozen=True)
class NetConfig:
    input_size: int = IMAGE_SIZE
    block1_channels: int = 8
    block2_channels: int = 16
    dense1: int = 256
    dense2: int = 64
    kernel: int = 3

    def flat_size(self) -> int:
        s = self.input_size
        for _ in range(3):
            s -= self.kernel - 1
        s = (s - s % 2) // 2
        for _ in range(3):
            s -= self.kernel - 1
        s = (s - s % 2) // 2
        if s < 1:
            raise ShapeError(f"input size {self.input_size} too small for the topology")
        return self.block2_channels * s * s


class FingertipNet:
    """conv x3 -> pool -> conv x3 -> pool -> dense x3 -> logistic."""

    def __init__(self, config: NetConfig, convs: list[Conv2dParams],
                 denses: list[DenseParams]):
        self.config = config
        self.convs = convs    # 6 layers
        self.denses = denses  # 3 layers

    @staticmethod
    def init(config: NetConfig, rng: np.random.Generator) -> "FingertipNet":
        # He-scale bounds on the hidden layers: uniform(+/-1/sqrt(fan_in))
        # shrinks activations ~0.41x per relu layer, and six conv layers of
        # that starves the dense head of signal. The output layer stays
        # small so the logistic squash starts near the frame centre.
        def conv(cin, cout):
            bound = np.sqrt(6.0 / (cin * config.kernel ** 2))
            k = rng.uniform(-bound, bound, size=(cout, cin, config.kernel, config.kernel))
            return Conv2dParams(k, np.zeros(cout))

        def dense(nin, nout, gain=6.0):
            bound = np.sqrt(gain / nin)
            return DenseParams(rng.uniform(-bound, bound, size=(nout, nin)), np.zeros(nout))

        c1, c2 = config.block1_channels, config.block2_channels
        convs = [conv(3, c1), conv(c1, c1), conv(c1, c1),
                 conv(c1, c2), conv(c2, c2), conv(c2, c2)]
        denses = [dense(config.flat_size(), config.dense1),
                  dense(config.dense1, config.dense2),
                  dense(config.dense2, 2, gain=1.0)]
        return FingertipNet(config, convs, denses)

    def param_list(self):
        out = []
        for c in self.convs:
            out += [c.kernels, c.bias]
        for d in self.denses:
            out += [d.weight, d.bias]
        return out

    def _forward(self, x: np.ndarray):
        """x (B, 3, S, S) -> (coords (B, 2), cache)."""
        if x.ndim != 4 or x.shape[1:] != (3, self.config.input_size, self.config.input_size):
            raise ShapeError(
                f"expected (B, 3, {self.config.input_size}, {self.config.input_size}), "
                f"got {x.shape}")
        cache = {"conv": [], "pool": [], "dense": []}
        # Zero-center the pixels; all-positive inputs correlate the first
        # layer's gradients and stall training on a predict-the-mean plateau.
        a = x - 0.5
        for bi, block in enumerate((self.convs[:3], self.convs[3:])):
            for conv in block:
                z, cols = conv2d_apply_cached(conv, a)
                cache["conv"].append((a, z, cols))
                a = relu(z)
            # Odd spatial dims lose their last row/column before pooling.
            crop = (a.shape[2] % 2, a.shape[3] % 2)
            a_crop = a[:, :, :a.shape[2] - crop[0], :a.shape[3] - crop[1]]
            pooled, arg = maxpool_apply(_POOL, a_crop)
            cache["pool"].append((a.shape, crop, a_crop.shape, arg))
            a = pooled
        flat = a.reshape(a.shape[0], -1)
        cache["pool_out_shape"] = a.shape
        a = flat
        for di, d in enumerate(self.denses):
            z = dense_apply(d, a)
            cache["dense"].append((a, z))
            a = relu(z) if di < 2 else z
        s = sigmoid(a)
        cache["squash"] = s
        return s * self.config.input_size, cache

    def forward(self, img: np.ndarray) -> tuple[float, float]:
        """Single image (3, S, S) -> (x, y) in pixels."""
        coords, _ = self._forward(np.asarray(img, dtype=np.float64)[None])
        return float(coords[0, 0]), float(coords[0, 1])

    def forward_batch(self, imgs: np.ndarray) -> np.ndarray:
        coords, _ = self._forward(imgs)
        return coords

    def loss_and_grads(self, imgs: np.ndarray, tips: np.ndarray):
        """Mean squared pixel error and gradients for param_list()."""
        B = imgs.shape[0]
        coords, cache = self._forward(imgs)
        diff = coords - tips
        loss = float((diff ** 2).mean())
        # d(mean of 2B squared components)/dcoords
        dcoords = 2.0 * diff / diff.size
        s = cache["squash"]
        dz = dcoords * self.config.input_size * s * (1.0 - s)
        grads_d = []
        for di in range(2, -1, -1):
            a_in, z = cache["dense"][di]
            da, dW, db = dense_backward(self.denses[di], a_in, dz)
            grads_d = [dW, db] + grads_d
            if di > 0:
                _, z_prev = cache["dense"][di - 1]
                dz = relu_backward(z_prev, da)
            else:
                dflat = da
        dpool = dflat.reshape(cache["pool_out_shape"])
        grads_c = []
        conv_idx = 5
        for bi in (1, 0):
            a_shape, crop, a_crop_shape, arg = cache["pool"][bi]
            da_crop = maxpool_backward(_POOL, a_crop_shape, arg, dpool)
            da = np.zeros(a_shape)
            da[:, :, :a_crop_shape[2], :a_crop_shape[3]] = da_crop
            for _ in range(3):
                a_in, z, cols = cache["conv"][conv_idx]
                dzc = relu_backward(z, da)
                da, dk, db = conv2d_backward(self.convs[conv_idx], a_in, dzc,
                                             cols=cols, need_dx=conv_idx > 0)
                grads_c = [dk, db] + grads_c
                conv_idx -= 1
            dpool = da
        if not np.isfinite(loss):
            raise NumericError("fingertip loss is not finite")
        return loss, grads_c + grads_d


@dataclass
class FingertipTrainConfig:
    epochs: int = 7
    batch_size: int = 32
    learning_rate: float = 3e-3
    net: NetConfig = field(default_factory=NetConfig)


def _render_seeds(seed: int, stream: int, n: int) -> np.ndarray:
    return np.random.SeedSequence(entropy=(seed, stream)).generate_state(n)


def fingertip_train(config: FingertipTrainConfig, n_train: int, seed: int,
                    log=None) -> tuple[FingertipNet, list[float]]:
    """Train on seeded renders; deterministic in (config, seed)."""
    if n_train < 100:
        raise InvalidArgumentError("need at least 100 training renders")
    imgs, tips = render_batch(_render_seeds(seed, 0, n_train))
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 1)))
    net = FingertipNet.init(config.net, rng)
    params = net.param_list()
    state = AdamState(config.learning_rate)
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n_train)
        losses = []
        for start in range(0, n_train, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = net.loss_and_grads(imgs[idx], tips[idx])
            if not np.isfinite(loss):
                raise NumericError(f"fingertip training diverged at epoch {epoch}")
            adam_step(state, params, grads)
            losses.append(loss)
        history.append(float(np.mean(losses)))
        if log:
            log(epoch, history[-1])
    return net, history


def test_errors(net: FingertipNet, n_test: int, seed: int,
                batch: int = 64) -> np.ndarray:
    """Euclidean pixel errors on held-out renders (disjoint seed stream)."""
    seeds = _render_seeds(seed, 2, n_test)
    errs = []
    for start in range(0, n_test, batch):
        imgs, tips = render_batch(seeds[start:start + batch])
        pred = net.forward_batch(imgs)
        errs.append(np.linalg.norm(pred - tips, axis=1))
    return np.concatenate(errs)


def success_rate(net: FingertipNet, n_test: int, seed: int, threshold_px: float) -> float:
    if threshold_px <= 0:
        raise InvalidArgumentError("threshold must be positive")
    errs = test_errors(net, n_test, seed)
    return float((errs <= threshold_px).mean())


def success_curve(net: FingertipNet, n_test: int, seed: int,
                  thresholds=range(1, 21)) -> dict[int, float]:
    errs = test_errors(net, n_test, seed)
    return {int(t): float((errs <= t).mean()) for t in thresholds}


def save_fingertip(net: FingertipNet, history: list[float], path: str) -> None:
    tensors = {}
    for i, c in enumerate(net.convs):
        tensors[f"conv{i}.kernels"] = c.kernels
        tensors[f"conv{i}.bias"] = c.bias
    for i, d in enumerate(net.denses):
        tensors[f"dense{i}.weight"] = d.weight
        tensors[f"dense{i}.bias"] = d.bias
    tensors["loss_history"] = np.asarray(history)
    header = {"model_version": MODEL_HEADER,
              "net": {k: getattr(net.config, k) for k in
                      ("input_size", "block1_channels", "block2_channels",
                       "dense1", "dense2", "kernel")}}
    save_tensors(path, tensors, header)


def load_fingertip(path: str) -> tuple[FingertipNet, list[float]]:
    from .errors import ModelFormatError
    tensors, header = load_tensors(path)
    if header.get("model_version") != MODEL_HEADER:
        raise ModelFormatError(f"{path}: not a {MODEL_HEADER} model")
    cfg = NetConfig(**header["net"])
    convs = [Conv2dParams(tensors[f"conv{i}.kernels"], tensors[f"conv{i}.bias"])
             for i in range(6)]
    denses = [DenseParams(tensors[f"dense{i}.weight"], tensors[f"dense{i}.bias"])
              for i in range(3)]
    history = list(tensors.get("loss_history", np.empty(0)))
    return FingertipNet(cfg, convs, denses), history
