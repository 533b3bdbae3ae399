"""Gesture classes, canonical templates, and seeded synthetic data.

Stands in for a real capture corpus: each of the 10 unistroke classes
has an ideal dense template polyline in a 480x480 frame, and samples
are produced by perturbing it with a seeded noise pipeline (rotate,
scale, jitter, speed warp, dropout).
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, ParseError
from .trajectory import (RawTrajectory, format_trajectory_line,
                         parse_trajectory_line, resample)

TEMPLATE_FRAME = 480
TEMPLATE_POINTS = 96
NOMINAL_SAMPLE_MS = 1000.0 / 30.0  # 30 samples/s synthetic timestamps


class GestureClass(enum.IntEnum):
    SwipeLeft = 0
    SwipeRight = 1
    SwipeUp = 2
    SwipeDown = 3
    Circle = 4
    Rectangle = 5
    CheckMark = 6
    Cross = 7
    Caret = 8
    Star = 9


CLASS_NAMES = [c.name for c in GestureClass]


def class_from_name(name: str) -> GestureClass:
    try:
        return GestureClass[name]
    except KeyError:
        raise ParseError(f"unknown gesture label {name!r}") from None


@dataclass(frozen=True)
class LabeledTrajectory:
    label: GestureClass
    trajectory: RawTrajectory


@dataclass(frozen=True)
class NoiseParams:
    jitter_sigma: float = 0.08      # fraction of template extent
    rotation_sigma: float = 0.35    # radians
    scale_sigma: float = 0.20       # fraction
    point_dropout: float = 0.15     # per-point probability
    speed_warp_sigma: float = 0.50  # fraction of nominal spacing
    start_phase: float = 0.0        # fraction of the loop; closed strokes only
    reverse_prob: float = 0.15      # chance of drawing the stroke backwards

    def __post_init__(self):
        vals = (self.jitter_sigma, self.rotation_sigma, self.scale_sigma,
                self.point_dropout, self.speed_warp_sigma, self.start_phase,
                self.reverse_prob)
        if any(v < 0 for v in vals):
            raise InvalidArgumentError("noise parameters must be non-negative")
        if self.point_dropout >= 1:
            raise InvalidArgumentError("point_dropout must be < 1")

    @staticmethod
    def zero() -> "NoiseParams":
        return NoiseParams(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class Dataset:
    train: list[LabeledTrajectory]
    test: list[LabeledTrajectory]
    seed: int
    noise: NoiseParams


def _polyline(*vertices) -> np.ndarray:
    return np.asarray(vertices, dtype=np.float64)


def _control_points(cls: GestureClass) -> np.ndarray:
    m = 60  # frame margin
    f = TEMPLATE_FRAME
    mid = f / 2
    if cls == GestureClass.SwipeRight:
        return _polyline((m, mid), (f - m, mid))
    if cls == GestureClass.SwipeLeft:
        pts = _control_points(GestureClass.SwipeRight).copy()
        pts[:, 0] = f - pts[:, 0]
        return pts
    if cls == GestureClass.SwipeUp:
        return _polyline((mid, f - m), (mid, m))
    if cls == GestureClass.SwipeDown:
        return _polyline((mid, m), (mid, f - m))
    if cls == GestureClass.Circle:
        # Clockwise from the top, closed.
        theta = np.linspace(0.0, 2 * np.pi, TEMPLATE_POINTS)
        r = mid - m
        return np.column_stack([mid + r * np.sin(theta), mid - r * np.cos(theta)])
    if cls == GestureClass.Rectangle:
        return _polyline((80, 110), (400, 110), (400, 370), (80, 370), (80, 110))
    if cls == GestureClass.CheckMark:
        # Short down-stroke, then the long up-right stroke. Drawn shallow,
        # the way a quick tick comes out: mostly rightward travel.
        return _polyline((65, 255), (160, 320), (430, 175))
    if cls == GestureClass.Cross:
        # Unistroke X: down-right diagonal, up the right edge, down-left diagonal.
        return _polyline((100, 110), (380, 390), (380, 110), (100, 390))
    if cls == GestureClass.Caret:
        return _polyline((95, 390), (mid, 95), (385, 390))
    if cls == GestureClass.Star:
        # Pentagram drawn by visiting every second vertex, closed.
        angles = np.pi / 2 + 4 * np.pi / 5 * np.arange(6)
        r = mid - m
        # Start at the lower-left vertex, matching the common pen stroke.
        angles = angles + 4 * np.pi / 5
        return np.column_stack([mid + r * np.cos(angles), mid - r * np.sin(angles)])
    raise InvalidArgumentError(f"unknown gesture class {cls!r}")


def template(cls: GestureClass) -> RawTrajectory:
    """Ideal dense polyline for the class in the 480x480 template frame."""
    ctrl = RawTrajectory(_control_points(cls), TEMPLATE_FRAME, TEMPLATE_FRAME)
    dense = resample(ctrl, TEMPLATE_POINTS)
    t = np.round(np.arange(TEMPLATE_POINTS) * NOMINAL_SAMPLE_MS).astype(np.int64)
    return RawTrajectory(dense.points, TEMPLATE_FRAME, TEMPLATE_FRAME, t)


CLOSED_CLASSES = frozenset({GestureClass.Circle, GestureClass.Rectangle, GestureClass.Star})
REVERSIBLE_CLASSES = frozenset(GestureClass) - {
    GestureClass.SwipeLeft, GestureClass.SwipeRight,
    GestureClass.SwipeUp, GestureClass.SwipeDown}


def _sample_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence(entropy=(seed, *path)).generate_state(1)[0])


def synthesize(cls: GestureClass, seed: int,
               noise: NoiseParams = NoiseParams()) -> LabeledTrajectory:
    """One seeded noisy sample of the class.

    Applies, in order: rotation about the centroid, uniform rescale,
    per-point jitter, speed warp (non-uniform arc-length re-spacing),
    and point dropout. Deterministic in (cls, seed, noise); all-zero
    noise reproduces the resampled template exactly.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, int(cls))))
    pts = template(cls).points.copy()
    # Closed strokes may begin anywhere along the loop; most shapes may
    # also be drawn in the reverse direction (swipes keep theirs, since
    # a reversed swipe IS the opposite class).
    if noise.start_phase > 0 and cls in CLOSED_CLASSES:
        shift = rng.uniform(-noise.start_phase, noise.start_phase)
        k = int(round(shift * (len(pts) - 1))) % (len(pts) - 1)
        if k:
            loop = pts[:-1]
            pts = np.vstack([loop[k:], loop[:k], loop[k:k + 1]])
    if noise.reverse_prob > 0 and cls in REVERSIBLE_CLASSES:
        if rng.random() < noise.reverse_prob:
            pts = pts[::-1].copy()
    centroid = pts.mean(axis=0)
    extent = float(np.ptp(pts, axis=0).max())

    angle = rng.normal(0.0, noise.rotation_sigma) if noise.rotation_sigma > 0 else 0.0
    scale = 1.0 + (rng.normal(0.0, noise.scale_sigma) if noise.scale_sigma > 0 else 0.0)
    scale = float(np.clip(scale, 0.4, 1.6))
    if angle != 0.0 or scale != 1.0:
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        pts = (pts - centroid) @ rot.T * scale + centroid

    if noise.jitter_sigma > 0:
        pts = pts + rng.normal(0.0, noise.jitter_sigma * extent, size=pts.shape)

    # Speed warp: re-space along the arc at jittered parameter values,
    # modelling a finger that speeds up and slows down mid-stroke.
    n_out = int(rng.integers(52, 78))
    u = np.linspace(0.0, 1.0, n_out)
    if noise.speed_warp_sigma > 0:
        u = u + rng.normal(0.0, noise.speed_warp_sigma / n_out * 4.0, size=n_out)
        u = np.sort(np.clip(u, 0.0, 1.0))
        u[0], u[-1] = 0.0, 1.0
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    arc_t = arc / max(arc[-1], 1e-12)
    pts = np.column_stack([np.interp(u, arc_t, pts[:, 0]),
                           np.interp(u, arc_t, pts[:, 1])])

    keep = np.ones(n_out, dtype=bool)
    if noise.point_dropout > 0:
        keep[1:-1] = rng.random(n_out - 2) >= noise.point_dropout
    pts = pts[keep]

    pts = np.clip(pts, 0.0, TEMPLATE_FRAME)
    t = np.round(np.arange(n_out)[keep] * NOMINAL_SAMPLE_MS).astype(np.int64)
    raw = RawTrajectory(pts, TEMPLATE_FRAME, TEMPLATE_FRAME, t)
    return LabeledTrajectory(cls, raw)


def generate_dataset(per_class_train: int, per_class_test: int, seed: int,
                     noise: NoiseParams = NoiseParams()) -> Dataset:
    """Balanced seeded dataset; train/test use disjoint seed streams."""
    if per_class_train < 1 or per_class_test < 1:
        raise InvalidArgumentError("per-class counts must be >= 1")
    splits = []
    for split_id, count in ((0, per_class_train), (1, per_class_test)):
        samples = []
        for cls in GestureClass:
            for i in range(count):
                samples.append(synthesize(cls, _sample_seed(seed, split_id, int(cls), i), noise))
        splits.append(samples)
    return Dataset(train=splits[0], test=splits[1], seed=seed, noise=noise)


def _write_split(path: str, samples: list[LabeledTrajectory]) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(format_trajectory_line(s.trajectory, s.label.name) + "\n")


def _read_split(path: str) -> list[LabeledTrajectory]:
    samples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            raw, label = parse_trajectory_line(line, lineno)
            if label is None:
                raise ParseError(f"line {lineno}: dataset rows require a label")
            samples.append(LabeledTrajectory(class_from_name(label), raw))
    return samples


def save_dataset(d: Dataset, directory: str) -> None:
    """Write train.jsonl / test.jsonl plus the generator metadata."""
    os.makedirs(directory, exist_ok=True)
    _write_split(os.path.join(directory, "train.jsonl"), d.train)
    _write_split(os.path.join(directory, "test.jsonl"), d.test)
    import json
    meta = {"seed": d.seed, "noise": d.noise.__dict__}
    with open(os.path.join(directory, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)


def load_dataset(directory: str) -> Dataset:
    import json
    meta_path = os.path.join(directory, "meta.json")
    seed, noise = 0, NoiseParams.zero()
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
        seed = int(meta.get("seed", 0))
        noise = NoiseParams(**meta.get("noise", {}))
    return Dataset(
        train=_read_split(os.path.join(directory, "train.jsonl")),
        test=_read_split(os.path.join(directory, "test.jsonl")),
        seed=seed, noise=noise)
