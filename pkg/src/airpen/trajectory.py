"""Trajectory types and the preprocessing chain.

A raw trajectory is what a fingertip point source produces: pixel
coordinates in some frame, optionally timestamped. Every classifier
consumes the same preprocessed form: smooth -> resample to a fixed
length -> normalize into the unit box -> featurize with first-order
deltas.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTrajectoryError, InvalidArgumentError, ParseError

# Fixed resample length shared by all classifiers.
DEFAULT_RESAMPLE_LEN = 50
DEFAULT_SMOOTH_WINDOW = 3

# Strokes whose bounding-box diagonal is below this fraction of the
# frame's larger side are rejected as degenerate.
DEGENERATE_FRACTION = 1e-6


@dataclass(frozen=True)
class RawTrajectory:
    """Ordered fingertip points in pixel space.

    points: (N, 2) float array of (x, y); t_ms: optional (N,) int array
    of non-decreasing millisecond timestamps.
    """

    points: np.ndarray
    frame_width: int
    frame_height: int
    t_ms: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise InvalidArgumentError(f"points must be (N>=1, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("points contain non-finite values")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise InvalidArgumentError("frame dimensions must be positive")
        if (pts[:, 0].min() < 0 or pts[:, 0].max() > self.frame_width
                or pts[:, 1].min() < 0 or pts[:, 1].max() > self.frame_height):
            raise InvalidArgumentError("points fall outside the frame")
        object.__setattr__(self, "points", pts)
        if self.t_ms is not None:
            t = np.asarray(self.t_ms, dtype=np.int64)
            if t.shape != (pts.shape[0],):
                raise InvalidArgumentError("t_ms length must match points")
            if t.min() < 0:
                raise InvalidArgumentError("timestamps must be non-negative")
            if np.any(np.diff(t) < 0):
                raise InvalidArgumentError("timestamps must be non-decreasing")
            object.__setattr__(self, "t_ms", t)

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RawTrajectory):
            return NotImplemented
        if (self.frame_width, self.frame_height) != (other.frame_width, other.frame_height):
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.t_ms is None) != (other.t_ms is None):
            return False
        return self.t_ms is None or np.array_equal(self.t_ms, other.t_ms)


@dataclass(frozen=True)
class NormTrajectory:
    """Fixed-length trajectory in the unit box, ready for classification."""

    points: np.ndarray  # (L, 2) in [0, 1]^2

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InvalidArgumentError(f"points must be (L>=2, 2), got {pts.shape}")
        if pts.min() < -1e-12 or pts.max() > 1 + 1e-12:
            raise InvalidArgumentError("normalized points must lie in [0,1]^2")
        if np.allclose(pts, pts[0]):
            raise InvalidArgumentError("normalized trajectory must contain two distinct points")
        object.__setattr__(self, "points", np.clip(pts, 0.0, 1.0))

    @property
    def L(self):
        return self.points.shape[0]


def smooth(raw: RawTrajectory, window: int = DEFAULT_SMOOTH_WINDOW) -> RawTrajectory:
    """Centered moving average, window truncated at the boundaries."""
    if window < 1 or window % 2 == 0:
        raise InvalidArgumentError(f"window must be odd and positive, got {window}")
    if window == 1:
        return raw
    n = len(raw)
    half = window // 2
    # Prefix sums give each truncated-window mean in O(n).
    csum = np.vstack([np.zeros((1, 2)), np.cumsum(raw.points, axis=0)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    means = (csum[hi + 1] - csum[lo]) / (hi - lo + 1)[:, None]
    means = np.clip(means, [0, 0], [raw.frame_width, raw.frame_height])
    return RawTrajectory(means, raw.frame_width, raw.frame_height, raw.t_ms)


def _arc_lengths(pts: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def resample(raw: RawTrajectory, L: int = DEFAULT_RESAMPLE_LEN) -> RawTrajectory:
    """Resample to exactly L points at equal arc-length spacing.

    Endpoints are preserved exactly; timestamps, when present, are
    interpolated along the same arc-length parameter.
    """
    if L < 2:
        raise InvalidArgumentError(f"L must be >= 2, got {L}")
    pts = raw.points
    if len(raw) < 2:
        raise DegenerateTrajectoryError("cannot resample a single-point trajectory")
    arc = _arc_lengths(pts)
    total = arc[-1]
    if total <= 0:
        raise DegenerateTrajectoryError("zero-length path cannot be resampled")
    targets = np.linspace(0.0, total, L)
    xs = np.interp(targets, arc, pts[:, 0])
    ys = np.interp(targets, arc, pts[:, 1])
    out = np.column_stack([xs, ys])
    out[0] = pts[0]
    out[-1] = pts[-1]
    t = None
    if raw.t_ms is not None:
        t = np.round(np.interp(targets, arc, raw.t_ms.astype(np.float64))).astype(np.int64)
        t = np.maximum.accumulate(t)
    return RawTrajectory(out, raw.frame_width, raw.frame_height, t)


def normalize(raw: RawTrajectory) -> NormTrajectory:
    """Scale uniformly into [0,1]^2, centering along the shorter axis.

    Aspect ratio is preserved so swipes stay thin and circles stay
    round: the longer bounding-box side maps onto [0,1] and the shape
    sits at 0.5 along the other axis.
    """
    pts = raw.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = hi - lo
    diag = float(np.hypot(*extent))
    eps = DEGENERATE_FRACTION * max(raw.frame_width, raw.frame_height)
    if diag < eps:
        raise DegenerateTrajectoryError(
            f"bounding-box diagonal {diag:.3g} below degeneracy threshold {eps:.3g}")
    scale = 1.0 / max(extent[0], extent[1])
    scaled = (pts - lo) * scale
    span = extent * scale  # longer side is exactly 1
    offset = (1.0 - span) / 2.0
    out = np.clip(scaled + offset, 0.0, 1.0)
    return NormTrajectory(out)


def featurize(norm: NormTrajectory) -> np.ndarray:
    """Rows of (x, y, dx, dy); row 0 deltas are zero."""
    pts = norm.points
    deltas = np.vstack([np.zeros((1, 2)), np.diff(pts, axis=0)])
    return np.hstack([pts, deltas])


def preprocess(raw: RawTrajectory, window: int = DEFAULT_SMOOTH_WINDOW,
               L: int = DEFAULT_RESAMPLE_LEN) -> NormTrajectory:
    """The full chain every classifier shares."""
    return normalize(resample(smooth(raw, window), L))


# --- trajectory text format (one JSON object per line) ---

def format_trajectory_line(raw: RawTrajectory, label: str | None = None) -> str:
    if raw.t_ms is not None:
        pts = [[float(x), float(y), int(t)] for (x, y), t in zip(raw.points, raw.t_ms)]
    else:
        pts = [[float(x), float(y)] for x, y in raw.points]
    obj = {"label": label, "frame": [raw.frame_width, raw.frame_height], "points": pts}
    return json.dumps(obj, separators=(",", ":"))


def parse_trajectory_line(line: str, lineno: int = 0) -> tuple[RawTrajectory, str | None]:
    where = f"line {lineno}" if lineno else "input"
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"{where}: not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    try:
        w, h = obj["frame"]
        raw_pts = obj["points"]
    except (KeyError, TypeError, ValueError):
        raise ParseError(f"{where}: missing or malformed 'frame'/'points'") from None
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError(f"{where}: label must be a string or null")
    if not raw_pts:
        raise ParseError(f"{where}: empty point list")
    xs, ys, ts = [], [], []
    has_t = len(raw_pts[0]) >= 3
    for p in raw_pts:
        if len(p) not in (2, 3) or (len(p) >= 3) != has_t:
            raise ParseError(f"{where}: inconsistent point arity")
        xs.append(p[0])
        ys.append(p[1])
        if has_t:
            ts.append(p[2])
    pts = np.column_stack([xs, ys])
    t = np.asarray(ts, dtype=np.int64) if has_t else None
    try:
        return RawTrajectory(pts, int(w), int(h), t), label
    except InvalidArgumentError as e:
        raise ParseError(f"{where}: {e}") from None
