"""Session layer: point stream in, thresholded gesture decisions out.

A session buffers incoming fingertip points while Drawing and closes a
stroke either on an explicit end signal (Manual mode) or when the
finger dwells in place (Dwell mode). Closing a stroke runs the
preprocessing chain and attached classifier, then applies the
confidence threshold: the argmax class is emitted only when its
probability strictly exceeds the threshold, otherwise the stroke is
Unclassified.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierModel, Prediction
from .errors import (DegenerateTrajectoryError, OrderingError,
                     TooShortStrokeError)
from .gestures import GestureClass
from .trajectory import RawTrajectory

DEFAULT_THRESHOLD = 0.85
MAX_BUFFER_POINTS = 2000


class SegmentMode(enum.Enum):
    MANUAL = "manual"
    DWELL = "dwell"


@dataclass(frozen=True)
class SegmenterConfig:
    mode: SegmentMode = SegmentMode.MANUAL
    dwell_ms: int = 400
    move_epsilon: float = 3.0
    min_points: int = 10
    confidence_threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.dwell_ms <= 0:
            raise ValueError("dwell_ms must be positive")
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ValueError("confidence_threshold must be in (0, 1)")


@dataclass(frozen=True)
class GestureEvent:
    session_id: str
    decision: GestureClass | None  # None == Unclassified
    prediction: Prediction
    trajectory: RawTrajectory
    latency_ms: float

    @property
    def decision_name(self) -> str:
        return self.decision.name if self.decision is not None else "Unclassified"


def decide(prediction: Prediction, threshold: float = DEFAULT_THRESHOLD):
    """Argmax class iff confidence strictly exceeds the threshold."""
    if prediction.confidence > threshold:
        return prediction.argmax_class
    return None


class Session:
    """Single-writer gesture session over one point stream."""

    def __init__(self, session_id: str, model: ClassifierModel,
                 config: SegmenterConfig = SegmenterConfig(),
                 frame_width: int = 1000, frame_height: int = 1000):
        self.id = session_id
        self.model = model
        self.config = config
        self.frame_width = frame_width
        self.frame_height = frame_height
        self._xs: list[float] = []
        self._ys: list[float] = []
        self._ts: list[int] = []

    @property
    def drawing(self) -> bool:
        return bool(self._xs)

    @property
    def buffer_len(self) -> int:
        return len(self._xs)

    def _reset(self):
        self._xs, self._ys, self._ts = [], [], []

    def _dwell_fired(self) -> bool:
        if len(self._ts) < 2:
            return False
        t_end = self._ts[-1]
        xs, ys, ts = self._xs, self._ys, self._ts
        x0, y0 = xs[-1], ys[-1]
        eps = self.config.move_epsilon
        # Walk back over the dwell window; any large displacement cancels.
        i = len(ts) - 1
        while i >= 0 and t_end - ts[i] <= self.config.dwell_ms:
            if abs(xs[i] - x0) > eps or abs(ys[i] - y0) > eps:
                return False
            i -= 1
        # Dwell only counts if the buffer actually spans the window.
        return i >= 0

    def push_point(self, x: float, y: float, t_ms: int):
        """Append one point; may return a GestureEvent in Dwell mode."""
        if self._ts and t_ms < self._ts[-1]:
            raise OrderingError(
                f"timestamp {t_ms} precedes last buffered {self._ts[-1]}")
        self._xs.append(float(np.clip(x, 0, self.frame_width)))
        self._ys.append(float(np.clip(y, 0, self.frame_height)))
        self._ts.append(int(t_ms))
        if len(self._xs) >= MAX_BUFFER_POINTS:
            return self.end_stroke()
        if self.config.mode is SegmentMode.DWELL and self._dwell_fired():
            if len(self._xs) < self.config.min_points:
                self._reset()  # dwell on a too-short stroke just discards it
                return None
            try:
                return self.end_stroke()
            except DegenerateTrajectoryError:
                return None  # motionless buffer: nothing to classify
        return None

    def end_stroke(self) -> GestureEvent:
        """Close the stroke: classify, decide, reset to Idle."""
        n = len(self._xs)
        if n < self.config.min_points:
            self._reset()
            raise TooShortStrokeError(
                f"stroke has {n} points, need {self.config.min_points}")
        traj = RawTrajectory(
            np.column_stack([self._xs, self._ys]),
            self.frame_width, self.frame_height,
            np.asarray(self._ts, dtype=np.int64))
        self._reset()
        t0 = time.perf_counter()
        pred = self.model.predict(traj)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        decision = decide(pred, self.config.confidence_threshold)
        return GestureEvent(self.id, decision, pred, traj, latency_ms)
