import numpy as np
import pytest

from airpen.classifiers import TrainConfig, make_prediction, train_model
from airpen.errors import OrderingError, TooShortStrokeError
from airpen.gestures import GestureClass, NoiseParams, generate_dataset, template
from airpen.streaming import (MAX_BUFFER_POINTS, GestureEvent, SegmentMode,
                              SegmenterConfig, Session, decide)


def pred_with_confidence(conf, cls=1):
    probs = np.full(10, (1.0 - conf) / 9)
    probs[cls] = conf
    return make_prediction(probs)


@pytest.fixture(scope="module")
def model():
    ds = generate_dataset(10, 2, 31, NoiseParams())
    return train_model(TrainConfig(kind="dtw_knn", seed=0), ds)


def stream_template(session, cls, n=None):
    t = template(cls)
    pts = t.points if n is None else t.points[:: max(1, len(t.points) // n)]
    event = None
    for i, (x, y) in enumerate(pts):
        event = session.push_point(x, y, i * 33) or event
    return event


class TestDecide:
    def test_above_threshold(self):
        assert decide(pred_with_confidence(0.90), 0.85) == GestureClass.SwipeRight

    def test_exactly_at_threshold_unclassified(self):
        assert decide(pred_with_confidence(0.85), 0.85) is None

    def test_low_confidence_unclassified(self):
        assert decide(pred_with_confidence(0.10), 0.85) is None

    def test_monotone_in_threshold(self):
        pred = pred_with_confidence(0.7)
        classified_at = [t for t in np.linspace(0.05, 0.95, 19)
                         if decide(pred, t) is not None]
        # lowering the threshold never unclassifies: the set is a prefix
        assert classified_at == [t for t in np.linspace(0.05, 0.95, 19) if t < 0.7]


class TestSegmenterConfig:
    def test_defaults(self):
        cfg = SegmenterConfig()
        assert cfg.dwell_ms == 400
        assert cfg.move_epsilon == 3.0
        assert cfg.min_points == 10
        assert cfg.confidence_threshold == 0.85

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            SegmenterConfig(confidence_threshold=1.5)

    def test_bad_dwell(self):
        with pytest.raises(ValueError):
            SegmenterConfig(dwell_ms=0)


class TestManualMode:
    def test_push_never_emits(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        event = stream_template(s, GestureClass.SwipeRight)
        assert event is None
        assert s.drawing

    def test_end_stroke_classifies_and_resets(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        stream_template(s, GestureClass.SwipeRight)
        event = s.end_stroke()
        assert isinstance(event, GestureEvent)
        assert event.prediction.argmax_class == GestureClass.SwipeRight
        assert event.latency_ms > 0
        assert not s.drawing
        assert s.buffer_len == 0

    def test_too_short_raises_and_resets(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        for i in range(3):
            s.push_point(10 + i, 10, i * 33)
        with pytest.raises(TooShortStrokeError):
            s.end_stroke()
        assert not s.drawing

    def test_out_of_order_timestamp(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        s.push_point(1, 1, 100)
        with pytest.raises(OrderingError):
            s.push_point(2, 2, 50)

    def test_points_clipped_to_frame(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        s.push_point(-50, 900, 0)
        assert s._xs[0] == 0.0 and s._ys[0] == 480.0

    def test_buffer_cap_forces_close(self, model):
        s = Session("s1", model, frame_width=480, frame_height=480)
        event = None
        for i in range(MAX_BUFFER_POINTS + 10):
            event = s.push_point(100 + (i % 200), 200 + (i % 100), i)
            if event is not None:
                break
        assert event is not None
        assert s.buffer_len == 0


class TestDwellMode:
    def _session(self, model):
        cfg = SegmenterConfig(mode=SegmentMode.DWELL)
        return Session("d1", model, cfg, frame_width=480, frame_height=480)

    def test_swipe_then_hold_emits_once(self, model):
        s = self._session(model)
        t = template(GestureClass.SwipeRight).points[::2]
        events = []
        now = 0
        for x, y in t[:40]:
            e = s.push_point(x, y, now)
            if e:
                events.append(e)
            now += 33
        x, y = t[39]
        for _ in range(20):  # hold still well past dwell_ms
            e = s.push_point(x, y, now)
            if e:
                events.append(e)
            now += 50
        assert len(events) == 1
        # later hold points may re-buffer, but never a full stroke
        assert s.buffer_len < s.config.min_points

    def test_short_dwell_discards_silently(self, model):
        s = self._session(model)
        events = []
        now = 0
        for _ in range(12):  # 5 distinct + hold: fewer than min_points moving
            e = s.push_point(100, 100, now)
            if e:
                events.append(e)
            now += 100
        assert events == []
        assert s.buffer_len == 0

    def test_moving_stream_never_fires(self, model):
        s = self._session(model)
        now = 0
        for i in range(100):
            e = s.push_point(10 + 4 * i, 240, now)
            assert e is None
            now += 33
