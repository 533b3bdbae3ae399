import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airpen.errors import (DegenerateTrajectoryError, InvalidArgumentError,
                           ParseError)
from airpen.trajectory import (NormTrajectory, RawTrajectory, featurize,
                               format_trajectory_line, normalize,
                               parse_trajectory_line, preprocess, resample,
                               smooth)


def raw(points, frame=(480, 480), t_ms=None):
    return RawTrajectory(np.asarray(points, dtype=np.float64),
                         frame[0], frame[1],
                         None if t_ms is None else np.asarray(t_ms, dtype=np.int64))


class TestRawTrajectory:
    def test_rejects_empty(self):
        with pytest.raises(InvalidArgumentError):
            raw(np.empty((0, 2)))

    def test_rejects_out_of_frame(self):
        with pytest.raises(InvalidArgumentError):
            raw([(500, 10)], frame=(480, 480))

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidArgumentError):
            raw([(np.nan, 0)])

    def test_rejects_decreasing_timestamps(self):
        with pytest.raises(InvalidArgumentError):
            raw([(0, 0), (1, 1)], t_ms=[10, 5])


class TestSmooth:
    def test_window_one_is_identity(self):
        t = raw([(0, 0), (3, 1), (5, 2)])
        out = smooth(t, 1)
        assert np.array_equal(out.points, t.points)

    def test_hand_oracle_window_three(self):
        # truncated centered means: (0+3)/2, (0+3+0)/3, (3+0)/2
        t = raw([(0, 0), (3, 0), (0, 0)])
        out = smooth(t, 3)
        expected = np.array([[1.5, 0], [1.0, 0], [1.5, 0]])
        assert np.allclose(out.points, expected)

    def test_constant_unchanged(self):
        t = raw([(2, 2)] * 5)
        out = smooth(t, 3)
        assert np.allclose(out.points, t.points)

    def test_even_window_rejected(self):
        with pytest.raises(InvalidArgumentError):
            smooth(raw([(0, 0), (1, 1)]), 2)

    def test_zero_window_rejected(self):
        with pytest.raises(InvalidArgumentError):
            smooth(raw([(0, 0), (1, 1)]), 0)

    def test_timestamps_copied(self):
        t = raw([(0, 0), (3, 0), (0, 0)], t_ms=[0, 33, 66])
        out = smooth(t, 3)
        assert np.array_equal(out.t_ms, t.t_ms)

    @given(st.integers(2, 40), st.integers(0, 3))
    @settings(max_examples=25, deadline=None)
    def test_length_preserved(self, n, wi):
        window = 2 * wi + 1
        rng = np.random.default_rng(n)
        pts = rng.uniform(0, 480, size=(n, 2))
        out = smooth(raw(pts), window)
        assert out.points.shape == (n, 2)


class TestResample:
    def test_linear_midpoint(self):
        out = resample(raw([(0, 0), (1, 1)]), 3)
        assert np.allclose(out.points, [[0, 0], [0.5, 0.5], [1, 1]])

    def test_idempotent_on_uniform(self):
        pts = np.column_stack([np.linspace(0, 10, 7), np.zeros(7)])
        out = resample(raw(pts), 7)
        assert np.allclose(out.points, pts, atol=1e-9)

    def test_arc_length_walk(self):
        out = resample(raw([(0, 0), (2, 0), (2, 1)]), 4)
        assert np.allclose(out.points, [[0, 0], [1, 0], [2, 0], [2, 1]])

    def test_endpoints_exact(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(0, 480, size=(20, 2))
        out = resample(raw(pts), 50)
        assert np.array_equal(out.points[0], pts[0])
        assert np.array_equal(out.points[-1], pts[-1])

    def test_single_point_rejected(self):
        with pytest.raises(DegenerateTrajectoryError):
            resample(raw([(1, 1)]), 5)

    def test_zero_length_path_rejected(self):
        with pytest.raises(DegenerateTrajectoryError):
            resample(raw([(1, 1), (1, 1), (1, 1)]), 5)

    @given(st.integers(2, 30), st.integers(2, 60))
    @settings(max_examples=25, deadline=None)
    def test_output_length_and_endpoints(self, n, L):
        rng = np.random.default_rng(n * 100 + L)
        pts = rng.uniform(0, 480, size=(n, 2))
        if np.allclose(np.diff(pts, axis=0), 0):
            return
        out = resample(raw(pts), L)
        assert out.points.shape == (L, 2)
        assert np.allclose(out.points[0], pts[0])
        assert np.allclose(out.points[-1], pts[-1])


class TestNormalize:
    def test_square_corners(self):
        out = normalize(raw([(0, 0), (2, 0), (2, 2), (0, 2)]))
        assert np.allclose(out.points, [[0, 0], [1, 0], [1, 1], [0, 1]])

    def test_horizontal_segment_centered(self):
        out = normalize(raw([(0, 0), (4, 0)]))
        assert np.allclose(out.points[:, 0], [0, 1])
        assert np.allclose(out.points[:, 1], [0.5, 0.5])

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateTrajectoryError):
            normalize(raw([(3, 3), (3, 3)]))

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(10, 100, size=(12, 2))
        a = normalize(raw(pts))
        b = normalize(raw(pts * 3.5, frame=(480, 480)))
        assert np.allclose(a.points, b.points, atol=1e-9)

    @given(st.integers(0, 1000))
    @settings(max_examples=30, deadline=None)
    def test_output_in_unit_square(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 480, size=(rng.integers(2, 40), 2))
        try:
            out = normalize(raw(pts))
        except DegenerateTrajectoryError:
            return
        assert out.points.min() >= -1e-12
        assert out.points.max() <= 1 + 1e-12


class TestFeaturize:
    def _norm(self, pts):
        return NormTrajectory(np.asarray(pts, dtype=np.float64))

    def test_row_zero_deltas(self):
        pts = np.linspace([0, 0], [1, 1], 50)
        f = featurize(self._norm(pts))
        assert f[0, 2] == 0.0 and f[0, 3] == 0.0

    def test_constant_diagonal_deltas(self):
        pts = np.linspace([0, 0], [1, 1], 50)
        f = featurize(self._norm(pts))
        assert np.allclose(f[1:, 2:], f[1, 2:])

    def test_shape(self):
        pts = np.linspace([0, 0.2], [1, 0.8], 50)
        f = featurize(self._norm(pts))
        assert f.shape == (50, 4)

    def test_deltas_are_differences(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 1, size=(50, 2))
        f = featurize(self._norm(pts))
        assert np.allclose(f[1:, 2:], np.diff(pts, axis=0))


class TestChainDeterminism:
    def test_bit_identical(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 480, size=(30, 2))
        a = featurize(preprocess(raw(pts)))
        b = featurize(preprocess(raw(pts.copy())))
        assert np.array_equal(a, b)


class TestTextFormat:
    def test_round_trip(self):
        t = raw([(1, 2), (3, 4)], t_ms=[0, 33])
        line = format_trajectory_line(t, "Circle")
        back, label = parse_trajectory_line(line, 1)
        assert label == "Circle"
        assert np.array_equal(back.points, t.points)
        assert np.array_equal(back.t_ms, t.t_ms)
        assert (back.frame_width, back.frame_height) == (480, 480)

    def test_null_label(self):
        t = raw([(1, 2), (3, 4)])
        line = format_trajectory_line(t, None)
        _, label = parse_trajectory_line(line, 1)
        assert label is None

    def test_malformed_names_line_number(self):
        with pytest.raises(ParseError, match="7"):
            parse_trajectory_line("{not json", 7)

    def test_missing_points_field(self):
        with pytest.raises(ParseError):
            parse_trajectory_line('{"label": null, "frame": [480, 480]}', 1)
