import numpy as np
import pytest

from evcalib import scenes
from evcalib.core import CalibrationMap, EventStream, IntensityFrame, log_intensity
from evcalib.reconstruct import evaluate, evaluation_windows, integrate, integrate_log, integrate_uncalibrated
from evcalib.simulate import simulate_events


def one_pixel(events, value=100.0, w=1, h=1):
    t, x, p = zip(*events) if events else ((), (), ())
    stream = EventStream(w, h, t, x, [0] * len(t), p)
    return IntensityFrame(0.0, np.full((h, w), value)), stream


def test_no_events_is_identity():
    start, stream = one_pixel([])
    out = integrate(start, stream, CalibrationMap.uniform(1, 1))
    assert np.array_equal(out.values, start.values) and out.timestamp == 0.0


def test_single_on_event():
    start, stream = one_pixel([(0.5, 0, 1)])
    out = integrate(start, stream, CalibrationMap.uniform(1, 1, 0.1, 0.0))
    assert out.values[0, 0] == pytest.approx(101 * np.exp(0.1) - 1, rel=1e-12)
    assert out.values[0, 0] == pytest.approx(110.6222627, abs=1e-6)
    assert out.timestamp == 0.5


def test_bias_adds_per_event():
    start, stream = one_pixel([(0.1, 0, 1), (0.2, 0, -1), (0.3, 0, -1)])
    lf = integrate_log(start, stream, CalibrationMap(np.full((1, 1), 0.2), np.full((1, 1), 0.01)))
    assert lf.values[0, 0] == pytest.approx(np.log(101) - 0.2 + 3 * 0.01)


def test_opposite_events_cancel_without_bias():
    start, stream = one_pixel([(0.1 * i, 0, 1 if i % 2 else -1) for i in range(1, 11)])
    out = integrate(start, stream, CalibrationMap.uniform(1, 1, 0.17, 0.0))
    assert out.values[0, 0] == pytest.approx(100.0, rel=1e-12)


def test_clamped_to_8bit_range():
    start, stream = one_pixel([(0.01 * i, 0, 1) for i in range(1, 60)], value=200.0)
    assert integrate(start, stream, CalibrationMap.uniform(1, 1, 0.3)).values[0, 0] == 255.0


def test_uncalibrated_is_uniform_map():
    rng = np.random.default_rng(0)
    n = 50
    t = np.sort(rng.uniform(0, 1, n))
    stream = EventStream(4, 3, t, rng.integers(0, 4, n), rng.integers(0, 3, n), rng.choice([-1, 1], n))
    start = IntensityFrame(0.0, rng.uniform(0, 255, (3, 4)))
    a = integrate_uncalibrated(start, stream, 0.2)
    b = integrate(start, stream, CalibrationMap.uniform(4, 3, 0.2, 0.0))
    assert np.array_equal(a.values, b.values)
    s1, one = one_pixel([(0.5, 0, 1)])
    d = log_intensity(integrate_uncalibrated(s1, one, 0.2)).values - log_intensity(s1).values
    assert d[0, 0] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        integrate_uncalibrated(s1, one, 0.0)


def test_resolution_mismatch():
    start, stream = one_pixel([], w=2)
    with pytest.raises(ValueError, match="resolution"):
        integrate(start, stream, CalibrationMap.uniform(1, 1))


def test_exact_on_event_consistent_frames(consistent_video, consistent_dataset, truth_map):
    frames, stream = consistent_video, consistent_dataset.stream
    for s, k in [(0, 1), (3, 20), (50, 199)]:
        ev = stream.window(frames[s].timestamp, frames[k].timestamp)
        est = integrate_log(frames[s], ev, truth_map)
        np.testing.assert_allclose(est.values, log_intensity(frames[k]).values, atol=1e-9)


def test_log_error_bounded_by_one_threshold(base_video, truth_map):
    """On plain frames the residue is under one threshold plus the bias of each event."""
    frames = base_video[:11]
    stream = simulate_events(frames, truth_map)
    for k in range(1, 11):
        ev = stream.window(frames[0].timestamp, frames[k].timestamp)
        _, n = ev.counts()
        err = np.abs(integrate_log(frames[0], ev, truth_map).values - log_intensity(frames[k]).values)
        bound = truth_map.c + np.abs(truth_map.b) * np.maximum(n, 1)
        assert np.all(err <= bound + 1e-9)


def test_calibration_beats_uniform_guess(base_video, truth_map):
    frames = base_video[:40]
    stream = simulate_events(frames, truth_map)
    good = np.mean([r.metrics.rmse for r in evaluate(frames, stream, truth_map, window=10, skip=0)])
    bad = np.mean([r.metrics.rmse for r in evaluate(frames, stream, CalibrationMap.uniform(64, 64), window=10, skip=0)])
    assert good < bad


class TestEvaluate:
    def frames(self, n=12, fps=2.0):
        return [IntensityFrame(i / fps, np.full((12, 12), 40.0)) for i in range(n)]

    def test_skip(self):
        frames = self.frames()
        stream = EventStream(12, 12, [], [], [], [])
        rows = evaluate(frames, stream, CalibrationMap.uniform(12, 12), skip=5.0)
        assert rows[0].index == 10 and frames[rows[0].index].timestamp >= 5.0
        assert all(r.metrics.rmse == 0 and r.metrics.psnr == 100 for r in rows)
        assert [float(v) for v in rows[0].line().split()] == [10, 0, 100, 1]

    def test_window(self):
        assert list(evaluation_windows(self.frames(5), None, window=2)) == [(0, 2), (1, 3), (2, 4)]
        with pytest.raises(ValueError):
            list(evaluation_windows(self.frames(5), None, window=0))

    def test_event_cadence(self):
        frames = self.frames(6, fps=1.0)
        t = [0.5, 1.5, 1.6, 2.5, 3.5, 3.6, 3.7, 4.5]
        stream = EventStream(12, 12, t, [0] * 8, [0] * 8, [1] * 8)
        assert list(evaluation_windows(frames, stream, every_events=3)) == [(0, 2), (2, 4)]
        with pytest.raises(ValueError):
            list(evaluation_windows(frames, stream, every_events=0))
