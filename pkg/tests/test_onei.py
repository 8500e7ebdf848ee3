import numpy as np
import pytest

from evcalib import scenes
from evcalib.calib import OnEiConfig, OnlineCalibrator, run_online
from evcalib.calib.ols import OK
from evcalib.core import CalibrationMap, EventStream, IntensityFrame
from evcalib.ingest import make_dataset
from evcalib.simulate import simulate_events

SMALL = dict(width=16, height=16, fps=25.0, amplitude=2.0, drift=2.0, flicker=0.4)
CFG = OnEiConfig(big_capacity=3500, small_capacity=350, filter_alpha=0.1)


def consistent(cmap, n_frames=150, seed=4):
    frames = scenes.snap_to_event_levels(scenes.moving_texture(**SMALL, n_frames=n_frames, seed=seed), cmap)
    return make_dataset(simulate_events(frames, cmap), frames)


def stream_pushes(cal, ds):
    prev = None
    for f in ds.frames:
        ev = ds.stream.window(prev, f.timestamp) if prev is not None else None
        yield f, cal.push_frame(f, ev)
        prev = f.timestamp


def test_accumulates_until_full():
    truth = CalibrationMap.uniform(16, 16)
    ds = consistent(truth, n_frames=20)
    cal, snaps = run_online(ds, OnEiConfig())
    assert snaps == []
    assert cal.buffered_frames == 20
    assert cal.buffered_events == len(ds.stream)
    np.testing.assert_array_equal(cal.estimate.c, 0.1)


def test_buffer_never_exceeds_capacity():
    ds = consistent(scenes.random_map(16, 16, seed=1))
    cal = OnlineCalibrator(16, 16, CFG)
    updates = 0
    for _, est in stream_pushes(cal, ds):
        assert cal.buffered_events <= CFG.big_capacity
        updates += est is not None
    assert updates > 50


def test_low_pass_stays_in_hull():
    truth = scenes.random_map(16, 16, seed=2)
    ds = consistent(truth)
    cal = OnlineCalibrator(16, 16, CFG)
    prev = cal.estimate
    seen = 0
    for _, est in stream_pushes(cal, ds):
        if est is None:
            continue
        sol = cal.last_solution
        ok = sol.reason == OK
        for new, old, upd in ((sol.c, prev.c, est.c), (sol.b, prev.b, est.b)):
            lo, hi = np.minimum(new, old), np.maximum(new, old)
            assert np.all((upd[ok] >= lo[ok] - 1e-15) & (upd[ok] <= hi[ok] + 1e-15))
            assert np.array_equal(upd[~ok], old[~ok])
        prev = est
        seen += 1
    assert seen > 20


def test_stationary_convergence():
    truth = scenes.random_map(16, 16, seed=3)
    _, snaps = run_online(consistent(truth), CFG)
    errs = [np.abs(m.c - truth.c).max() for _, m in snaps]
    assert len(errs) > 21
    assert errs[20] <= 0.01
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


def test_tracks_threshold_step():
    w = h = 16
    old, new = CalibrationMap.uniform(w, h, 0.1), CalibrationMap.uniform(w, h, 0.15)
    base = scenes.moving_texture(**SMALL, n_frames=240, seed=5)
    first = scenes.snap_to_event_levels(base[:120], old)
    second = scenes.snap_to_event_levels([first[-1]] + base[120:], new)
    s1 = simulate_events(first, old)
    s2 = simulate_events(second, new)
    stream = EventStream(w, h, np.r_[s1.t, s2.t], np.r_[s1.x, s2.x], np.r_[s1.y, s2.y], np.r_[s1.p, s2.p])
    ds = make_dataset(stream, first + second[1:])
    cal = OnlineCalibrator(w, h, CFG)
    switch_t = first[-1].timestamp
    turned_over, after = None, 0
    for f, est in stream_pushes(cal, ds):
        if est is None or f.timestamp <= switch_t:
            continue
        if turned_over is None:
            # the buffer holds only post-switch intervals once its oldest frame is the switch frame
            oldest_t = f.timestamp - (cal.buffered_frames - 1) / SMALL["fps"]
            if oldest_t >= switch_t - 1e-9:
                turned_over = f.timestamp
            continue
        after += 1
        if after == 20:
            assert np.abs(est.c - 0.15).max() <= 0.01
            break
    assert after == 20


def test_rejects_non_monotone_frame():
    cal = OnlineCalibrator(2, 2)
    cal.push_frame(IntensityFrame(1.0, np.ones((2, 2))))
    with pytest.raises(ValueError, match="non-monotone"):
        cal.push_frame(IntensityFrame(1.0, np.ones((2, 2))))


def test_rejects_events_outside_interval():
    cal = OnlineCalibrator(2, 2)
    cal.push_frame(IntensityFrame(1.0, np.ones((2, 2))))
    with pytest.raises(ValueError, match="lie in"):
        cal.push_frame(IntensityFrame(2.0, np.ones((2, 2))), EventStream(2, 2, [0.5], [0], [0], [1]))


def test_config_invariants():
    with pytest.raises(ValueError):
        OnEiConfig(big_capacity=10, small_capacity=20)
    with pytest.raises(ValueError):
        OnEiConfig(filter_alpha=0.0)
