# Online calibration: the estimate is refreshed whenever the buffer fills.

import numpy as np

from evcalib import scenes
from evcalib.calib import OnEiConfig, run_online
from evcalib.core import CalibrationMap, EventStream
from evcalib.ingest import make_dataset
from evcalib.simulate import simulate_events

truth = scenes.random_map(64, 64, seed=2)
video = scenes.moving_texture(width=64, height=64, n_frames=200, amplitude=2.0, drift=2.0, flicker=0.4, seed=1)
video = scenes.snap_to_event_levels(video, truth)
ds = make_dataset(simulate_events(video, truth), video)

cfg = OnEiConfig(big_capacity=50_000, small_capacity=5_000, filter_alpha=0.1)
cal, snaps = run_online(ds, cfg)
print(len(snaps), "updates")
for i in (0, 5, 10, 20, len(snaps) - 1):
    ts, m = snaps[i]
    print("update %3d  t=%.2f s  max |c error| %.4f" % (i, ts, np.abs(m.c - truth.c).max()))

# Thresholds drift halfway through: the filter follows the new values.
half = len(video) // 2
later = CalibrationMap(truth.c * 1.2, truth.b)
second = scenes.snap_to_event_levels(video[half:], later)
frames = list(video[:half]) + list(second)
# stitch two independently simulated halves
a = simulate_events(video[:half], truth)
b = simulate_events(second, later)
stream = EventStream(64, 64, np.r_[a.t, b.t], np.r_[a.x, b.x], np.r_[a.y, b.y], np.r_[a.p, b.p])
_, snaps = run_online(make_dataset(stream, frames), cfg)
errs = [np.abs(m.c - later.c).max() for _, m in snaps]
print("after the change, final max |c error| vs new map: %.4f" % errs[-1])
