# Offline calibration with frames: simulate a sensor, then recover its map.

import numpy as np

from evcalib import scenes
from evcalib.calib import OffEiConfig, calibrate_offei
from evcalib.ingest import make_dataset
from evcalib.simulate import simulate_events

# A sensor whose thresholds and biases differ from pixel to pixel
truth = scenes.random_map(64, 64, seed=2)
print("true c in [%.3f, %.3f], b in [%.4f, %.4f]" % (truth.c.min(), truth.c.max(), truth.b.min(), truth.b.max()))

# Moving texture with some global flicker. Snapping the frames to the levels
# the events can reach makes them agree exactly with the event stream.
video = scenes.moving_texture(width=64, height=64, n_frames=200, amplitude=2.0, drift=2.0, flicker=0.4, seed=1)
video = scenes.snap_to_event_levels(video, truth)

events = simulate_events(video, truth)
print(len(events), "events")

ds = make_dataset(events, video)
est, report = calibrate_offei(ds, OffEiConfig(d=10))
print("degenerate pixels:", report.degenerate_count)
print("max |c error| = %.2e" % np.abs(est.c - truth.c).max())
print("max |b error| = %.2e" % np.abs(est.b - truth.b).max())

# Same thing on raw frames. Each interval now carries leftover contrast that
# never crossed a threshold, so the fit is close but no longer exact.
raw = scenes.moving_texture(width=64, height=64, n_frames=200, amplitude=2.0, drift=2.0, flicker=0.4, seed=1)
est_raw, _ = calibrate_offei(make_dataset(simulate_events(raw, truth), raw), OffEiConfig(d=1))
rel = np.abs(est_raw.c - truth.c) / truth.c
print("raw frames: median relative c error %.3f" % np.median(rel))
