# Calibration from events alone. Only relative thresholds are recoverable,
# so the result is checked by ranking and by the sign of the bias.

import numpy as np
from scipy.stats import spearmanr

from evcalib import scenes
from evcalib.calib import OffEConfig, calibrate_offe
from evcalib.simulate import simulate_events

truth = scenes.random_map(64, 64, seed=2)

# every pixel sees the same statistics, which is what the method relies on
video = scenes.equal_texture(64, 64, n_frames=500, seed=6)
events = simulate_events(video, truth)
est, report = calibrate_offe(events, OffEConfig())

print("median residual", report.extra["median_residual"])
rho = spearmanr(est.c.ravel(), truth.c.ravel()).statistic
print("rank correlation of c: %.3f" % rho)

big = np.abs(truth.b) >= 0.01
print("bias sign agreement: %.1f%%" % (100 * np.mean(np.sign(est.b[big]) == np.sign(truth.b[big]))))

# absolute level is arbitrary; rescale to a known nominal
scaled, _ = calibrate_offe(events, OffEConfig(c_scale=float(np.median(truth.c))))
print("rescaled c: median %.3f, true median %.3f" % (np.median(scaled.c), np.median(truth.c)))
