"""Synthetic intensity videos and ground-truth maps for calibration experiments."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .core import CalibrationMap, IntensityFrame, LogFrame

LOG_LO = np.log1p(4.0)
LOG_HI = np.log1p(250.0)


def random_map(width: int, height: int, c_range=(0.05, 0.3), b_range=(-0.02, 0.02),
               seed=None) -> CalibrationMap:
    rng = np.random.default_rng(seed)
    c = rng.uniform(*c_range, size=(height, width))
    b = rng.uniform(*b_range, size=(height, width))
    return CalibrationMap(c, b)


def texture(size: int, blur: float, seed=None, lo: float = LOG_LO, hi: float = LOG_HI) -> np.ndarray:
    """Smooth random log-intensity texture spanning ``[lo, hi]``."""
    rng = np.random.default_rng(seed)
    tex = ndimage.gaussian_filter(rng.standard_normal((size, size)), blur, mode="wrap")
    # rank-normalise so every level is equally common
    ranks = np.argsort(np.argsort(tex.ravel())).reshape(tex.shape)
    return lo + (hi - lo) * (ranks + 0.5) / ranks.size


def moving_texture(width: int = 64, height: int = 64, n_frames: int = 200, fps: float = 25.0,
                   blur: float = 3.0, amplitude: float = 4.0, drift: float = 3.0,
                   freq=(1.0, 2.0), flicker: float = 0.0, flicker_hz: float = 2.5,
                   seed=None) -> list[IntensityFrame]:
    """A textured plane sliding over the sensor on a wobbling diagonal path.

    ``amplitude`` (pixels), ``freq`` (Hz range of the two wobbles) and
    ``drift`` (pixels per second) shape the path;
    log intensity is bilinearly resampled so every frame stays in range.
    ``flicker`` adds a global sinusoidal log-brightness swing of that
    amplitude, which makes every pixel change direction regularly.
    """
    rng = np.random.default_rng(seed)
    margin = int(amplitude + drift * n_frames / fps) + 4
    size = max(width, height) + 2 * margin
    tex = texture(size, blur, rng, LOG_LO + flicker, LOG_HI - flicker)
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    freq = rng.uniform(*freq, size=2)
    frames = []
    for k in range(n_frames):
        t = k / fps
        ox = margin + amplitude * np.sin(2 * np.pi * freq[0] * t + phase[0]) + drift * t
        oy = margin + amplitude * np.sin(2 * np.pi * freq[1] * t + phase[1]) + 0.5 * drift * t
        L = ndimage.map_coordinates(tex, [yy + oy, xx + ox], order=1, mode="wrap")
        L = L + flicker * np.sin(2 * np.pi * flicker_hz * t)
        frames.append(IntensityFrame(t, np.clip(np.expm1(L), 0.0, 255.0)))
    return frames


def equal_texture(width: int = 64, height: int = 64, n_frames: int = 500, fps: float = 100.0,
                  std: float = 0.6, rho: float = 0.9, mean: float = 3.6, seed=None) -> list[IntensityFrame]:
    """Independent stationary AR(1) log-intensity process at every pixel.

    All pixels share the same statistics, so each is excited equally on
    average over a long sequence.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((height, width)) * std
    innov = std * np.sqrt(1 - rho * rho)
    frames = []
    for k in range(n_frames):
        L = np.clip(mean + x, 0.0, np.log(256.0))
        frames.append(IntensityFrame(k / fps, np.expm1(L)))
        x = rho * x + innov * rng.standard_normal((height, width))
    return frames


def log_frames(frames) -> list[LogFrame]:
    return [LogFrame(f.timestamp, np.log1p(f.values)) for f in frames]


def snap_to_event_levels(frames, cmap: CalibrationMap) -> list[IntensityFrame]:
    """Quantise a video so each pixel's frame samples sit on its own event levels.

    Between consecutive frames the log intensity moves by a whole number of
    ON steps ``c + b`` or OFF steps ``c - b``, chosen to follow the input as
    closely as possible. Simulating the result with ``cmap`` leaves no
    sub-threshold residue at any frame, so frame differences equal
    ``c * sum(sigma) + b * count`` exactly.
    """
    on = cmap.c + cmap.b
    off = cmap.c - cmap.b
    top = np.log(256.0)
    out = []
    level = None
    for f in frames:
        target = np.log1p(f.values)
        if level is None:
            level = target.copy()
        else:
            diff = target - level
            steps = np.where(diff >= 0, np.rint(diff / on), np.rint(diff / off))
            level = level + np.where(steps >= 0, steps * on, steps * off)
            level = np.where(level > top, level - on, level)
            level = np.where(level < 0, level + off, level)
        out.append(IntensityFrame(f.timestamp, np.clip(np.expm1(level), 0.0, 255.0)))
    return out
