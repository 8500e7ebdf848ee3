"""Direct integration of events onto a reference frame."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CalibrationMap, EventStream, IntensityFrame, LogFrame, exp_intensity, log_intensity
from .metrics import MetricReport, compare
from .pgm import to_uint8


def _check(start, events: EventStream, cmap: CalibrationMap):
    if start.shape != cmap.shape:
        raise ValueError(f"resolution mismatch: frame {start.shape}, map {cmap.shape}")
    if events.shape != cmap.shape:
        raise ValueError(f"resolution mismatch: events {events.shape}, map {cmap.shape}")


def integrate_log(start: IntensityFrame | LogFrame, events: EventStream,
                  cmap: CalibrationMap) -> LogFrame:
    """Unclamped log estimate ``log(start) + sum(c * sigma + b)`` per pixel."""
    _check(start, events, cmap)
    base = start if isinstance(start, LogFrame) else log_intensity(start)
    sum_sigma, count = events.counts()
    ts = float(events.t[-1]) if len(events) else base.timestamp
    return LogFrame(ts, base.values + cmap.c * sum_sigma + cmap.b * count)


def integrate(start: IntensityFrame, events: EventStream, cmap: CalibrationMap) -> IntensityFrame:
    if len(events) == 0:
        _check(start, events, cmap)
        return IntensityFrame(start.timestamp, start.values)
    return exp_intensity(integrate_log(start, events, cmap))


def integrate_uncalibrated(start: IntensityFrame, events: EventStream, c0: float = 0.1) -> IntensityFrame:
    if not c0 > 0:
        raise ValueError(f"c0 must be positive, got {c0}")
    h, w = start.shape
    return integrate(start, events, CalibrationMap.uniform(w, h, c0, 0.0))


@dataclass(frozen=True, eq=False)
class EvalRow:
    index: int          # frame index of the reference image compared against
    start_index: int
    timestamp: float
    metrics: MetricReport
    image: np.ndarray   # 8-bit reconstruction

    def line(self) -> str:
        return self.metrics.line(self.index)


def evaluation_windows(frames: Sequence[IntensityFrame], stream: EventStream,
                       window: int = 1, every_events: int | None = None):
    """Yield ``(start, end)`` frame index pairs.

    Per-frame cadence uses ``(k - window, k]``. With ``every_events`` a new
    window closes at the first frame by which that many events have arrived
    since the window start.
    """
    n = len(frames)
    if every_events is None:
        if window < 1:
            raise ValueError("window must be >= 1")
        for k in range(window, n):
            yield k - window, k
        return
    if every_events < 1:
        raise ValueError("every_events must be >= 1")
    ts = np.array([f.timestamp for f in frames])
    cum = np.searchsorted(stream.t, ts, side="right")
    start = 0
    for k in range(1, n):
        if cum[k] - cum[start] >= every_events:
            yield start, k
            start = k


def evaluate(frames: Sequence[IntensityFrame], stream: EventStream, cmap: CalibrationMap,
             window: int = 1, every_events: int | None = None, skip: float = 5.0) -> list[EvalRow]:
    """Integrate each window from its start frame and score it against its end frame.

    Windows ending less than ``skip`` seconds after the first frame are left out.
    """
    if not frames:
        return []
    t_first = frames[0].timestamp
    rows = []
    for s, k in evaluation_windows(frames, stream, window, every_events):
        if frames[k].timestamp - t_first < skip:
            continue
        events = stream.window(frames[s].timestamp, frames[k].timestamp)
        est = to_uint8(integrate(frames[s], events, cmap).values)
        ref = to_uint8(frames[k].values)
        rows.append(EvalRow(k, s, frames[k].timestamp, compare(est, ref), est))
    return rows
