"""Online hybrid calibration with a frame-aligned event buffer and low-pass update."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..core import CalibrationMap, EventStream, IntensityFrame, LogFrame, log_intensity
from .offei import CalibrationReport
from .ols import OK, TOO_FEW_EVENTS, solve_grid


@dataclass(frozen=True)
class OnEiConfig:
    big_capacity: int = 1_700_000
    small_capacity: int = 200_000
    filter_alpha: float = 0.1
    fallback_c: float = 0.1
    fallback_b: float = 0.0
    min_rows: int = 2
    min_events: int = 2

    def __post_init__(self):
        if not 0 < self.small_capacity <= self.big_capacity:
            raise ValueError("need 0 < small_capacity <= big_capacity")
        if not 0 < self.filter_alpha <= 1:
            raise ValueError(f"filter_alpha must lie in (0, 1], got {self.filter_alpha}")
        if not self.fallback_c > 0:
            raise ValueError("fallback_c must be positive")


@dataclass(frozen=True, eq=False)
class _Interval:
    sum_sigma: np.ndarray
    count: np.ndarray
    total: int


class OnlineCalibrator:
    """Streaming calibrator; feed one frame plus the events since the previous one.

    Pixels start at the fallback values. The first successful solve of a
    pixel replaces its estimate outright, later ones are blended in with
    weight ``filter_alpha``. Degenerate solves leave the pixel unchanged.
    """

    def __init__(self, width: int, height: int, config: OnEiConfig = OnEiConfig()):
        self.config = config
        self.width, self.height = int(width), int(height)
        self._c = np.full((height, width), config.fallback_c, dtype=float)
        self._b = np.full((height, width), config.fallback_b, dtype=float)
        self._seeded = np.zeros((height, width), dtype=bool)
        self._logs: deque[np.ndarray] = deque()
        self._intervals: deque[_Interval] = deque()
        self._last_t: float | None = None
        self.n_updates = 0
        self._reason = np.full((height, width), TOO_FEW_EVENTS, dtype=np.int8)
        self._residual = np.full((height, width), np.nan)
        self.last_solution = None

    @property
    def estimate(self) -> CalibrationMap:
        return CalibrationMap(self._c, self._b)

    @property
    def buffered_events(self) -> int:
        return sum(iv.total for iv in self._intervals)

    @property
    def buffered_frames(self) -> int:
        return len(self._logs)

    def push_frame(self, frame: IntensityFrame | LogFrame, events: EventStream | None = None):
        """Add one frame interval; returns the updated map or ``None`` while filling."""
        if frame.shape != (self.height, self.width):
            raise ValueError(f"frame shape {frame.shape} does not match {(self.height, self.width)}")
        t = float(frame.timestamp)
        if self._last_t is not None and not t > self._last_t:
            raise ValueError(f"non-monotone frame timestamp {t} after {self._last_t}")
        logv = frame.values if isinstance(frame, LogFrame) else log_intensity(frame).values
        prev_t, self._last_t = self._last_t, t
        self._logs.append(np.asarray(logv, dtype=float))
        if prev_t is None:
            return None

        if events is None or len(events) == 0:
            ss = np.zeros((self.height, self.width), dtype=np.int64)
            cnt = np.zeros_like(ss)
        else:
            if events.shape != (self.height, self.width):
                raise ValueError("event stream resolution does not match")
            if events.t[0] <= prev_t or events.t[-1] > t:
                raise ValueError(f"events must lie in ({prev_t}, {t}]")
            ss, cnt = events.counts()
        self._intervals.append(_Interval(ss, cnt, int(cnt.sum())))

        cfg = self.config
        if self.buffered_events <= cfg.big_capacity:
            return None
        while self._intervals and self.buffered_events > cfg.big_capacity:
            self._intervals.popleft()
            self._logs.popleft()
        self._update()
        return self.estimate

    def _groups(self) -> Iterator[tuple[int, int]]:
        """Consecutive interval ranges whose totals first reach ``small_capacity``."""
        start, acc = 0, 0
        for i, iv in enumerate(self._intervals):
            acc += iv.total
            if acc >= self.config.small_capacity:
                yield start, i + 1
                start, acc = i + 1, 0
        if start < len(self._intervals):
            yield start, len(self._intervals)

    def _update(self) -> None:
        cfg = self.config
        intervals = list(self._intervals)
        logs = list(self._logs)
        ss, cnt, dl = [], [], []
        for lo, hi in self._groups():
            ss.append(sum(iv.sum_sigma for iv in intervals[lo:hi]))
            cnt.append(sum(iv.count for iv in intervals[lo:hi]))
            dl.append(logs[hi] - logs[lo])
        if ss:
            sol = solve_grid(np.stack(ss), np.stack(cnt), np.stack(dl),
                             cfg.fallback_c, cfg.fallback_b, cfg.min_rows, cfg.min_events)
            good = sol.reason == OK
            fresh = good & ~self._seeded
            blend = good & self._seeded
            a = cfg.filter_alpha
            self._c[fresh], self._b[fresh] = sol.c[fresh], sol.b[fresh]
            self._c[blend] = (1 - a) * self._c[blend] + a * sol.c[blend]
            self._b[blend] = (1 - a) * self._b[blend] + a * sol.b[blend]
            self._seeded |= good
            self._reason, self._residual = sol.reason, sol.residual
            self.last_solution = sol
        else:
            self._reason = np.full(self._seeded.shape, TOO_FEW_EVENTS, dtype=np.int8)
        self.n_updates += 1

    def report(self) -> CalibrationReport:
        """Degeneracy of the most recent solve (all pixels before the first update)."""
        return CalibrationReport(self._reason.copy(), self._residual.copy(),
                                 extra={"updates": self.n_updates,
                                        "buffered_events": self.buffered_events,
                                        "never_solved": int((~self._seeded).sum())})


def run_online(dataset, config: OnEiConfig = OnEiConfig()):
    """Stream a whole dataset; returns the calibrator and ``(timestamp, map)`` snapshots."""
    h, w = dataset.shape
    cal = OnlineCalibrator(w, h, config)
    snapshots = []
    prev_t = None
    for frame in dataset.frames:
        events = dataset.stream.window(prev_t, frame.timestamp) if prev_t is not None else None
        est = cal.push_frame(frame, events)
        if est is not None:
            snapshots.append((frame.timestamp, est))
        prev_t = frame.timestamp
    return cal, snapshots
