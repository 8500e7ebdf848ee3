"""Shared domain types, log-intensity conversion and the special-pixel classifier."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

MAX_INTENSITY = 255.0
DEFAULT_TOL_C = 0.02
DEFAULT_TOL_B = 0.005


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Event:
    t: float
    x: int
    y: int
    polarity: int

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity}")
        if self.t < 0:
            raise ValueError(f"negative timestamp {self.t}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"negative pixel coordinate ({self.x}, {self.y})")


class EventStream:
    """Time-sorted events of one sensor, stored column-wise.

    Iterating yields :class:`Event` values; the numpy columns ``t``, ``x``,
    ``y`` and ``p`` are what the compute modules use.
    """

    __slots__ = ("width", "height", "t", "x", "y", "p")

    def __init__(self, width: int, height: int, t=(), x=(), y=(), p=()):
        self.width = int(width)
        self.height = int(height)
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"invalid resolution {width}x{height}")
        t = _frozen(t, float).ravel()
        x = _frozen(x, np.int64).ravel()
        y = _frozen(y, np.int64).ravel()
        p = _frozen(p, np.int8).ravel()
        if not (len(t) == len(x) == len(y) == len(p)):
            raise ValueError("event columns have different lengths")
        if len(t):
            if np.any(np.diff(t) < 0):
                raise ValueError("events are not sorted by timestamp")
            if t[0] < 0:
                raise ValueError("negative event timestamp")
            if x.min() < 0 or x.max() >= self.width or y.min() < 0 or y.max() >= self.height:
                bad = np.flatnonzero((x < 0) | (x >= self.width) | (y < 0) | (y >= self.height))[0]
                raise ValueError(
                    f"event {bad} at ({x[bad]}, {y[bad]}) outside {self.width}x{self.height} sensor")
            if np.any((p != 1) & (p != -1)):
                raise ValueError("polarity must be +1 or -1")
        self.t, self.x, self.y, self.p = t, x, y, p

    @classmethod
    def from_events(cls, width: int, height: int, events: Sequence[Event]) -> "EventStream":
        events = sorted(events, key=lambda e: e.t)
        return cls(width, height,
                   [e.t for e in events], [e.x for e in events],
                   [e.y for e in events], [e.polarity for e in events])

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self.t)):
            yield self[i]

    def __getitem__(self, i: int) -> Event:
        return Event(float(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __repr__(self):
        return f"EventStream({self.width}x{self.height}, {len(self)} events)"

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def pixel_index(self) -> np.ndarray:
        """Row-major flat pixel index of every event."""
        return self.y * self.width + self.x

    def slice_index(self, t0: float, t1: float) -> slice:
        """Index range of the events with ``t0 < t <= t1``."""
        lo = np.searchsorted(self.t, t0, side="right")
        hi = np.searchsorted(self.t, t1, side="right")
        return slice(int(lo), int(hi))

    def window(self, t0: float, t1: float) -> "EventStream":
        """Events in the half-open interval ``(t0, t1]``."""
        s = self.slice_index(t0, t1)
        return EventStream(self.width, self.height, self.t[s], self.x[s], self.y[s], self.p[s])

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pixel (sum of polarities, number of events) grids."""
        n = self.width * self.height
        idx = self.pixel_index
        sum_sigma = np.bincount(idx, weights=self.p, minlength=n).astype(np.int64)
        count = np.bincount(idx, minlength=n).astype(np.int64)
        return sum_sigma.reshape(self.shape), count.reshape(self.shape)


@dataclass(frozen=True, eq=False)
class IntensityFrame:
    timestamp: float
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2:
            raise ValueError(f"intensity frame must be 2-D, got shape {v.shape}")
        bad = ~((v >= 0) & (v <= MAX_INTENSITY))
        if bad.any():
            y, x = np.argwhere(bad)[0]
            raise ValueError(f"intensity {v[y, x]} at pixel (x={x}, y={y}) outside [0, 255]")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class LogFrame:
    timestamp: float
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2:
            raise ValueError(f"log frame must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("log frame contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class CalibrationMap:
    """Per-pixel contrast threshold ``c`` and bias ``b`` (natural-log units).

    A pixel fires ON when its log intensity rises by ``c + b`` and OFF when
    it falls by ``c - b`` relative to its reference level.
    """

    c: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c, b = _frozen(self.c), _frozen(self.b)
        if c.ndim != 2 or c.shape != b.shape:
            raise ValueError(f"c and b must be 2-D grids of equal shape, got {c.shape} and {b.shape}")
        bad = ~(c > 0)
        if bad.any():
            y, x = np.argwhere(bad)[0]
            raise ValueError(f"non-positive threshold c={c[y, x]} at pixel (x={x}, y={y})")
        bad = ~(np.abs(b) < c)
        if bad.any():
            y, x = np.argwhere(bad)[0]
            raise ValueError(f"|b|={abs(b[y, x])} >= c={c[y, x]} at pixel (x={x}, y={y})")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)

    @classmethod
    def uniform(cls, width: int, height: int, c: float = 0.1, b: float = 0.0) -> "CalibrationMap":
        return cls(np.full((height, width), float(c)), np.full((height, width), float(b)))

    @property
    def shape(self):
        return self.c.shape

    @property
    def width(self) -> int:
        return self.c.shape[1]

    @property
    def height(self) -> int:
        return self.c.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CalibrationMap):
            return NotImplemented
        return np.array_equal(self.c, other.c) and np.array_equal(self.b, other.b)


class PixelClass(enum.IntEnum):
    # values double as the class-index image codes
    NOMINAL = 0
    HOT = 1
    COLD = 2
    WARM = 3
    COOL = 4


def log_intensity(frame: IntensityFrame) -> LogFrame:
    """Map intensities in [0, 255] to log space as ``ln(I + 1)``."""
    values = np.asarray(frame.values, dtype=float)
    bad = ~((values >= 0) & (values <= MAX_INTENSITY))
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise ValueError(f"intensity {values[y, x]} at pixel (x={x}, y={y}) outside [0, 255]")
    return LogFrame(frame.timestamp, np.log1p(values))


def exp_intensity(frame: LogFrame) -> IntensityFrame:
    """Inverse of :func:`log_intensity`, clamped to [0, 255]."""
    return IntensityFrame(frame.timestamp, np.clip(np.expm1(frame.values), 0.0, MAX_INTENSITY))


def classify_pixel(c: float, b: float, nominal_c: float = 0.1,
                   tol_c: float = DEFAULT_TOL_C, tol_b: float = DEFAULT_TOL_B) -> PixelClass:
    """Assign one special-pixel class; bias deviations win over threshold deviations."""
    if not c > 0 or not nominal_c > 0:
        raise ValueError(f"thresholds must be positive (c={c}, nominal_c={nominal_c})")
    if tol_c < 0 or tol_b < 0:
        raise ValueError("tolerances must be non-negative")
    if b < -tol_b:
        return PixelClass.WARM
    if b > tol_b:
        return PixelClass.COOL
    if c < nominal_c - tol_c:
        return PixelClass.HOT
    if c > nominal_c + tol_c:
        return PixelClass.COLD
    return PixelClass.NOMINAL


def classify_map(cmap: CalibrationMap, nominal_c: float = 0.1,
                 tol_c: float = DEFAULT_TOL_C, tol_b: float = DEFAULT_TOL_B) -> np.ndarray:
    """Vectorised :func:`classify_pixel` over a whole map; returns class codes."""
    if not nominal_c > 0:
        raise ValueError(f"nominal_c must be positive, got {nominal_c}")
    if tol_c < 0 or tol_b < 0:
        raise ValueError("tolerances must be non-negative")
    c, b = cmap.c, cmap.b
    out = np.full(c.shape, int(PixelClass.NOMINAL), dtype=np.int8)
    out[c > nominal_c + tol_c] = PixelClass.COLD
    out[c < nominal_c - tol_c] = PixelClass.HOT
    out[b > tol_b] = PixelClass.COOL
    out[b < -tol_b] = PixelClass.WARM
    return out
