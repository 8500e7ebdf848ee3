"""Event datasets on disk: event text files, image indexes and calibration maps."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import CalibrationMap, Event, EventStream, IntensityFrame
from .pgm import read_pgm

MAP_MAGIC = "evcalib"
MAP_VERSION = "v1"


class FormatError(ValueError):
    """Malformed input file; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.reason = message
        self.lineno = lineno
        self.path = path


def parse_event_line(line: str, lineno: int | None = None) -> Event:
    """Parse ``"t x y p"`` with ``p`` in {0, 1} (0 is an OFF event)."""
    fields = line.split()
    if len(fields) != 4:
        raise FormatError(f"expected 4 fields, got field count {len(fields)}", lineno)
    try:
        t = float(fields[0])
        x, y, p = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError:
        raise FormatError(f"unparsable number in {line.strip()!r}", lineno) from None
    if p not in (0, 1):
        raise FormatError(f"polarity must be 0 or 1, got {p}", lineno)
    if not np.isfinite(t) or t < 0:
        raise FormatError(f"invalid timestamp {fields[0]}", lineno)
    if x < 0 or y < 0:
        raise FormatError(f"negative pixel coordinate ({x}, {y})", lineno)
    return Event(t, x, y, 1 if p == 1 else -1)


def format_event_line(event: Event) -> str:
    return f"{event.t!r} {event.x} {event.y} {1 if event.polarity > 0 else 0}"


def read_events(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read an event file into ``(t, x, y, polarity)`` columns (file order)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"event file not found: {path}")
    t, x, y, p = [], [], [], []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                e = parse_event_line(line, lineno)
            except FormatError as err:
                raise FormatError(err.reason, lineno, path) from None
            t.append(e.t)
            x.append(e.x)
            y.append(e.y)
            p.append(e.polarity)
    return (np.array(t, dtype=float), np.array(x, dtype=np.int64),
            np.array(y, dtype=np.int64), np.array(p, dtype=np.int8))


def write_events(path: str | os.PathLike, stream: EventStream | Iterable[Event]) -> int:
    """Write events in the ``t x y p`` text format; returns the number written."""
    if isinstance(stream, EventStream):
        cols = zip(stream.t.tolist(), stream.x.tolist(), stream.y.tolist(), stream.p.tolist())
        lines = [f"{t!r} {x} {y} {1 if p > 0 else 0}\n" for t, x, y, p in cols]
    else:
        lines = [format_event_line(e) + "\n" for e in stream]
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(lines)
    return len(lines)


def read_image_index(path: str | os.PathLike) -> list[tuple[float, Path]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image index not found: {path}")
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            parts = line.split(maxsplit=1)
            if len(parts) != 2:
                raise FormatError("expected 'timestamp path'", lineno, path)
            try:
                ts = float(parts[0])
            except ValueError:
                raise FormatError(f"unparsable timestamp {parts[0]!r}", lineno, path) from None
            entries.append((ts, path.parent / parts[1].strip()))
    return entries


def write_image_index(path: str | os.PathLike, entries: Sequence[tuple[float, str]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ts, p in entries:
            f.write(f"{ts!r} {p}\n")


def load_frames(index_path: str | os.PathLike) -> list[IntensityFrame]:
    """Read every frame of an image index, checking order and resolution."""
    frames = []
    for ts, img_path in read_image_index(index_path):
        if not img_path.is_file():
            raise FileNotFoundError(f"image not found: {img_path}")
        frames.append(IntensityFrame(ts, read_pgm(img_path).astype(float)))
    _check_frames(frames)
    return frames


def _check_frames(frames: Sequence[IntensityFrame]) -> None:
    for i in range(1, len(frames)):
        if frames[i].shape != frames[0].shape:
            raise ValueError(f"resolution mismatch: frame {i} is {frames[i].shape}, "
                             f"frame 0 is {frames[0].shape}")
        if not frames[i].timestamp > frames[i - 1].timestamp:
            raise ValueError(f"non-monotone frame timestamps at frame {i} "
                             f"({frames[i - 1].timestamp} then {frames[i].timestamp})")


@dataclass(frozen=True)
class LoadReport:
    n_events: int
    n_frames: int
    events_before_first_frame: int
    events_after_last_frame: int

    @property
    def out_of_range(self) -> int:
        return self.events_before_first_frame + self.events_after_last_frame


@dataclass(frozen=True, eq=False)
class Dataset:
    stream: EventStream
    frames: tuple[IntensityFrame, ...]
    report: LoadReport | None = field(default=None, compare=False)

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        _check_frames(frames)
        if frames and frames[0].shape != self.stream.shape:
            raise ValueError(f"resolution mismatch: frames {frames[0].shape}, "
                             f"events {self.stream.shape}")

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])

    @property
    def shape(self):
        return self.stream.shape


def make_dataset(stream: EventStream, frames: Sequence[IntensityFrame]) -> Dataset:
    ts = np.array([f.timestamp for f in frames])
    n = len(stream)
    if len(ts) and n:
        before = int(np.searchsorted(stream.t, ts[0], side="left"))
        after = n - int(np.searchsorted(stream.t, ts[-1], side="right"))
    else:
        before = after = 0
    return Dataset(stream, tuple(frames), LoadReport(n, len(frames), before, after))


def load_dataset(events_path: str | os.PathLike | None, images_index_path: str | os.PathLike | None,
                 width: int | None = None, height: int | None = None) -> Dataset:
    """Load events and/or frames.

    Resolution comes from the frames; for an events-only dataset pass
    ``width``/``height`` or it is inferred from the largest coordinates.
    Events outside the frame time span are kept and counted in the report.
    """
    frames = load_frames(images_index_path) if images_index_path is not None else []
    if events_path is not None:
        t, x, y, p = read_events(events_path)
    else:
        t = np.zeros(0)
        x = y = np.zeros(0, dtype=np.int64)
        p = np.zeros(0, dtype=np.int8)
    if frames:
        height, width = frames[0].shape
    elif width is None or height is None:
        if len(t) == 0:
            raise ValueError("cannot infer resolution from an empty dataset")
        width, height = int(x.max()) + 1, int(y.max()) + 1
    order = np.argsort(t, kind="stable")
    stream = EventStream(width, height, t[order], x[order], y[order], p[order])
    return make_dataset(stream, frames)


def write_calibration_map(cmap: CalibrationMap, path: str | os.PathLike) -> None:
    h, w = cmap.shape
    lines = [f"{MAP_MAGIC} {MAP_VERSION} {w} {h}\n"]
    lines += [f"{c:.9f} {b:.9f}\n" for c, b in zip(cmap.c.ravel().tolist(), cmap.b.ravel().tolist())]
    with open(path, "w", encoding="ascii") as f:
        f.writelines(lines)


def read_calibration_map(path: str | os.PathLike) -> CalibrationMap:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"calibration map not found: {path}")
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().split()
        if len(header) != 4 or header[0] != MAP_MAGIC or header[1] != MAP_VERSION:
            raise FormatError(f"bad magic, expected '{MAP_MAGIC} {MAP_VERSION} <w> <h>'", 1, path)
        try:
            w, h = int(header[2]), int(header[3])
        except ValueError:
            raise FormatError("bad dimensions in header", 1, path) from None
        if w <= 0 or h <= 0:
            raise FormatError(f"bad dimensions {w}x{h}", 1, path)
        rows = [line for line in f if line.strip()]
    if len(rows) != w * h:
        raise FormatError(f"dimension mismatch: header says {w}x{h}={w * h} pixels, "
                          f"file has {len(rows)}", None, path)
    vals = np.empty((w * h, 2))
    for i, line in enumerate(rows):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("expected 'c b'", i + 2, path)
        try:
            vals[i] = float(parts[0]), float(parts[1])
        except ValueError:
            raise FormatError(f"unparsable value in {line.strip()!r}", i + 2, path) from None
        if not vals[i, 0] > 0:
            raise FormatError(f"invariant violation: c={parts[0]} must be positive", i + 2, path)
    try:
        return CalibrationMap(vals[:, 0].reshape(h, w), vals[:, 1].reshape(h, w))
    except ValueError as err:
        raise FormatError(f"invariant violation: {err}", None, path) from None
