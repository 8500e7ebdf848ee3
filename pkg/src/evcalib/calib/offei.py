"""Offline hybrid calibration from events plus intensity frames."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CalibrationMap, log_intensity
from ..ingest import Dataset
from .ols import REASONS, RegressionRow, degenerate_lines, solve_grid


@dataclass(frozen=True)
class OffEiConfig:
    d: int = 40
    fallback_c: float = 0.1
    fallback_b: float = 0.0
    min_rows: int = 2
    min_events: int = 2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not self.fallback_c > 0:
            raise ValueError("fallback_c must be positive")
        if self.min_rows < 2 or self.min_events < 1:
            raise ValueError("min_rows must be >= 2 and min_events >= 1")


@dataclass(frozen=True, eq=False)
class RowSet:
    """Stacked regression rows, arrays of shape ``(n_rows, height, width)``."""

    sum_sigma: np.ndarray
    count: np.ndarray
    delta_log: np.ndarray

    def __len__(self):
        return self.sum_sigma.shape[0]

    def pixel_rows(self, x: int, y: int) -> list[RegressionRow]:
        return [RegressionRow(int(s), int(n), float(z)) for s, n, z in
                zip(self.sum_sigma[:, y, x], self.count[:, y, x], self.delta_log[:, y, x])]


def interval_sums(stream, t_bounds: np.ndarray):
    """Per-interval, per-pixel (sum of polarities, event count).

    Interval ``j`` is ``(t_bounds[j], t_bounds[j + 1]]``; events outside the
    overall span are ignored.
    """
    n_int = len(t_bounds) - 1
    h, w = stream.shape
    npix = h * w
    j = np.searchsorted(t_bounds, stream.t, side="left") - 1
    keep = (j >= 0) & (j < n_int)
    flat = j[keep] * npix + stream.pixel_index[keep]
    sum_sigma = np.bincount(flat, weights=stream.p[keep], minlength=n_int * npix)
    count = np.bincount(flat, minlength=n_int * npix)
    return (np.rint(sum_sigma).astype(np.int64).reshape(n_int, h, w),
            count.astype(np.int64).reshape(n_int, h, w))


def build_rows(dataset: Dataset, k: int, d: int, n: int) -> RowSet:
    """Rows over intervals ``(T[k + j d], T[k + (j + 1) d]]`` for ``j < n``.

    ``delta_log`` is later minus earlier frame log intensity.
    """
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    if k < 0 or k + n * d > len(dataset.frames) - 1:
        raise IndexError(f"frames {k}..{k + n * d} out of range for {len(dataset.frames)} frames")
    picks = [dataset.frames[k + j * d] for j in range(n + 1)]
    logs = np.stack([log_intensity(f).values for f in picks])
    t_bounds = np.array([f.timestamp for f in picks])
    sum_sigma, count = interval_sums(dataset.stream, t_bounds)
    return RowSet(sum_sigma, count, np.diff(logs, axis=0))


@dataclass(frozen=True, eq=False)
class CalibrationReport:
    reason: np.ndarray
    residual: np.ndarray
    n_rows: int = 0
    extra: dict | None = None
    arrays: dict | None = None

    @property
    def degenerate(self) -> np.ndarray:
        return self.reason != 0

    @property
    def degenerate_count(self) -> int:
        return int(self.degenerate.sum())

    def lines(self) -> list[str]:
        out = degenerate_lines(self.reason)
        out.append(f"# degenerate {self.degenerate_count} of {self.reason.size}")
        for code, name in REASONS.items():
            out.append(f"# {name} {int((self.reason == code).sum())}")
        for key, value in (self.extra or {}).items():
            out.append(f"# {key} {value}")
        return out


def calibrate_offei(dataset: Dataset, cfg: OffEiConfig = OffEiConfig()):
    """Fit ``(c, b)`` per pixel over the whole sequence with ``cfg.d``-frame intervals."""
    n_frames = len(dataset.frames)
    if n_frames < cfg.d + 1:
        raise ValueError(f"OffEI needs at least d+1={cfg.d + 1} frames, got {n_frames}")
    n = (n_frames - 1) // cfg.d
    rows = build_rows(dataset, 0, cfg.d, n)
    sol = solve_grid(rows.sum_sigma, rows.count, rows.delta_log,
                     cfg.fallback_c, cfg.fallback_b, cfg.min_rows, cfg.min_events)
    report = CalibrationReport(sol.reason, sol.residual, n_rows=n)
    return CalibrationMap(sol.c, sol.b), report
