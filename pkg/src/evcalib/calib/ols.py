"""Per-pixel least squares for ``sum_sigma * c + count * b = delta_log``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_COND = 1e12

# degenerate reason codes; 0 means solved
OK = 0
TOO_FEW_EVENTS = 1
TOO_FEW_ROWS = 2
RANK_DEFICIENT = 3
NONPOSITIVE_C = 4
INVALID_BAND = 5

REASONS = {
    TOO_FEW_EVENTS: "too_few_events",
    TOO_FEW_ROWS: "too_few_rows",
    RANK_DEFICIENT: "rank_deficient",
    NONPOSITIVE_C: "nonpositive_c",
    INVALID_BAND: "invalid_band",
}


@dataclass(frozen=True)
class RegressionRow:
    sum_sigma: int
    count: int
    delta_log: float

    def __post_init__(self):
        if self.count < 0 or abs(self.sum_sigma) > self.count:
            raise ValueError(f"need |sum_sigma| <= count, got ({self.sum_sigma}, {self.count})")


def _normal_cond(a, h, d):
    """Condition number of the symmetric 2x2 matrix [[a, h], [h, d]]."""
    tr = a + d
    disc = np.sqrt((a - d) ** 2 + 4.0 * h * h)
    lmax = 0.5 * (tr + disc)
    lmin = 0.5 * (tr - disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(lmin > 0, lmax / np.where(lmin > 0, lmin, 1.0), np.inf)
    return cond


def solve_pixel_ols(rows: Sequence[RegressionRow] | np.ndarray, fallback_c: float = 0.1,
                    fallback_b: float = 0.0, min_rows: int = 2, min_events: int = 2):
    """Least-squares ``(c, b)`` for one pixel.

    ``rows`` is a sequence of :class:`RegressionRow` or an ``(n, 3)`` array of
    ``(sum_sigma, count, delta_log)``. Returns ``(c, b, degenerate)``; every
    failure mode yields ``(fallback_c, fallback_b, True)``.
    """
    c, b, reason = _solve_one(rows, fallback_c, fallback_b, min_rows, min_events)
    return c, b, reason != OK


def _solve_one(rows, fallback_c, fallback_b, min_rows, min_events):
    if isinstance(rows, np.ndarray):
        arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    else:
        arr = np.array([[r.sum_sigma, r.count, r.delta_log] for r in rows], dtype=float).reshape(-1, 3)
    A, z = arr[:, :2], arr[:, 2]
    if A[:, 1].sum() < min_events:
        return fallback_c, fallback_b, TOO_FEW_EVENTS
    used = A[:, 1] > 0
    if used.sum() < min_rows:
        return fallback_c, fallback_b, TOO_FEW_ROWS
    A, z = A[used], z[used]
    if np.linalg.cond(A.T @ A) > MAX_COND:
        return fallback_c, fallback_b, RANK_DEFICIENT
    (c, b), *_ = np.linalg.lstsq(A, z, rcond=None)
    if not c > 0:
        return fallback_c, fallback_b, NONPOSITIVE_C
    if not abs(b) < c:
        return fallback_c, fallback_b, INVALID_BAND
    return float(c), float(b), OK


@dataclass(frozen=True, eq=False)
class GridSolution:
    c: np.ndarray
    b: np.ndarray
    reason: np.ndarray      # per-pixel reason code, OK where solved
    residual: np.ndarray    # per-pixel ||A x - z|| at the returned (c, b)

    @property
    def degenerate(self) -> np.ndarray:
        return self.reason != OK


def solve_grid(sum_sigma: np.ndarray, count: np.ndarray, delta_log: np.ndarray,
               fallback_c: float = 0.1, fallback_b: float = 0.0,
               min_rows: int = 2, min_events: int = 2) -> GridSolution:
    """Solve every pixel at once; inputs are ``(n_rows, ...)`` stacks.

    Uses the closed-form 2x2 normal equations, with the same degeneracy
    rules as :func:`solve_pixel_ols`.
    """
    s = np.asarray(sum_sigma, dtype=float)
    n = np.asarray(count, dtype=float)
    z = np.asarray(delta_log, dtype=float)
    a = (s * s).sum(0)
    h = (s * n).sum(0)
    d = (n * n).sum(0)
    sz = (s * z).sum(0)
    nz = (n * z).sum(0)
    det = a * d - h * h
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (d * sz - h * nz) / det
        b = (a * nz - h * sz) / det

    reason = np.full(a.shape, OK, dtype=np.int8)
    reason[~((c > 0) & np.isfinite(c))] = NONPOSITIVE_C
    reason[(reason == OK) & ~(np.abs(b) < c)] = INVALID_BAND
    reason[_normal_cond(a, h, d) > MAX_COND] = RANK_DEFICIENT
    reason[(n > 0).sum(0) < min_rows] = TOO_FEW_ROWS
    reason[n.sum(0) < min_events] = TOO_FEW_EVENTS

    bad = reason != OK
    c = np.where(bad, fallback_c, c)
    b = np.where(bad, fallback_b, b)
    residual = np.sqrt(((s * c + n * b - z) ** 2).sum(0))
    return GridSolution(c, b, reason, residual)


def degenerate_lines(reason: np.ndarray) -> list[str]:
    """``"x y reason"`` lines for every degenerate pixel of a 2-D reason grid."""
    ys, xs = np.nonzero(reason != OK)
    return [f"{x} {y} {REASONS[int(reason[y, x])]}" for y, x in zip(ys.tolist(), xs.tolist())]
