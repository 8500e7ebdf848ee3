"""Event-only offline calibration from cumulative polarity statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CalibrationMap, EventStream
from .offei import CalibrationReport
from .ols import INVALID_BAND, OK, TOO_FEW_EVENTS


@dataclass(frozen=True)
class OffEConfig:
    min_events: int = 10
    fallback_c: float = 0.1
    fallback_b: float = 0.0
    r_floor: float = 1e-6
    # multiplies every recovered c and b; 1.0 leaves the median pixel at c = 1
    c_scale: float = 1.0

    def __post_init__(self):
        if self.min_events < 2:
            raise ValueError(f"min_events must be >= 2, got {self.min_events}")
        if not self.r_floor > 0:
            raise ValueError("r_floor must be positive")
        if not self.fallback_c > 0 or not self.c_scale > 0:
            raise ValueError("fallback_c and c_scale must be positive")


def cumulative_fit(stream: EventStream):
    """Per pixel, fit ``S_j = m * j + d`` through the cumulative polarity sums.

    Returns ``(m, intercept, rms_residual, n_events)`` as flat arrays over
    pixels; pixels with fewer than two events get NaN fit values.
    """
    npix = stream.width * stream.height
    pix = stream.pixel_index
    order = np.argsort(pix, kind="stable")  # keeps time order within a pixel
    pix_s = pix[order]
    p_s = stream.p[order].astype(float)
    counts = np.bincount(pix_s, minlength=npix)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    pos = np.arange(len(pix_s)) - starts[pix_s]
    n_j = (pos + 1).astype(float)
    csum = np.cumsum(p_s)
    offset = np.concatenate(([0.0], csum))[starts]
    S_j = csum - offset[pix_s]

    N = counts.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_n = np.bincount(pix_s, weights=n_j, minlength=npix) / N
        mean_S = np.bincount(pix_s, weights=S_j, minlength=npix) / N
        dn = n_j - mean_n[pix_s]
        dS = S_j - mean_S[pix_s]
        sxx = np.bincount(pix_s, weights=dn * dn, minlength=npix)
        sxy = np.bincount(pix_s, weights=dn * dS, minlength=npix)
        m = sxy / sxx
        intercept = mean_S - m * mean_n
        res = S_j - (m[pix_s] * n_j + intercept[pix_s])
        rms = np.sqrt(np.bincount(pix_s, weights=res * res, minlength=npix) / N)
    few = counts < 2
    m[few] = intercept[few] = rms[few] = np.nan
    return m, intercept, rms, counts


def calibrate_offe(stream: EventStream, cfg: OffEConfig = OffEConfig()):
    """Bias from the slope of cumulative polarity against event count,
    threshold from the residual spread, normalised by its median across pixels."""
    m, _, rms, counts = cumulative_fit(stream)
    shape = stream.shape
    reason = np.where(counts < cfg.min_events, TOO_FEW_EVENTS, OK).astype(np.int8)
    valid = reason == OK
    if not valid.any():
        raise ValueError(f"no pixel has at least {cfg.min_events} events; OffE cannot form a median")
    r = np.maximum(np.where(valid, rms, np.nan), cfg.r_floor)
    floored = valid & (rms < cfg.r_floor)
    r_med = float(np.median(r[valid]))
    c_raw = cfg.c_scale * r_med / r
    b_raw = -c_raw * m
    # an all-same-polarity pixel has |m| = 1, i.e. |b| = c: not a valid band
    inverted = valid & ~(np.abs(b_raw) < c_raw)
    reason[inverted] = INVALID_BAND
    ok = reason == OK
    c = np.where(ok, c_raw, cfg.fallback_c).reshape(shape)
    b = np.where(ok, b_raw, cfg.fallback_b).reshape(shape)
    raw = {"c": c_raw.reshape(shape), "b": b_raw.reshape(shape), "m": m.reshape(shape),
           "r": r.reshape(shape)}
    report = CalibrationReport(
        reason.reshape(shape), np.where(valid, rms, np.nan).reshape(shape),
        extra={"median_residual": repr(r_med), "floored_residuals": int(floored.sum())},
        arrays=raw)
    return CalibrationMap(c, b), report
