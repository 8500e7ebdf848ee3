"""RMSE, PSNR and SSIM on 8-bit-range grayscale images."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate2d

PSNR_CAP = 100.0
PEAK = 255.0
SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1, SSIM_K2 = 0.01, 0.03


def _values(a) -> np.ndarray:
    return np.asarray(getattr(a, "values", a), dtype=float)


def _pair(a, b):
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise ValueError(f"resolution mismatch: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(a, b) -> float:
    """Standard 8-bit PSNR in dB, capped at 100 dB for identical images."""
    e = rmse(a, b)
    if e == 0:
        return PSNR_CAP
    return min(PSNR_CAP, 20.0 * math.log10(PEAK / e))


def gaussian_window(size: int = SSIM_WIN, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a, b) -> float:
    """Single-scale SSIM, Gaussian 11x11 window, mean over fully covered positions."""
    a, b = _pair(a, b)
    if a.ndim != 2 or min(a.shape) < SSIM_WIN:
        raise ValueError(f"SSIM needs 2-D images at least {SSIM_WIN}x{SSIM_WIN}, got {a.shape}")
    w = gaussian_window()
    C1 = (SSIM_K1 * PEAK) ** 2
    C2 = (SSIM_K2 * PEAK) ** 2

    def filt(x):
        return correlate2d(x, w, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    saa = filt(a * a) - mu_a ** 2
    sbb = filt(b * b) - mu_b ** 2
    sab = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + C1) * (2 * sab + C2)
    den = (mu_a ** 2 + mu_b ** 2 + C1) * (saa + sbb + C2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    psnr: float
    ssim: float

    def line(self, index) -> str:
        return f"{index} {self.rmse:.6f} {self.psnr:.6f} {self.ssim:.6f}"


def compare(a, b) -> MetricReport:
    return MetricReport(rmse(a, b), psnr(a, b), ssim(a, b))
