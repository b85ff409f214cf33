"""Restoration quality metrics: RMSE, PSNR, MAD, BIAS, SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

# Canonical single-scale SSIM constants: 11x11 Gaussian window with
# sigma 1.5, stabilizers K1=0.01 and K2=0.03 relative to the peak.
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    psnr_db: float
    mad: float
    bias: float
    ssim: float


def _pair(x, x_hat):
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    return x, x_hat


def rmse(x, x_hat) -> float:
    """Root mean squared error, ||x - x_hat||_2 / sqrt(N)."""
    x, x_hat = _pair(x, x_hat)
    return float(np.linalg.norm(x - x_hat) / math.sqrt(x.size))


def psnr(rmse_value: float, peak: float) -> float:
    """20 log10(peak / RMSE), +inf when the error is zero."""
    if rmse_value < 0:
        raise ValueError("rmse must be nonnegative")
    if rmse_value == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / rmse_value)


def mad(x, x_hat) -> float:
    """Mean absolute deviation, ||x - x_hat||_1 / N."""
    x, x_hat = _pair(x, x_hat)
    return float(np.abs(x - x_hat).sum() / x.size)


def bias(x, x_hat) -> float:
    """Raw signed error sum, sum_i (x_i - x_hat_i)."""
    x, x_hat = _pair(x, x_hat)
    return float((x - x_hat).sum())


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()


def ssim(x, x_hat, peak: float) -> float:
    """Mean single-scale structural similarity over valid window positions.

    Gaussian-weighted local moments on an 11x11 window (sigma 1.5); no
    padding, so signals must be at least 11x11.
    """
    x, x_hat = _pair(x, x_hat)
    if x.ndim != 2:
        raise ValueError(f"ssim expects 2-D signals, got {x.ndim}-D")
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"signal {x.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2

    def smooth(img):
        return fftconvolve(img, win, mode="valid")

    mu_x = smooth(x)
    mu_y = smooth(x_hat)
    # Weighted (biased) second moments.
    var_x = smooth(x * x) - mu_x**2
    var_y = smooth(x_hat * x_hat) - mu_y**2
    cov = smooth(x * x_hat) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim_or_none(x, x_hat, peak: float):
    """SSIM when defined for the signal shape: 2-D directly, 3-D as the
    mean over leading-axis frames, None otherwise (audio, tiny images)."""
    x = np.asarray(x)
    try:
        if x.ndim == 2:
            return ssim(x, x_hat, peak)
        if x.ndim == 3:
            return float(np.mean([ssim(a, b, peak) for a, b in zip(x, np.asarray(x_hat))]))
    except ValueError:
        return None
    return None


def report(x, x_hat, peak: float) -> MetricReport:
    """All metrics at once; SSIM is nan where undefined."""
    r = rmse(x, x_hat)
    s = ssim_or_none(x, x_hat, peak)
    return MetricReport(
        rmse=r,
        psnr_db=psnr(r, peak),
        mad=mad(x, x_hat),
        bias=bias(x, x_hat),
        ssim=math.nan if s is None else s,
    )
