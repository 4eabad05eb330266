"""Pearson autocorrelation with a white-noise significance band."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroVariance
from .series import as_array


@dataclass
class AcfResult:
    lags: np.ndarray
    rho: np.ndarray
    noise_level: float
    T: int

    def fraction_below_noise(self, lo=1, hi=None):
        sel = (self.lags >= lo) & (self.lags <= (hi if hi is not None else self.lags[-1]))
        return float(np.mean(np.abs(self.rho[sel]) < self.noise_level))

    def loglog(self):
        """(log10 lag, log10 rho) for the lags where rho > 0."""
        keep = (self.rho > 0) & (self.lags > 0)
        return np.log10(self.lags[keep]), np.log10(self.rho[keep])


def noise_level(T) -> float:
    """Two-sided 95% band of the sample ACF of white noise, 1.96/sqrt(T)."""
    if T < 2:
        raise ValueError("T must be >= 2")
    return 1.96 / np.sqrt(T)


def acf(s, max_lag) -> AcfResult:
    """rho(k) for k = 0..max_lag with the full-series variance as denominator."""
    u = as_array(s)
    T = u.size
    max_lag = int(max_lag)
    if not 1 <= max_lag < T / 2:
        raise ValueError(f"max_lag must satisfy 1 <= max_lag < T/2 (T={T})")
    z = u - u.mean()
    denom = float(z @ z)
    if denom <= 0.0 or np.ptp(u) == 0:
        raise ZeroVariance("autocorrelation of a constant series is undefined")
    n = 1 << int(np.ceil(np.log2(2 * T)))
    spec = np.fft.rfft(z, n)
    full = np.fft.irfft(spec * np.conj(spec), n)[:max_lag + 1]
    rho = np.clip(full / denom, -1.0, 1.0)
    rho[0] = 1.0
    return AcfResult(lags=np.arange(max_lag + 1), rho=rho, noise_level=noise_level(T), T=T)
