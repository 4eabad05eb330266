"""Discrete Weibull distribution: evaluation, sampling and least-squares fits.

The distribution of the number of words k = 0, 1, 2, ... until the next mark
has survival function (1-p)**(k**beta); beta = 1 is the geometric law, beta > 1
gives a hazard that grows with k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitFailed, InvalidParams
from .series import TimeSeries, as_array, make_rng

P_GRID = np.round(np.arange(0.05, 0.951, 0.05), 10)
BETA_GRID = np.round(np.arange(0.25, 4.001, 0.25), 10)
_P_BOUNDS = (1e-9, 1.0 - 1e-9)
_BETA_BOUNDS = (1e-3, 50.0)


@dataclass(frozen=True)
class WeibullParams:
    p: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0) or not math.isfinite(self.p):
            raise InvalidParams(f"p must lie in (0, 1), got {self.p}")
        if not (self.beta > 0.0) or not math.isfinite(self.beta):
            raise InvalidParams(f"beta must be positive, got {self.beta}")


def _params(params, beta=None):
    if isinstance(params, WeibullParams):
        return params
    if beta is not None:
        return WeibullParams(float(params), float(beta))
    return WeibullParams(*map(float, params))


def _log_survival(k, p, beta):
    # ln (1-p)^(k^beta), written to stay finite for huge k
    k = np.asarray(k, dtype=float)
    return np.power(k, beta) * math.log1p(-p)


def _check_k(k):
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("k must be nonnegative")
    return k


def pmf(k, params, beta=None):
    """P(X = k) = (1-p)**(k**beta) - (1-p)**((k+1)**beta)."""
    prm = _params(params, beta)
    k = _check_k(k)
    a = _log_survival(k, prm.p, prm.beta)
    b = _log_survival(k + 1, prm.p, prm.beta)
    out = -np.exp(a) * np.expm1(b - a)
    return float(out) if out.ndim == 0 else out


def cdf(k, params, beta=None):
    """F(k) = 1 - (1-p)**(k**beta) = P(X < k)."""
    prm = _params(params, beta)
    k = _check_k(k)
    out = -np.expm1(_log_survival(k, prm.p, prm.beta))
    return float(out) if out.ndim == 0 else out


def hazard(k, params, beta=None):
    """pmf(k) / (1 - cdf(k)): chance the mark comes right after word k."""
    prm = _params(params, beta)
    k = _check_k(k)
    d = _log_survival(k + 1, prm.p, prm.beta) - _log_survival(k, prm.p, prm.beta)
    out = -np.expm1(d)
    return float(out) if out.ndim == 0 else out


def sample(params, n, seed, beta=None) -> TimeSeries:
    """Draw ``n`` values by inverting the survival function.

    With V uniform on (0, 1], X = floor((ln V / ln(1-p))**(1/beta)) satisfies
    X^beta <= ln V / ln(1-p) < (X+1)^beta, i.e. F(X) <= 1 - V < F(X+1).
    """
    prm = _params(params, beta)
    if n < 1:
        raise ValueError("n must be >= 1")
    v = 1.0 - make_rng(seed).random(int(n))
    x = np.floor(np.power(np.log(v) / math.log1p(-prm.p), 1.0 / prm.beta))
    return TimeSeries(x.astype(np.int64), label=f"weibull(p={prm.p:g}, beta={prm.beta:g})",
                      meta={"seed": int(seed)})


@dataclass(frozen=True)
class Histogram:
    """Counts on integer bins ``k``.  ``total`` normalizes the frequencies."""

    k: np.ndarray
    counts: np.ndarray
    total: float

    @classmethod
    def from_series(cls, s):
        vals = as_array(s, dtype=None)
        if vals.size == 0:
            raise ValueError("empty series")
        if not np.all(np.equal(np.mod(vals, 1), 0)) or np.any(vals < 0):
            raise ValueError("histograms need nonnegative integer values")
        vals = vals.astype(np.int64)
        counts = np.bincount(vals)
        return cls(np.arange(counts.size), counts, float(vals.size))

    @classmethod
    def from_frequencies(cls, freqs, k=None):
        freqs = np.asarray(freqs, dtype=float)
        k = np.arange(freqs.size) if k is None else np.asarray(k)
        return cls(k, freqs, 1.0)

    @property
    def frequencies(self):
        return np.asarray(self.counts, dtype=float) / self.total

    def rows(self):
        for k, c, f in zip(self.k, self.counts, self.frequencies):
            yield int(k), c, float(f)


@dataclass(frozen=True)
class WeibullFit:
    params: WeibullParams
    sse: float
    n_bins_used: int
    weighting: str = "linear"

    def to_dict(self):
        return {"p": self.params.p, "beta": self.params.beta, "sse": self.sse,
                "bins_used": self.n_bins_used, "weighting": self.weighting}


def _residuals(theta, k, freq, log_space):
    p, beta = theta
    model = pmf(k, WeibullParams(p, beta))
    if log_space:
        return np.log(np.maximum(model, 1e-300)) - np.log(freq)
    return model - freq


def fit(hist: Histogram, include_zero=True, weighting="linear") -> WeibullFit:
    """Least-squares fit of the pmf to the histogram frequencies.

    Residuals are taken over populated bins only.  The start point is the
    best node of a (p, beta) grid (ties broken by smaller p, then beta) and
    is refined with a bounded trust-region least-squares solve.
    ``weighting="log"`` fits log-frequencies, which weights the tail.
    """
    if weighting not in ("linear", "log"):
        raise ValueError("weighting must be 'linear' or 'log'")
    log_space = weighting == "log"
    k = np.asarray(hist.k)
    freq = hist.frequencies
    use = np.asarray(hist.counts) > 0
    if not include_zero:
        use &= k > 0
    k, freq = k[use], freq[use]
    if k.size < 3:
        raise FitFailed(f"need >= 3 populated bins to fit two parameters, got {k.size}")

    best = None
    for p0 in P_GRID:
        for b0 in BETA_GRID:
            r = _residuals((p0, b0), k, freq, log_space)
            sse = float(r @ r)
            if np.isfinite(sse) and (best is None or sse < best[0]):
                best = (sse, p0, b0)
    if best is None:
        raise FitFailed("no finite residual on the seeding grid")

    sol = least_squares(_residuals, x0=[best[1], best[2]], args=(k, freq, log_space),
                        bounds=([_P_BOUNDS[0], _BETA_BOUNDS[0]], [_P_BOUNDS[1], _BETA_BOUNDS[1]]),
                        method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    p, beta = (float(v) for v in sol.x)
    r = _residuals((p, beta), k, freq, log_space)
    sse = float(r @ r)
    if not np.isfinite(sse):
        raise FitFailed(f"fit diverged: {sol.message}")
    if sse > best[0]:
        p, beta, sse = float(best[1]), float(best[2]), best[0]
    return WeibullFit(WeibullParams(p, beta), sse, int(k.size), weighting)


def fit_series(s, include_zero=False, weighting="linear") -> WeibullFit:
    """Fit inter-mark distances; the k=0 bin is left out by default."""
    return fit(Histogram.from_series(s), include_zero=include_zero, weighting=weighting)


def ks_distance(s, params, beta=None) -> float:
    """Kolmogorov-Smirnov distance between a sample and the discrete CDF."""
    prm = _params(params, beta)
    vals = as_array(s, dtype=None).astype(np.int64)
    counts = np.bincount(vals)
    k = np.arange(counts.size + 1)
    emp = np.concatenate(([0.0], np.cumsum(counts) / vals.size))  # P(X < k)
    return float(np.abs(emp - cdf(k, prm)).max())
