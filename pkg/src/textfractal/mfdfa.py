"""Multifractal detrended fluctuation analysis.

Pipeline: profile -> windowed polynomial detrending from both ends of the
series -> q-order fluctuation functions on a (q, s) grid -> log-log slopes
h(q) -> tau(q) and the singularity spectrum f(alpha).

The profile is the plain cumulative sum of the series; the mean is not
subtracted first, since detrending with m >= 1 absorbs the linear drift a
nonzero mean puts into the profile.

Window variances are evaluated from the increments rather than from the
global profile.  Inside a window the profile equals a constant plus the
window-local cumulative sum, and removing an order-(m-1) polynomial from the
increments before summing only changes the local profile by an order-m
polynomial, so the detrended residual is unchanged.  Doing it this way keeps
large trends (and the huge profile values they produce) out of the
least-squares step.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import (BadFitRange, DegenerateWindow, InvalidConfig, ScaleTooSmall,
                     SpectrumFoldedWarning)
from .series import as_array, polynomial_runs

# per-window tolerance below which a detrended residual counts as exactly zero
_ZERO_RESIDUAL = 64 * np.finfo(float).eps


def default_q_grid(q_max=7.0, step=0.25) -> np.ndarray:
    n = int(round(q_max / step))
    if not np.isclose(n * step, q_max):
        raise InvalidConfig(f"q_max={q_max} is not a multiple of step={step}")
    return np.arange(-n, n + 1) * step


def log_scale_grid(s_min, s_max, n=50) -> np.ndarray:
    """Up to ``n`` distinct log-spaced integer scales from s_min to s_max."""
    if s_max < s_min:
        raise InvalidConfig(f"s_max={s_max} < s_min={s_min}")
    raw = np.geomspace(s_min, s_max, n)
    return np.unique(np.round(raw).astype(int))


@dataclass(frozen=True)
class MfdfaConfig:
    """MFDFA settings.  ``None`` fields are filled from the series by :meth:`resolve`.

    ``scale_grid`` overrides ``s_min``/``s_max``/``n_scales``; ``fit_range`` is an
    inclusive ``(s_lo, s_hi)`` pair and defaults to the whole scale grid.
    """

    m: int = 2
    q_grid: Optional[tuple] = None
    scale_grid: Optional[tuple] = None
    n_scales: int = 50
    s_min: Optional[int] = None
    s_max: Optional[int] = None
    fit_range: Optional[tuple] = None

    def __post_init__(self):
        for name in ("q_grid", "scale_grid", "fit_range"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(float(v) for v in val) if name == "q_grid" else tuple(int(v) for v in val)
                object.__setattr__(self, name, val)

    @property
    def is_resolved(self):
        return self.q_grid is not None and self.scale_grid is not None and self.fit_range is not None

    def resolve(self, series=None, T=None, run_bound=None) -> "MfdfaConfig":
        """Fill in the defaults for a series (or for a length and run bound).

        The default s_min is above the longest stretch on which the series is
        a polynomial of degree m-1 (for m=2: constant runs and arithmetic
        progressions), plus one.  Shorter windows may hold an exactly
        order-m profile, whose zero variance breaks F_q for q <= 0.
        """
        if series is not None:
            u = as_array(series)
            T = u.size
            if run_bound is None:
                run_bound = polynomial_runs(u, self.m - 1)[0]
        if T is None:
            raise InvalidConfig("resolve() needs a series or a length")
        run_bound = run_bound or 0
        q = self.q_grid if self.q_grid is not None else tuple(default_q_grid())
        if self.scale_grid is not None:
            scales = tuple(sorted(set(self.scale_grid)))
        else:
            s_min = self.s_min if self.s_min is not None else max(2 * (self.m + 1), run_bound + 2)
            s_max = self.s_max if self.s_max is not None else T // 5
            if s_max < s_min:
                raise InvalidConfig(f"series too short: T={T} gives s_max={s_max} < s_min={s_min}")
            scales = tuple(log_scale_grid(s_min, s_max, self.n_scales).tolist())
        fit = self.fit_range if self.fit_range is not None else (scales[0], scales[-1])
        out = replace(self, q_grid=tuple(q), scale_grid=scales, fit_range=tuple(fit))
        out.validate(T)
        return out

    def validate(self, T):
        if self.m < 1:
            raise InvalidConfig("detrending order m must be >= 1")
        q = np.asarray(self.q_grid, dtype=float)
        if q.size < 3 or np.any(np.diff(q) <= 0):
            raise InvalidConfig("q grid must be strictly increasing with >= 3 points")
        if not np.allclose(q, -q[::-1], atol=1e-12) or not np.any(q == 0):
            raise InvalidConfig("q grid must be symmetric about 0 and contain 0")
        scales = np.asarray(self.scale_grid)
        if scales.min() <= self.m + 1:
            raise ScaleTooSmall(f"scale {scales.min()} <= m+1 = {self.m + 1}")
        if scales.max() > T / 5:
            raise InvalidConfig(f"largest scale {scales.max()} exceeds T/5 = {T / 5:g}")
        lo, hi = self.fit_range
        if lo > hi or lo < scales.min() or hi > scales.max():
            raise BadFitRange(f"fit range {self.fit_range} outside scale grid "
                              f"[{scales.min()}, {scales.max()}]")

    def to_dict(self):
        d = asdict(self)
        for k in ("q_grid", "scale_grid", "fit_range"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Profile:
    x: np.ndarray
    u: np.ndarray


def profile(s) -> Profile:
    """Cumulative sums ``x_i = u_1 + ... + u_i`` (no mean removal)."""
    u = as_array(s)
    if u.size < 1:
        raise ValueError("empty series")
    return Profile(x=np.cumsum(u), u=u)


@lru_cache(maxsize=512)
def _poly_basis(s, degree):
    """Orthonormal basis (s, degree+1) of polynomials on the points 1..s."""
    t = (np.arange(1, s + 1) - (s + 1) / 2.0) / (s / 2.0)
    vander = np.vander(t, degree + 1, increasing=True)
    q, _ = np.linalg.qr(vander)
    q.setflags(write=False)
    return q


def _detrended_variances(windows, m):
    s = windows.shape[1]
    low = _poly_basis(s, m - 1)
    r = windows - (windows @ low) @ low.T
    # the profile over the window is an exact order-m polynomial iff the s-1
    # increments after the first one follow a polynomial of degree m-1
    inner = windows[:, 1:]
    low1 = _poly_basis(s - 1, m - 1)
    r1 = inner - (inner @ low1) @ low1.T
    scale = np.abs(inner).max(axis=1)
    flat = np.abs(r1).max(axis=1) <= _ZERO_RESIDUAL * np.maximum(scale, np.finfo(float).tiny) * s
    y = np.cumsum(r, axis=1)
    full = _poly_basis(s, m)
    res = y - (y @ full) @ full.T
    var = np.mean(res * res, axis=1)
    var[flat] = 0.0
    return var


def window_variances(x, s, m=2) -> np.ndarray:
    """Detrended variances of the 2*M_s windows of length ``s``.

    ``x`` is a :class:`Profile` (or the raw profile array).  The first M_s
    entries tile the series from the left end, the last M_s from the right
    end, with M_s = floor(T/s).
    """
    s = int(s)
    if s <= m + 1:
        raise ScaleTooSmall(f"scale s={s} must exceed m+1={m + 1}")
    if isinstance(x, Profile):
        u = x.u
    else:
        xa = np.asarray(x, dtype=float)
        u = np.diff(xa, prepend=0.0)
    T = u.size
    M = T // s
    if M < 1:
        raise InvalidConfig(f"scale s={s} longer than series T={T}")
    left = u[:M * s].reshape(M, s)
    right = u[T - M * s:].reshape(M, s)
    return _detrended_variances(np.vstack([left, right]), m)


def _fluctuations(variances, q, scale=None):
    v = np.asarray(variances, dtype=float)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    n = v.size
    degenerate = np.any(v <= 0)
    if degenerate and np.any(q <= 0):
        raise DegenerateWindow(scale, float(q[q <= 0][-1]))
    with np.errstate(divide="ignore"):
        logs = np.log(v)
    out = np.empty(q.size)
    zero = q == 0
    out[zero] = np.exp(0.5 * logs.mean()) if zero.any() else 0.0
    nz = ~zero
    if nz.any():
        qq = q[nz]
        lse = logsumexp(np.outer(qq / 2.0, logs), axis=1)
        out[nz] = np.exp((lse - np.log(n)) / qq)
    return out


def fluctuation(variances, q, scale=None) -> float:
    """Order-q fluctuation function for one scale.

    Power mean of order q of the root variances; q=0 takes the geometric-mean
    limit.  Zero variances are only tolerated for q > 0.
    """
    return float(_fluctuations(variances, q, scale)[0])


@dataclass
class FluctuationMatrix:
    q: np.ndarray
    scales: np.ndarray
    F: np.ndarray            # shape (len(q), len(scales))
    window_counts: np.ndarray
    fit_range: tuple
    m: int = 2

    def rows(self):
        for j, s in enumerate(self.scales):
            for i, qv in enumerate(self.q):
                yield int(s), float(qv), float(self.F[i, j]), int(self.window_counts[j])


def _scale_row(u, s, m, q):
    v = window_variances(Profile(x=None, u=u), s, m)
    return _fluctuations(v, q, scale=int(s)), v.size // 2


def compute_grid(s, cfg: MfdfaConfig = None, threads=1) -> FluctuationMatrix:
    """F_q(s) over the whole (q, s) grid.

    Scales are evaluated independently (optionally in a thread pool), each
    with a fixed summation order, so the result does not depend on
    ``threads``.
    """
    u = as_array(s)
    cfg = (cfg or MfdfaConfig())
    if not cfg.is_resolved:
        cfg = cfg.resolve(u)
    else:
        cfg.validate(u.size)
    q = np.asarray(cfg.q_grid, dtype=float)
    scales = np.asarray(cfg.scale_grid, dtype=int)

    def job(sc):
        return _scale_row(u, sc, cfg.m, q)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, scales))
    else:
        results = [job(sc) for sc in scales]
    F = np.column_stack([r[0] for r in results])
    counts = np.array([r[1] for r in results], dtype=int)
    return FluctuationMatrix(q=q, scales=scales, F=F, window_counts=counts,
                             fit_range=tuple(cfg.fit_range), m=cfg.m)


@dataclass
class HurstFunction:
    q: np.ndarray
    h: np.ndarray
    r2: np.ndarray
    intercept: np.ndarray
    fit_range: tuple
    n_scales_fit: int

    @property
    def H(self) -> float:
        """Classical Hurst exponent h(2) (interpolated if 2 is off-grid)."""
        return float(np.interp(2.0, self.q, self.h))

    @property
    def delta_h(self) -> float:
        """h(q_min) - h(q_max); nonnegative for the usual decreasing h(q)."""
        return float(self.h[0] - self.h[-1])

    def restrict(self, q_range) -> "HurstFunction":
        lo, hi = q_range
        keep = (self.q >= lo - 1e-12) & (self.q <= hi + 1e-12)
        return HurstFunction(self.q[keep], self.h[keep], self.r2[keep],
                             self.intercept[keep], self.fit_range, self.n_scales_fit)


def fit_hurst(F: FluctuationMatrix, fit_range=None) -> HurstFunction:
    """Least-squares slopes of log F_q(s) against log s inside ``fit_range``."""
    scales = np.asarray(F.scales)
    lo, hi = fit_range if fit_range is not None else F.fit_range
    if lo > hi or lo < scales.min() or hi > scales.max():
        raise BadFitRange(f"fit range ({lo}, {hi}) outside scale grid "
                          f"[{scales.min()}, {scales.max()}]")
    sel = (scales >= lo) & (scales <= hi)
    if sel.sum() < 5:
        raise BadFitRange(f"fit range ({lo}, {hi}) holds {sel.sum()} scales, need >= 5")
    x = np.log(scales[sel].astype(float))
    with np.errstate(divide="ignore"):
        Y = np.log(F.F[:, sel])
    if not np.all(np.isfinite(Y)):
        raise BadFitRange("non-positive fluctuation values inside the fit range")
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, Y.T, rcond=None)
    slope, icpt = coef
    pred = A @ coef
    ss_res = ((Y.T - pred) ** 2).sum(axis=0)
    ss_tot = ((Y.T - Y.T.mean(axis=0)) ** 2).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / ss_tot, 1.0)
    return HurstFunction(q=np.asarray(F.q, dtype=float), h=slope, r2=r2, intercept=icpt,
                         fit_range=(int(lo), int(hi)), n_scales_fit=int(sel.sum()))


@dataclass
class TauSpectrum:
    q: np.ndarray
    tau: np.ndarray
    chord_deviation: float     # max |tau - straight line through the end points|


def tau_spectrum(h: HurstFunction) -> TauSpectrum:
    """tau(q) = q h(q) - 1, plus how far it bends away from its chord."""
    q = np.asarray(h.q, dtype=float)
    tau = q * h.h - 1.0
    chord = tau[0] + (tau[-1] - tau[0]) * (q - q[0]) / (q[-1] - q[0])
    return TauSpectrum(q=q, tau=tau, chord_deviation=float(np.abs(tau - chord).max()))


@dataclass
class MultifractalSpectrum:
    q: np.ndarray
    h: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    delta_alpha: float
    A_alpha: float
    alpha_0: float
    alpha_min: float
    alpha_max: float
    folded: bool = False

    def summary(self):
        return {"delta_alpha": self.delta_alpha, "A_alpha": self.A_alpha,
                "alpha_0": self.alpha_0, "alpha_min": self.alpha_min,
                "alpha_max": self.alpha_max, "f_max": float(self.f_alpha.max()),
                "folded": self.folded}


def singularity_spectrum(h: HurstFunction, q_range=None, fold_tol=1e-3) -> MultifractalSpectrum:
    """Legendre transform of h(q) by finite differences.

    alpha = h + q h'(q) and f = q (alpha - h) + 1 with h' from central
    differences (one-sided at the grid ends).  With ``q_range`` the
    derivatives are still taken on the full grid and the result is then
    restricted, so spectra for nested q ranges are nested point sets.
    """
    q = np.asarray(h.q, dtype=float)
    if q.size < 3:
        raise InvalidConfig("need at least 3 q values for a spectrum")
    if np.max(np.diff(q)) > 0.5 + 1e-12:
        warnings.warn("q grid step above 0.5; h'(q) may be inaccurate", RuntimeWarning)
    dh = np.gradient(h.h, q)
    alpha = h.h + q * dh
    f = q * (alpha - h.h) + 1.0
    tau = q * h.h - 1.0
    if q_range is not None:
        lo, hi = q_range
        keep = (q >= lo - 1e-12) & (q <= hi + 1e-12)
        q, hh, alpha, f, tau = q[keep], h.h[keep], alpha[keep], f[keep], tau[keep]
    else:
        hh = h.h
    a_min, a_max = float(alpha.min()), float(alpha.max())
    alpha_0 = float(alpha[int(np.argmax(f))])
    left, right = alpha_0 - a_min, a_max - alpha_0
    A = (left - right) / (left + right) if left + right > 0 else 0.0
    folded = bool(np.any(np.diff(alpha) > fold_tol))
    if folded:
        warnings.warn("alpha(q) is not monotone in q; the spectrum folds back",
                      SpectrumFoldedWarning)
    return MultifractalSpectrum(q=q, h=hh, tau=tau, alpha=alpha, f_alpha=f,
                                delta_alpha=a_max - a_min, A_alpha=float(A),
                                alpha_0=alpha_0, alpha_min=a_min, alpha_max=a_max,
                                folded=folded)


@dataclass
class MfdfaResult:
    config: MfdfaConfig
    fluct: FluctuationMatrix
    hurst: HurstFunction
    tau: TauSpectrum
    spectrum: MultifractalSpectrum

    def summary(self):
        out = {"H": self.hurst.H, "delta_h": self.hurst.delta_h,
               "tau_chord_deviation": self.tau.chord_deviation,
               "fit_range": list(self.hurst.fit_range)}
        out.update(self.spectrum.summary())
        return out


def analyze_fluctuations(F: FluctuationMatrix, cfg: MfdfaConfig, fit_range=None) -> MfdfaResult:
    hurst = fit_hurst(F, fit_range)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectrumFoldedWarning)
        spec = singularity_spectrum(hurst)
    return MfdfaResult(cfg, F, hurst, tau_spectrum(hurst), spec)


def mfdfa(s, cfg: MfdfaConfig = None, threads=1) -> MfdfaResult:
    """Run the whole pipeline on one series."""
    u = as_array(s)
    cfg = cfg or MfdfaConfig()
    if not cfg.is_resolved:
        cfg = cfg.resolve(u)
    F = compute_grid(u, cfg, threads=threads)
    return analyze_fluctuations(F, cfg)
