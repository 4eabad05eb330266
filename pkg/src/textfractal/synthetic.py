"""Synthetic series and corpora with known statistical structure.

These are the inputs the test oracles are built around: white noise and AR(1)
for the linear checks, the deterministic binomial cascade for an exactly
known h(q), and a lognormal-volatility noise whose persistence lives only in
the magnitudes.
"""
from __future__ import annotations

import numpy as np

from .series import make_rng


def white_noise(T, seed):
    return make_rng(seed).standard_normal(T)


def ar1(T, phi, seed, burn_in=1000):
    eps = make_rng(seed).standard_normal(T + burn_in)
    out = np.empty_like(eps)
    out[0] = eps[0]
    for i in range(1, eps.size):
        out[i] = phi * out[i - 1] + eps[i]
    return out[burn_in:]


def binomial_cascade(n_levels, a=0.7):
    """Deterministic binomial multiplicative cascade of length 2**n_levels.

    Entry k (0-based) is a**n(k) * (1-a)**(n_levels - n(k)), with n(k) the
    number of 1 bits of k.
    """
    w = np.ones(1)
    for _ in range(n_levels):
        w = np.kron(w, [1.0 - a, a])
    return w


def cascade_hurst(q, a=0.7):
    """Generalized Hurst exponent of the binomial cascade (q != 0)."""
    q = np.asarray(q, dtype=float)
    return 1.0 / q - np.log(a ** q + (1 - a) ** q) / (q * np.log(2.0))


def cascade_tau(q, a=0.7):
    """tau(q) = q h(q) - 1 of the binomial cascade."""
    q = np.asarray(q, dtype=float)
    return -np.log(a ** q + (1 - a) ** q) / np.log(2.0)


def cascade_alpha(q, a=0.7):
    """Holder exponent alpha(q) = tau'(q) of the binomial cascade."""
    q = np.asarray(q, dtype=float)
    aq, bq = a ** q, (1 - a) ** q
    return -(aq * np.log(a) + bq * np.log(1 - a)) / ((aq + bq) * np.log(2.0))


def power_law_noise(T, exponent, seed):
    """Gaussian noise with spectral density ~ 1/f**exponent, unit variance."""
    rng = make_rng(seed)
    freqs = np.fft.rfftfreq(T)
    amp = np.zeros_like(freqs)
    amp[1:] = freqs[1:] ** (-exponent / 2.0)
    spec = amp * (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size))
    x = np.fft.irfft(spec, n=T)
    return (x - x.mean()) / x.std()


def volatility_noise(T, seed, log_vol_std=0.8, log_vol_exponent=1.0, tail_df=4.0):
    """Heavy-tailed noise with long-memory log-volatility.

    u_i = exp(w_i) * e_i where w is 1/f-type Gaussian noise and e_i are
    i.i.d. Student-t.  Signs are independent, so the series has a flat power
    spectrum; large and small magnitudes cluster, which makes h(q) > 1/2 for
    q < 2.
    """
    rng = make_rng(seed)
    w = log_vol_std * power_law_noise(T, log_vol_exponent, rng.integers(2 ** 63))
    e = rng.standard_t(tail_df, T)
    return np.exp(w) * e


def positive_persistent_series(T, seed, exponent=0.6, scale=12.0):
    """Integer-valued, heavy-tailed, linearly persistent series (SLV-like)."""
    g = power_law_noise(T, exponent, seed)
    return np.maximum(1, np.round(scale * np.exp(0.9 * g))).astype(int)


_WORDS = ("lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod "
          "tempor incididunt ut labore et dolore magna aliqua enim ad minim veniam "
          "quis nostrud exercitation ullamco laboris nisi aliquip ex ea commodo").split()


def synthetic_text(n_sentences, seed, end_marks=".!?", intra_marks=",;:",
                   mean_len=12.0, intra_prob=0.08):
    """Random prose with known sentence and inter-mark lengths.

    Returns ``(text, slv, pmdv)`` where ``slv``/``pmdv`` are the exact word
    counts used during generation.
    """
    rng = make_rng(seed)
    parts, slv, pmdv = [], [], []
    for _ in range(n_sentences):
        n = int(rng.geometric(1.0 / mean_len)) if mean_len > 1 else 1
        slv.append(n)
        run = 0
        words = []
        for j in range(n):
            words.append(_WORDS[int(rng.integers(len(_WORDS)))])
            run += 1
            if j < n - 1 and rng.random() < intra_prob:
                words[-1] += intra_marks[int(rng.integers(len(intra_marks)))]
                pmdv.append(run)
                run = 0
        pmdv.append(run)
        words[-1] += end_marks[int(rng.integers(len(end_marks)))]
        words[0] = words[0].capitalize()
        parts.append(" ".join(words))
    return " ".join(parts), slv, pmdv
