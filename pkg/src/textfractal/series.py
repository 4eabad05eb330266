"""Series containers, chapter-order permutations and surrogate generators.

All randomness goes through :func:`numpy.random.default_rng`, i.e. the PCG64
bit generator seeded with a single unsigned 64-bit integer.  PCG64 streams are
stable across numpy releases, so a seed written to a result file replays the
same draws anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidPermutation, PermutationSizeMismatch

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TimeSeries:
    """An ordered series of observations with a free-form label."""

    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise ValueError("a time series must be one-dimensional")
        if values.size < 1:
            raise ValueError("a time series needs at least one value")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.T

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def as_array(s, dtype=float) -> np.ndarray:
    """Return the values of a TimeSeries or array-like as a 1-D array."""
    if isinstance(s, TimeSeries):
        s = s.values
    arr = np.asarray(s, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    return arr


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(int(seed) & SEED_MASK)


def derive_seed(seed, index) -> int:
    """Seed for parallel worker ``index``: ``seed + index`` modulo 2**64."""
    return (int(seed) + int(index)) & SEED_MASK


def polynomial_runs(values, degree=0):
    """Longest, leading and trailing runs on which ``values`` follow a
    polynomial of ``degree`` (degree 0: constant runs, 1: arithmetic
    progressions).  Any ``degree + 1`` consecutive points qualify.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n <= degree + 1:
        return n, n, n
    d = np.diff(v, degree + 1)
    tol = 64 * np.finfo(float).eps * max(np.abs(v).max(), np.finfo(float).tiny) * 2 ** (degree + 1)
    ok = np.abs(d) <= tol
    if not ok.any():
        return degree + 1, degree + 1, degree + 1
    edges = np.flatnonzero(np.diff(np.concatenate(([0], ok.astype(np.int8), [0]))))
    lengths = edges[1::2] - edges[::2]
    longest = int(lengths.max()) + degree + 1
    lead = int(lengths[0]) + degree + 1 if ok[0] else degree + 1
    trail = int(lengths[-1]) + degree + 1 if ok[-1] else degree + 1
    return longest, lead, trail


def longest_constant_run(values) -> int:
    v = np.asarray(values)
    if v.size == 0:
        return 0
    return polynomial_runs(v, 0)[0]


@dataclass(frozen=True)
class Permutation:
    """A chapter order as 1-based chapter indices.

    With ``allow_repeats`` the order may be any sequence of valid indices,
    which covers reading orders that revisit chapters.
    """

    order: tuple
    n: int
    allow_repeats: bool = False

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, "order", order)
        if self.n < 1:
            raise InvalidPermutation("n must be >= 1")
        if not order:
            raise InvalidPermutation("empty chapter order")
        bad = [i for i in order if not 1 <= i <= self.n]
        if bad:
            raise InvalidPermutation(f"chapter indices out of range 1..{self.n}: {bad[:5]}")
        if not self.allow_repeats and sorted(order) != list(range(1, self.n + 1)):
            raise InvalidPermutation(f"order is not a bijection on 1..{self.n}")

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(1, n + 1)), n)

    @classmethod
    def reversal(cls, n):
        return cls(tuple(range(n, 0, -1)), n)

    def inverse(self) -> "Permutation":
        if self.allow_repeats:
            raise InvalidPermutation("a sequence with repeats has no inverse")
        inv = [0] * self.n
        for pos, idx in enumerate(self.order, start=1):
            inv[idx - 1] = pos
        return Permutation(tuple(inv), self.n)

    def __len__(self):
        return len(self.order)


def read_permutation(path, n=None, allow_repeats=False) -> Permutation:
    """Read a permutation file: one 1-based chapter index per line.

    Blank lines and ``#`` comments are ignored.  ``n`` defaults to the number
    of indices in the file (only meaningful for bijections).
    """
    order = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            order.append(int(line))
        except ValueError:
            raise InvalidPermutation(f"{path}:{lineno}: not an integer: {raw!r}") from None
    if n is None:
        n = max(order) if allow_repeats and order else len(order)
    return Permutation(tuple(order), n, allow_repeats=allow_repeats)


def write_permutation(perm: Permutation, path):
    Path(path).write_text("".join(f"{i}\n" for i in perm.order), encoding="utf-8")


def concat_in_order(corpus, perm: Permutation) -> TimeSeries:
    """Concatenate per-chapter sentence-length sequences in ``perm`` order."""
    chapters = corpus.chapters
    if perm.n != len(chapters):
        raise PermutationSizeMismatch(
            f"permutation over {perm.n} chapters, corpus has {len(chapters)}")
    values = np.concatenate([np.asarray(chapters[i - 1]) for i in perm.order])
    return TimeSeries(values, label=getattr(corpus, "name", ""),
                      meta={"order": list(perm.order)})


def random_permutation(n: int, seed) -> Permutation:
    """Uniform random permutation of ``n`` chapters, deterministic per seed."""
    if n < 1:
        raise InvalidPermutation("n must be >= 1")
    order = make_rng(seed).permutation(n) + 1
    return Permutation(tuple(order.tolist()), n)


def shuffle_sentences(s, seed) -> TimeSeries:
    """Sentence-level shuffle: same histogram, memory destroyed."""
    values = as_array(s, dtype=None)
    if values.size < 2:
        raise ValueError("shuffling needs T >= 2")
    out = make_rng(seed).permutation(values)
    label = s.label if isinstance(s, TimeSeries) else ""
    return TimeSeries(out, label=label, meta={"surrogate": "shuffle", "seed": int(seed)})


def fourier_phase_surrogate(s, seed) -> TimeSeries:
    """Random-phase surrogate with the amplitude spectrum of ``s``.

    The zero-frequency term keeps its phase, so the mean is preserved, and
    for even T the Nyquist term stays real.  Independent phases are drawn
    for bins ``1 .. ceil(T/2) - 1``.
    """
    u = as_array(s)
    T = u.size
    if T < 4:
        raise ValueError("Fourier surrogates need T >= 4")
    spec = np.fft.rfft(u)
    n_free = (T - 1) // 2
    phases = make_rng(seed).uniform(0.0, 2.0 * np.pi, n_free)
    out = spec.copy()
    out[1:1 + n_free] = np.abs(spec[1:1 + n_free]) * np.exp(1j * phases)
    surrogate = np.fft.irfft(out, n=T)
    label = s.label if isinstance(s, TimeSeries) else ""
    return TimeSeries(surrogate, label=label, meta={"surrogate": "fourier", "seed": int(seed)})
