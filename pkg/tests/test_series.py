import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textfractal.acf import acf
from textfractal.errors import InvalidPermutation, PermutationSizeMismatch
from textfractal.ingest import ChapterizedCorpus
from textfractal.series import (Permutation, TimeSeries, concat_in_order, derive_seed,
                                fourier_phase_surrogate, longest_constant_run,
                                random_permutation, read_permutation, shuffle_sentences,
                                write_permutation)
from textfractal.synthetic import ar1


def toy():
    return ChapterizedCorpus([[3, 2], [7]], ["1", "2"])


def test_concat_examples():
    c = toy()
    assert concat_in_order(c, Permutation.identity(2)).values.tolist() == [3, 2, 7]
    assert concat_in_order(c, Permutation((2, 1), 2)).values.tolist() == [7, 3, 2]
    with pytest.raises(PermutationSizeMismatch):
        concat_in_order(c, Permutation.identity(3))


def test_permutation_validation():
    with pytest.raises(InvalidPermutation):
        Permutation((1, 1), 2)
    with pytest.raises(InvalidPermutation):
        Permutation((0, 1), 2)
    rep = Permutation((1, 2, 1), 2, allow_repeats=True)
    assert concat_in_order(toy(), rep).values.tolist() == [3, 2, 7, 3, 2]
    p = Permutation((3, 1, 2), 3)
    assert p.inverse().order == (2, 3, 1)
    assert Permutation.reversal(3).order == (3, 2, 1)


def test_permutation_file_roundtrip(tmp_path):
    p = random_permutation(20, seed=4)
    write_permutation(p, tmp_path / "p.txt")
    assert read_permutation(tmp_path / "p.txt") == p
    (tmp_path / "bad.txt").write_text("1\nx\n")
    with pytest.raises(InvalidPermutation):
        read_permutation(tmp_path / "bad.txt")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(1, 50), min_size=1, max_size=8), min_size=1, max_size=10),
       st.integers(0, 2**32))
def test_concat_preserves_multiset(chapters, seed):
    corpus = ChapterizedCorpus(chapters, [str(i) for i in range(len(chapters))])
    perm = random_permutation(len(chapters), seed)
    out = concat_in_order(corpus, perm).values
    assert sorted(out.tolist()) == sorted(v for ch in chapters for v in ch)


def test_random_permutation_basics():
    assert random_permutation(1, 9).order == (1,)
    assert random_permutation(50, 3) == random_permutation(50, 3)
    assert random_permutation(50, 3) != random_permutation(50, 4)


def test_random_permutation_uniform():
    counts = {p: 0 for p in itertools.permutations((1, 2, 3))}
    n = 60000
    for i in range(n):
        counts[random_permutation(3, derive_seed(123, i)).order] += 1
    freqs = np.array(list(counts.values())) / n
    assert np.all(np.abs(freqs - 1 / 6) < 0.01)
    chi2 = ((np.array(list(counts.values())) - n / 6) ** 2 / (n / 6)).sum()
    assert chi2 < 20.5  # chi-square, 5 dof, p = 0.001


def test_derive_seed_wraps():
    assert derive_seed(2**64 - 1, 1) == 0
    assert derive_seed(7, 3) == 10


def test_shuffle():
    assert shuffle_sentences(TimeSeries([5, 5, 5]), 1).values.tolist() == [5, 5, 5]
    x = ar1(5000, 0.6, seed=2)
    y = shuffle_sentences(x, 8).values
    assert np.array_equal(np.sort(x), np.sort(y))
    assert np.array_equal(y, shuffle_sentences(x, 8).values)
    slv = np.maximum(1, np.round(12 + 8 * ar1(2**14, 0.6, seed=3))).astype(int)
    r = acf(shuffle_sentences(slv, 5), 100)
    assert r.fraction_below_noise(1, 100) >= 0.9


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 400), st.integers(0, 2**32))
def test_fourier_surrogate_properties(T, seed):
    u = np.random.default_rng(seed).standard_normal(T) * 3 + 1
    v = fourier_phase_surrogate(u, seed).values
    assert v.dtype == float and v.size == T
    a, b = np.abs(np.fft.rfft(u)), np.abs(np.fft.rfft(v))
    assert np.abs(a - b).max() / a.max() < 1e-10
    assert abs(v.mean() - u.mean()) < 1e-10


def test_longest_constant_run():
    assert longest_constant_run([1, 1, 2, 2, 2, 1]) == 3
    assert longest_constant_run([4]) == 1
    assert longest_constant_run([]) == 0


def test_timeseries_is_read_only():
    s = TimeSeries([1, 2, 3])
    with pytest.raises(ValueError):
        s.values[0] = 9
    assert s.T == 3


def test_polynomial_runs():
    from textfractal.series import polynomial_runs
    assert polynomial_runs([3, 2, 3, 4, 5, 6, 1], 1) == (5, 2, 2)
    assert polynomial_runs([1, 1, 2, 2, 2, 1], 0) == (3, 2, 1)
    assert polynomial_runs([1, 4, 9, 16, 25, 2], 2) == (5, 5, 3)
    assert polynomial_runs([7], 1) == (1, 1, 1)
