import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textfractal import weibull
from textfractal.errors import FitFailed, InvalidParams
from textfractal.weibull import Histogram, WeibullParams, cdf, hazard, pmf

params_st = st.tuples(st.floats(0.01, 0.99), st.floats(0.2, 5.0))


def test_pmf_examples():
    assert pmf(0, (0.3, 1)) == pytest.approx(0.3, abs=1e-15)
    assert pmf(2, (0.5, 1)) == pytest.approx(0.125, abs=1e-15)
    assert pmf(1, (0.5, 2)) == pytest.approx(0.5 - 0.5 ** 4, abs=1e-15)


def test_cdf_examples():
    assert cdf(0, (0.4, 2.3)) == 0.0
    assert cdf(1, (0.4, 2.3)) == pytest.approx(0.4, abs=1e-15)
    assert cdf(10**6, (0.3, 1)) == pytest.approx(1.0, abs=1e-12)


def test_invalid_params():
    for bad in [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, -1.0), (float("nan"), 1.0)]:
        with pytest.raises(InvalidParams):
            WeibullParams(*bad)


@settings(max_examples=100, deadline=None)
@given(params_st)
def test_pmf_is_cdf_difference(prm):
    k = np.arange(0, 200)
    assert np.allclose(pmf(k, prm), cdf(k + 1, prm) - cdf(k, prm), rtol=0, atol=1e-12)
    assert np.all(pmf(k, prm) >= 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95))
def test_geometric_reduction(p):
    k = np.arange(60)
    assert np.allclose(pmf(k, (p, 1.0)), p * (1 - p) ** k, rtol=0, atol=1e-12)
    assert np.allclose(hazard(k, (p, 1.0)), p, rtol=0, atol=1e-12)


def test_sample_geometric_mean():
    x = weibull.sample((0.5, 1.0), 10**5, seed=3).values
    assert x.dtype == np.int64 and x.min() >= 0
    assert abs(x.mean() - 1.0) < 0.02


def test_sample_ks_and_determinism():
    prm = WeibullParams(0.55, 1.5)
    s = weibull.sample(prm, 10**5, seed=11)
    assert weibull.ks_distance(s, prm) < 0.01
    assert np.array_equal(s.values, weibull.sample(prm, 10**5, seed=11).values)


def test_fit_round_trip():
    s = weibull.sample((0.55, 1.5), 10**5, seed=1)
    f = weibull.fit(Histogram.from_series(s))
    assert abs(f.params.p - 0.55) <= 0.02
    assert abs(f.params.beta - 1.5) <= 0.05


def test_fit_exact_pmf_fixed_point():
    k = np.arange(80)
    f = weibull.fit(Histogram.from_frequencies(pmf(k, (0.3, 1.0)), k))
    assert f.params.p == pytest.approx(0.3, abs=1e-6)
    assert f.params.beta == pytest.approx(1.0, abs=1e-6)
    assert f.sse < 1e-20


@settings(max_examples=25, deadline=None)
@given(st.tuples(st.floats(0.1, 0.9), st.floats(0.5, 3.0)))
def test_fit_recovers_exact_pmfs(prm):
    k = np.arange(200)
    freqs = pmf(k, prm)
    f = weibull.fit(Histogram.from_frequencies(freqs, k))
    assert f.params.p == pytest.approx(prm[0], abs=1e-5)
    assert f.params.beta == pytest.approx(prm[1], abs=1e-4)


def test_log_weighting_and_zero_bin():
    s = weibull.sample((0.2, 1.3), 50000, seed=2)
    f = weibull.fit_series(s, include_zero=True, weighting="log")
    assert f.weighting == "log"
    assert abs(f.params.beta - 1.3) < 0.1
    g = weibull.fit_series(s)
    assert g.n_bins_used == f.n_bins_used - 1


def test_degenerate_histograms():
    with pytest.raises(FitFailed):
        weibull.fit(Histogram.from_series([3, 3, 3]))
    with pytest.raises(FitFailed):
        weibull.fit(Histogram.from_series([1, 2, 2, 1]))
    with pytest.raises(ValueError):
        Histogram.from_series([1.5, 2])


def test_tail_stays_finite():
    k = np.array([10**5, 10**7])
    assert np.all(np.isfinite(pmf(k, (0.3, 2.0))))
    assert math.isfinite(cdf(10**9, (0.3, 0.5)))
