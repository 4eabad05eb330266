import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textfractal.acf import acf, noise_level
from textfractal.errors import ZeroVariance
from textfractal.synthetic import ar1


def naive_acf(u, max_lag):
    z = u - u.mean()
    return np.array([z[: z.size - k] @ z[k:] for k in range(max_lag + 1)]) / (z @ z)


def test_noise_level():
    assert noise_level(10000) == pytest.approx(0.0196)
    assert noise_level(4) == pytest.approx(0.98)
    assert noise_level(384) == pytest.approx(0.1, abs=0.001)


def test_matches_direct_sum():
    u = np.random.default_rng(0).standard_normal(777)
    r = acf(u, 50)
    assert r.rho[0] == 1.0
    assert np.allclose(r.rho, naive_acf(u, 50), atol=1e-12)


def test_ar1():
    r = acf(ar1(2**16, 0.6, seed=0), 10)
    assert np.all(np.abs(r.rho - 0.6 ** np.arange(11)) <= 0.02)


def test_white_noise_band():
    r = acf(np.random.default_rng(4).standard_normal(10**4), 500)
    assert r.fraction_below_noise(1, 500) >= 0.93


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.floats(-100, 100).filter(lambda a: abs(a) > 1e-3),
       st.floats(-1e3, 1e3))
def test_affine_invariance(seed, a, b):
    u = np.random.default_rng(seed).standard_normal(300)
    r1, r2 = acf(u, 40).rho, acf(a * u + b, 40).rho
    assert np.allclose(r1, r2, rtol=0, atol=1e-10)


def test_errors_and_loglog():
    with pytest.raises(ZeroVariance):
        acf(np.full(100, 3.0), 5)
    with pytest.raises(ValueError):
        acf(np.arange(10.0), 5)
    x, y = acf(ar1(4000, 0.8, seed=1), 20).loglog()
    assert x[0] == 0.0 and np.all(np.isfinite(y))
