import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ultraconv.functions import (Constant, Cosine, DampedWeierstrass, Dilate, ExpDecay, Gaussian,
                                 HermiteGaussian, Product, Reflect, Shift, Sum, delta, hermite_gauss_log,
                                 spot_check_derivative)


def _fourier_quad(f, xi, lim=40.0):
    re, _ = quad(lambda x: f(x) * math.cos(x * xi), -lim, lim, limit=400, points=[0.0])
    im, _ = quad(lambda x: -f(x) * math.sin(x * xi), -lim, lim, limit=400, points=[0.0])
    return complex(re, im)


def test_hermite_recurrence_matches_polynomials():
    u = np.linspace(-3, 3, 13)
    sign, logv = hermite_gauss_log(u, 6)
    H = [np.ones_like(u), 2 * u]
    for n in range(1, 6):
        H.append(2 * u * H[n] - 2 * n * H[n - 1])
    for n in range(7):
        ref = H[n] * np.exp(-u * u)
        got = sign[n] * np.exp(logv[n])
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-300)


def test_hermite_large_argument_finite():
    _, logv = hermite_gauss_log(np.array([60.0]), 60)
    assert np.all(np.isfinite(logv))


@pytest.mark.parametrize("f", [Gaussian(0.3, 0.7), HermiteGaussian(2, 1.3), Cosine(2.5),
                               Product(Gaussian(0, 2), Cosine(1.0)), Reflect(HermiteGaussian(1, 1)),
                               Shift(Gaussian(), 1.5), Dilate(Gaussian(), 3.0, 3.0)])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_derivative_oracles_finite_differences(f, n):
    assert spot_check_derivative(f, n, [-0.9, 0.1, 0.7]) < 1e-7


def test_hermite_one_is_x_gauss():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(HermiteGaussian(1, 1.0)(x), x * np.exp(-x * x), atol=1e-15)


@pytest.mark.parametrize("f", [Gaussian(0.0, 1.0), Gaussian(0.5, 0.5), HermiteGaussian(1, 1.0),
                               HermiteGaussian(3, 1.5), ExpDecay(1.3), DampedWeierstrass(0.5, 3, 1.0, 3)])
@pytest.mark.parametrize("xi", [0.0, 0.7, 2.3])
def test_fourier_oracle_by_quadrature(f, xi):
    got = complex(f.fourier(np.array([xi]))[0])
    ref = _fourier_quad(f, xi)
    assert abs(got - ref) < 1e-8


def test_scaled_and_sum_fourier():
    f = 2.0 * Gaussian() + Reflect(HermiteGaussian(1, 1.0))
    for xi in [0.0, 1.1]:
        assert abs(complex(f.fourier(np.array([xi]))[0]) - _fourier_quad(f, xi)) < 1e-8


def test_spectral_lines():
    assert Constant(3.0).spectral_lines() == [(0.0, 3.0)]
    assert sorted(Cosine(math.pi).spectral_lines()) == [(-math.pi, 0.5), (math.pi, 0.5)]


def test_components_flatten():
    f = 2.0 * (Gaussian() + delta(1.0))
    comps = f.components()
    assert len(comps) == 2 and all(c == 2.0 for c, _ in comps)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-3, 3), s=st.floats(0.3, 3), x=st.floats(-5, 5))
def test_gaussian_log_abs_consistent(c, s, x):
    g = Gaussian(c, s)
    v = g(np.array([x]))[0]
    if v > 1e-300:
        assert g.log_abs(np.array([x]))[0] == pytest.approx(math.log(v), abs=1e-12)


def test_product_log_derivatives_match_leibniz():
    f = Product(Gaussian(0.2, 1.1), Cosine(1.7))
    x = np.array([-0.4, 0.9])
    s, lv = f.log_abs_derivatives(x, 6)
    for n in range(7):
        assert np.allclose(s[n] * np.exp(lv[n]), f.derivative(x, n), rtol=1e-11, atol=1e-14)
