import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad, quad

from ultraconv.convolution import (algebra_checks, convolve, criterion_iv, default_probes, pair_value,
                                   pair_value_spectral)
from ultraconv.errors import DomainError, NonConvolvablePairError, TruncationError
from ultraconv.functions import (Constant, ExpDecay, GaussGrowth, Gaussian, HermiteGaussian, Reflect, Shift,
                                 delta)
from ultraconv.ultrapoly import build
from ultraconv.weights import factorial


def test_gaussian_convolution_closed_form():
    x = np.linspace(-4, 4, 17)
    ref = math.sqrt(math.pi / 2) * np.exp(-x * x / 2)
    assert np.allclose(convolve(Gaussian(), Gaussian(), x), ref, rtol=1e-12, atol=1e-300)


def test_convolution_with_kink_against_quad():
    f, g = ExpDecay(1.0), Gaussian(0.3, 0.8)
    for xv in [-1.0, 0.0, 2.5]:
        ref, _ = quad(lambda y: math.exp(-abs(y)) * math.exp(-((xv - y - 0.3) / 0.8) ** 2), -60, 60,
                      points=[0.0], limit=400, epsabs=1e-15)
        assert convolve(f, g, [xv])[0] == pytest.approx(ref, rel=1e-10)


def test_point_mass_convolution_is_shift():
    x = np.linspace(-2, 2, 5)
    assert np.allclose(convolve(delta(0.7, 2.0), Gaussian(), x), 2.0 * np.exp(-(x - 0.7) ** 2))


def test_divergent_convolution():
    with pytest.raises(NonConvolvablePairError):
        convolve(GaussGrowth(1.0), Gaussian(0.0, math.sqrt(2)), [0.0])
    with pytest.raises(NonConvolvablePairError):
        convolve(Constant(1.0), Constant(1.0), [0.0])


# -- criterion (iv) -----------------------------------------------------------------

@pytest.mark.parametrize("f1, f2, verdict", [
    (Gaussian(), Gaussian(), "exists"),
    (Constant(1.0), Gaussian(), "exists"),
    (Constant(1.0), Constant(1.0), "fails"),
])
def test_criterion_iv_verdicts(f1, f2, verdict):
    rep = criterion_iv(f1, f2)
    assert rep.verdict == verdict
    if verdict == "fails":
        assert rep.witnesses
        assert any(p.integrable is False and p.tail_exponent >= 0 and p.fit_residual < 0.05 for p in rep.probes)
    else:
        assert all(p.integrable for p in rep.probes)


def test_criterion_iv_product_integral_oracle():
    # f1 = f2 = phi = psi = e^{-x^2}: both factors are sqrt(pi/2) e^{-x^2/2}
    g = Gaussian()
    rep = criterion_iv(g, g, probes=[(g, g)])
    assert rep.probes[0].product_integral == pytest.approx(math.pi / 2 * math.sqrt(math.pi), rel=1e-6)


@pytest.mark.parametrize("f1, f2", [(Gaussian(0.5, 1.0), Gaussian(-0.2, 0.7)), (Constant(1.0), Constant(1.0)),
                                    (Constant(1.0), Gaussian())])
def test_criterion_iv_swap_symmetry(f1, f2):
    probes = default_probes()[:3]
    a = criterion_iv(f1, f2, probes)
    b = criterion_iv(f2, f1, [(q, p) for p, q in probes])
    assert a.verdict == b.verdict


def test_criterion_iv_rejects_empty():
    with pytest.raises(DomainError):
        criterion_iv(Gaussian(), Gaussian(), probes=[])


def test_report_serialises():
    d = criterion_iv(Constant(1.0), Constant(1.0), probes=default_probes()[:1]).to_dict()
    assert d["verdict"] == "fails" and d["probes"][0]["tail_csv"].startswith("x,log_abs_h\n")


# -- pair value --------------------------------------------------------------------

def test_pair_delta_delta():
    assert pair_value(delta(), delta(), Gaussian()) == 1.0


def test_pair_gaussians_closed_form():
    # iint e^{-x^2 - y^2 - (x+y)^2} = pi / sqrt(det [[2,1],[1,2]])
    assert pair_value(Gaussian(), Gaussian(), Gaussian()) == pytest.approx(math.pi / math.sqrt(3), rel=1e-8)


def test_pair_against_dblquad():
    f1, f2, phi = ExpDecay(1.0), Gaussian(0.5, 1.2), HermiteGaussian(2, 1.0)
    ref, _ = dblquad(lambda y, x: f1(x) * f2(y) * phi(x + y), -40, 40, -40, 40, epsabs=1e-12)
    assert pair_value(f1, f2, phi) == pytest.approx(ref, rel=1e-6, abs=1e-10)


def test_pair_constant_gaussian():
    assert pair_value(Constant(1.0), Gaussian(), Gaussian()) == pytest.approx(math.pi, rel=1e-8)


def test_pair_fails_pair_raises():
    rep = criterion_iv(Constant(1.0), Constant(1.0), probes=default_probes()[:1])
    with pytest.raises(DomainError):
        pair_value(Constant(1.0), Constant(1.0), Gaussian(), report=rep)
    with pytest.raises(NonConvolvablePairError):
        pair_value(Constant(1.0), Constant(1.0), Gaussian(), report=rep, acknowledge=True)


def test_delta_neutrality():
    f, phi = Gaussian(0.4, 0.9), Gaussian(-0.3, 1.1)
    ref, _ = quad(lambda y: f(y) * phi(y), -30, 30, epsabs=1e-15)
    assert pair_value(delta(), f, phi) == pytest.approx(ref, abs=1e-8)


def test_reflection_consistency():
    f1, f2, phi = ExpDecay(1.0), Gaussian(0.5, 1.2), Gaussian(0.2, 0.8)
    a = pair_value(f1, f2, phi)
    b = pair_value(Reflect(f1), Reflect(f2), Reflect(phi))
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@settings(max_examples=4, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2))
def test_bilinearity(a, b):
    f, g, phi, psi = Gaussian(0.3, 1.0), ExpDecay(2.0), Gaussian(), HermiteGaussian(1, 1.0)
    lhs = pair_value(a * f + b * g, Gaussian(0.1, 0.9), phi)
    rhs = a * pair_value(f, Gaussian(0.1, 0.9), phi) + b * pair_value(g, Gaussian(0.1, 0.9), phi)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    lhs = pair_value(f, g, a * phi + b * psi)
    rhs = a * pair_value(f, g, phi) + b * pair_value(f, g, psi)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_spectral_pairing_matches_quadrature():
    f1, f2, phi = Gaussian(0.5, 1.0), HermiteGaussian(1, 0.8), Gaussian(-0.2, 1.3)
    assert pair_value_spectral(f1, f2, phi) == pytest.approx(pair_value(f1, f2, phi), rel=1e-10)


# -- algebra -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def P():
    return build(factorial())


def test_commutativity_gaussians(P):
    rec = algebra_checks(Gaussian(0.3, 1.0), Gaussian(-0.5, 0.7), P, Gaussian())
    assert rec.commutativity <= 1e-8
    assert rec.passed()


def test_identity_multiplier_exact():
    rec = algebra_checks(Gaussian(), ExpDecay(1.0), None, Gaussian())
    assert rec.values["a"] == rec.values["b"] == rec.values["c"] == rec.values["pair"]
    assert rec.interchange == 0.0


def test_delta_interchange_default_build(P):
    rec = algebra_checks(delta(0.0), Gaussian(), P, Gaussian())
    assert rec.pointwise <= 1e-6
    assert rec.interchange <= 1e-5 * rec.scale
    # the spatial pairing of P(D) e^{-x^2} cancels far below double precision and is refused
    assert rec.quadrature_interchange is None


def test_delta_interchange_mild_multiplier():
    Pm = build(factorial(), k=0.02)
    rec = algebra_checks(delta(0.5), Gaussian(), Pm, Gaussian())
    assert rec.quadrature_interchange is not None and rec.quadrature_interchange <= 1e-8 * rec.scale
    assert rec.passed()


def test_cancellation_is_refused(P):
    from ultraconv.functions import MultiplierApplied
    with pytest.raises(TruncationError):
        pair_value(delta(), MultiplierApplied(P, Gaussian()), Gaussian())
