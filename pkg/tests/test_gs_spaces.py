import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultraconv.errors import DomainError, NonConvolvablePairError
from ultraconv.functions import (Constant, ExpDecay, ExpGrowth, GaussGrowth, Gaussian, HermiteGaussian, Shift,
                                 delta)
from ultraconv.gs_spaces import (growth_fit, membership_test, normalized_gaussian, regularization_report,
                                 regularize, seminorm)
from ultraconv.weights import RSequence, associated, factorial, gevrey

M = factorial()


def test_seminorm_gaussian_finite():
    s = seminorm(Gaussian(), M, M, h=0.25)
    assert s.finite and not s.saturated
    assert s.truncation[0] == 60


def test_seminorm_gaussian_brute_force_alpha_sweep():
    # independent sweep with the Hermite closed form H_a(x) e^{-x^2} = (-1)^a D^a e^{-x^2}
    h = 0.7
    x = np.linspace(-8, 8, 16001)
    best = 0.0
    H = [np.ones_like(x), 2 * x]
    for a in range(1, 60):
        H.append(2 * x * H[a] - 2 * a * H[a - 1])
    for a in range(0, 21):
        v = np.abs(H[a] * np.exp(-x * x)) * np.exp(associated(M, h * np.abs(x)))
        best = max(best, h ** a * float(np.max(v)) / math.factorial(a))
    s = seminorm(Gaussian(), M, M, h=h, alpha_cap=20, density=1000.0)
    assert s.value == pytest.approx(best, rel=1e-9)


def test_seminorm_divergent():
    for f in (Constant(1.0), ExpGrowth(1.0)):
        s = seminorm(f, M, M, h=0.25)
        assert s.value == math.inf and s.saturated


def test_seminorm_needs_oracle():
    with pytest.raises(DomainError):
        seminorm(ExpDecay(1.0), M, M, h=0.25)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(-50, 50).filter(lambda v: abs(v) > 1e-6))
def test_seminorm_homogeneous(c):
    f = Gaussian(0.3, 0.8)
    a = seminorm(c * f, M, M, h=0.5, alpha_cap=30).value
    b = seminorm(f, M, M, h=0.5, alpha_cap=30).value
    assert a == pytest.approx(abs(c) * b, rel=1e-12)


def test_seminorm_monotone_in_h():
    f = HermiteGaussian(3, 1.2)
    vals = [seminorm(f, M, M, h=h, alpha_cap=30).value for h in (0.1, 0.25, 1.0, 4.0, 8.0)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > vals[0]


def test_seminorm_roumieu():
    r = RSequence(np.arange(1.0, 257.0))
    s = seminorm(Gaussian(), M, M, r=r, alpha_cap=30)
    assert s.finite and not s.saturated
    with pytest.raises(DomainError):
        seminorm(Gaussian(), M, M)


def test_seminorm_csv():
    rows = list(seminorm(Gaussian(), M, M, h=0.25, alpha_cap=5).csv_rows())
    assert rows[0] == ("alpha", "sup_x") and len(rows) == 7


# -- growth ------------------------------------------------------------------------

def test_growth_delta_identity():
    phi = Gaussian(0.5, 0.7)
    g = growth_fit(delta(), phi, M)
    x = np.arange(-64, 65) * 0.125
    assert g.ok and g.t == 0.125
    assert g.C == np.max(phi(x) * np.exp(-associated(M, 0.125 * np.abs(x))))


def test_growth_constant():
    g = growth_fit(Constant(1.0), Gaussian(), M)
    assert g.ok and g.t == 0.125
    assert g.C == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_growth_divergent_pair():
    with pytest.raises(NonConvolvablePairError):
        growth_fit(GaussGrowth(1.0), Gaussian(0.0, math.sqrt(2)), M)


def test_growth_translation_bound():
    f, phi, x0 = ExpDecay(1.0), Gaussian(), 3.0
    a = growth_fit(f, phi, M, t_grid=(0.5,))
    b = growth_fit(Shift(f, x0), phi, M, t_grid=(0.5,))
    assert a.ok and b.ok
    # e^{A(rho + lam)} <= 2 e^{A(2 rho)} e^{A(2 lam)}
    assert b.C <= 2 * math.exp(associated(M, 2 * 0.5 * x0)) * growth_fit(f, phi, M, t_grid=(1.0,)).C


def test_membership():
    assert membership_test(delta(), M).verdict == "consistent-with-membership"
    assert membership_test(ExpDecay(1.0), M).verdict == "consistent-with-membership"
    v = membership_test(GaussGrowth(1.0), M)
    assert v.verdict == "fails" and v.witness


def test_membership_gauss_growth_narrow_probe():
    # convolvable with a narrow probe, but (f * phi) grows like e^{4x^2/3}
    v = membership_test(GaussGrowth(1.0), M, probes=[Gaussian(0.0, 0.5)])
    assert v.verdict == "fails"
    assert dict(v.per_probe[0])["ok"] is False


# -- regularisation ------------------------------------------------------------------

def test_regularize_closed_form():
    # chi = e^{-x^2}/sqrt(pi), phi = psi = e^{-x^2}: Q_n psi(0) = n / sqrt(n^2 + 1 + 1/n^2)
    for n in (1, 3, 16):
        Q = regularize(Gaussian(), normalized_gaussian(), Gaussian(), n)
        assert Q(np.array([0.0]))[0] == pytest.approx(n / math.sqrt(n * n + 1 + n ** -2), rel=1e-13)


def test_regularize_point_value_narrow_chi():
    # chi of scale 0.2: Q_16 psi(0) = 1 / sqrt(1 + 0.04 (1 + 1/256) / 256)
    Q = regularize(Gaussian(), normalized_gaussian(0.2), Gaussian(), 16)
    v = Q(np.array([0.0]))[0]
    assert v == pytest.approx(1 / math.sqrt(1 + 0.04 * (1 + 1 / 256) / 256), rel=1e-12)
    assert abs(v - 1.0) < 1e-4


def test_regularize_derivative_against_finite_difference():
    Q = regularize(Gaussian(0.2, 1.1), normalized_gaussian(), Gaussian(), 2)
    x = np.array([0.4])
    h = 1e-3
    fd = (Q(x - 2 * h) - 8 * Q(x - h) + 8 * Q(x + h) - Q(x + 2 * h)) / (12 * h)
    assert Q.derivative(x, 1)[0] == pytest.approx(fd[0], rel=1e-9)


def test_regularize_rejections():
    with pytest.raises(DomainError):
        regularize(Gaussian(), Gaussian(), Gaussian(), 2)  # int chi = sqrt(pi)
    with pytest.raises(DomainError):
        regularize(Gaussian(), normalized_gaussian(), Gaussian(0.1, 1.0), 2)  # phi(0) != 1


def test_regularization_ladder():
    rep = regularization_report(Gaussian(), normalized_gaussian(), Gaussian(), M, M, h=0.25)
    assert rep.strictly_decreasing and rep.monotone_within_2
    assert rep.distances[-1] < rep.distances[0]
    # alpha = 0, x = 0 dominates: the distance equals the point error
    assert rep.distances[-1] == pytest.approx(rep.point_errors[-1], rel=1e-6)
