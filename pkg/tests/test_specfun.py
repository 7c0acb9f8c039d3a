import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from cellload import specfun
from cellload.errors import DomainError
from cellload.specfun import ApproxMode, EULER_GAMMA

E1_AT_1 = 0.21938393439552027  # quadrature oracle below


def test_e1_at_one_against_quadrature():
    val, _ = integrate.quad(lambda t: math.exp(-t) / t, 1.0, np.inf, epsabs=0, epsrel=1e-13)
    assert val == pytest.approx(E1_AT_1, rel=1e-12)
    assert specfun.e1(1.0) == pytest.approx(val, rel=1e-13)


def test_e1_small_argument_limit():
    x = 1e-8
    assert abs(specfun.e1(x) - (-EULER_GAMMA - math.log(x))) <= 1e-7


def test_e1_large_argument_bound():
    v = specfun.e1(50.0)
    assert 0 < v < math.exp(-50) / 50


def test_e1_switch_point_continuity():
    lo = specfun._e1_series(np.array([1.0]))[0]
    hi = math.exp(-1.0) * specfun._e1_cf_scaled(np.array([1.0]))[0]
    assert abs(lo - hi) <= 1e-12


def test_e1_domain():
    with pytest.raises(DomainError):
        specfun.e1(0.0)
    with pytest.raises(DomainError):
        specfun.e1(-1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-10, max_value=700.0))
def test_e1_matches_scipy(x):
    assert specfun.e1(x) == pytest.approx(special.exp1(x), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-3, max_value=200.0))
def test_e1_decreasing_and_log_consistent(x):
    assert specfun.e1(x * 1.01) < specfun.e1(x)
    assert specfun.log_e1(x) == pytest.approx(math.log(specfun.e1(x)), rel=1e-12, abs=1e-12)


def test_ei_values():
    assert specfun.ei(-1.0) == pytest.approx(-E1_AT_1, rel=1e-13)
    assert abs(specfun.ei(specfun.EI_ROOT)) < 1e-14


@settings(max_examples=150, deadline=None)
@given(st.floats(min_value=-300.0, max_value=300.0).filter(lambda v: abs(v) > 1e-12))
def test_ei_matches_scipy(x):
    assert specfun.ei(x) == pytest.approx(special.expi(x), rel=1e-12, abs=1e-300)


def test_ei_root_by_bisection():
    from scipy.optimize import brentq

    root = brentq(specfun.ei, 0.1, 1.0, xtol=1e-16)
    assert root == pytest.approx(0.3725074, abs=1e-7)
    assert root == pytest.approx(specfun.EI_ROOT, abs=1e-14)


def test_ei_inverse_roundtrip_at_half():
    assert specfun.ei_inverse(specfun.ei(-0.5)) == pytest.approx(-0.5, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-100.0, max_value=-1e-6))
def test_ei_inverse_negative_branch_roundtrip(x):
    assert specfun.ei_inverse(specfun.ei(x)) == pytest.approx(x, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-6, max_value=0.37))
def test_ei_inverse_positive_branch_roundtrip(x):
    assert specfun.ei_inverse(specfun.ei(x), branch="positive") == pytest.approx(x, rel=1e-9)


def test_ei_inverse_asymptotic_form():
    assert specfun.ei_inverse(-1e-300, ApproxMode.PAPER_APPROX) == pytest.approx(0.5)
    y = -1e-8
    approx = specfun.ei_inverse(y, ApproxMode.PAPER_APPROX)
    # the asymptotic form is closer to the positive root than the negative one
    assert abs(approx - specfun.ei_inverse(y, branch="positive")) <= 0.2
    assert abs(approx - specfun.ei_inverse(y)) > 0.4


def test_ei_inverse_domain():
    with pytest.raises(DomainError):
        specfun.ei_inverse(0.0)
    with pytest.raises(ValueError):
        specfun.ei_inverse(-1.0, branch="sideways")


def test_gamma_lower_inc():
    assert specfun.gamma_lower_inc(0.0, 3.5) == 0.0
    assert specfun.gamma_lower_inc(1e4, 3.5) == pytest.approx(15 * math.sqrt(math.pi) / 8, rel=1e-14)
    assert specfun.gamma_lower_inc(1e4, 3.5) == pytest.approx(3.323350970, rel=1e-9)
    assert specfun.gamma_lower_inc(1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)
    with pytest.raises(DomainError):
        specfun.gamma_lower_inc(-1.0, 2.0)


def test_barry_interpolation_error():
    pts = np.array([1.0, 2.0, 5.0, 10.0, 20.0, 50.0])
    rel = np.abs(specfun.e1_barry(pts) / specfun.e1(pts) - 1)
    assert np.all(rel <= 2e-2)
    dense = np.linspace(1.0, 50.0, 981)
    worst = np.max(np.abs(specfun.e1_barry(dense) / specfun.e1(dense) - 1))
    assert worst <= 1e-3  # measured 8.63e-4 with the rounded constants


def test_barry_domain():
    with pytest.raises(DomainError):
        specfun.e1_barry(0.5)
    with pytest.raises(DomainError):
        specfun.e1_barry(51.0)


def test_small_x_series():
    x = 0.1
    printed = specfun.e1_asymptotic_smallx(x)
    assert printed == pytest.approx(-EULER_GAMMA - math.log(0.1) + 0.1 - 0.00125, rel=1e-15)
    assert abs(printed - specfun.e1(x)) <= 5e-3
    # the Taylor coefficient is 1/4, which does better
    ref = specfun.e1_asymptotic_smallx(x, ApproxMode.REFERENCE)
    assert abs(ref - specfun.e1(x)) < abs(printed - specfun.e1(x))
    tiny = 1e-9
    for mode in ApproxMode:
        assert specfun.e1_asymptotic_smallx(tiny, mode) == pytest.approx(-EULER_GAMMA - math.log(tiny), rel=1e-8)


def test_geller_ng_decay_and_i2_at_one():
    assert abs(specfun.geller_ng_i1(60.0)) < 1e-100
    assert abs(specfun.geller_ng_i2(60.0)) < 1e-100
    num, _ = integrate.quad(lambda t: specfun.e1(t) * math.exp(-3.5 * t), 1.0, np.inf, epsrel=1e-12)
    assert -specfun.geller_ng_i2(1.0) == pytest.approx(num, rel=1e-6)
    num1, _ = integrate.quad(lambda t: t * specfun.e1(t) * math.exp(-3.5 * t), 1.0, np.inf, epsrel=1e-12)
    assert -specfun.geller_ng_i1(1.0) == pytest.approx(num1, rel=1e-6)


def test_geller_ng_is_antiderivative_with_decaying_exponential():
    x = np.linspace(0.3, 10.0, 40)
    h = 1e-5
    d2 = (specfun.geller_ng_i2(x + h) - specfun.geller_ng_i2(x - h)) / (2 * h)
    target_minus = specfun.e1(x) * np.exp(-3.5 * x)
    assert np.max(np.abs(d2 / target_minus - 1)) <= 1e-6
    target_plus = specfun.e1(x) * np.exp(3.5 * x)
    assert np.max(np.abs(d2 / target_plus - 1)) > 0.5
