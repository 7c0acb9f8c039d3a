import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from cellload import analytic, diagnostics, specfun
from cellload.analytic import ConstantMode, LoadModel, RampApprox
from cellload.errors import DomainError, HighSNRViolation, InstabilityError
from cellload.linkbudget import NetworkParams, TrafficParams
from cellload.specfun import ApproxMode

BASE = LoadModel()
FIG3 = [BASE.with_(g0_db=36.0, lambda_bs=l * 1e-6) for l in (10, 20, 50, 100, 200, 500)]


def test_area_pdf_moments():
    for k, expected in ((0, 1.0), (1, 1.0), (2, 4.5 / 3.5)):
        val = integrate.quad(lambda x: x**k * analytic.area_pdf_reduced(x), 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
        assert val == pytest.approx(expected, abs=1e-9)


def test_area_pdf_is_gamma():
    x = np.linspace(0.01, 6, 50)
    ref = stats.gamma(3.5, scale=1 / 3.5).pdf(x)
    np.testing.assert_allclose(analytic.area_pdf_reduced(x), ref, rtol=1e-12)


def test_area_cdf_lower_incomplete_gamma():
    lam = 1e-5
    a = np.array([1e3, 5e4, 1e5, 3e5])
    expected = specfun.gamma_lower_inc(3.5 * lam * a, 3.5) / math.gamma(3.5)
    np.testing.assert_allclose(analytic.area_cdf(a, lam), expected, rtol=1e-13)
    q = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(analytic.area_cdf(analytic.area_ppf(q, lam), lam), q, rtol=1e-12)


@pytest.mark.parametrize("alpha", [2.0, 3.0])
@pytest.mark.parametrize("frac", [1e-6, 1e-3, 0.1, 0.5])
def test_load_of_area_vs_quadrature(alpha, frac):
    m = BASE.with_(alpha=alpha)
    a = frac * m.max_area
    assert analytic.load_of_area(a, m) == pytest.approx(diagnostics.disk_load_quadrature(a, m), rel=1e-6)


def test_load_of_area_degenerate():
    assert analytic.load_of_area(1e4, BASE.with_(lambda_u=0.0)) == 0.0
    with pytest.raises(HighSNRViolation):
        analytic.load_of_area(2 * BASE.max_area, BASE)
    with pytest.raises(DomainError):
        analytic.load_of_area(0.0, BASE)


def test_high_snr_load_approaches_exact_rate_for_small_cells():
    a = 1e-4 * BASE.max_area
    assert analytic.load_of_area(a, BASE) == pytest.approx(analytic.disk_load_exact(a, BASE), rel=0.05)


def test_constant_mode_ratio():
    lit = BASE.with_(constant_mode=ConstantMode.PAPER_LITERAL).k_prime()
    red = BASE.k_prime()
    assert lit / red == pytest.approx(2 * BASE.xi / (BASE.alpha * BASE.lam), rel=1e-12)


def test_area_of_load_inverts_load_of_area():
    a = np.array([1e2, 1e4, 1e6, 0.5 * BASE.max_area])
    l = analytic.load_of_area(a, BASE)
    np.testing.assert_allclose(analytic.area_of_load(l, BASE), a, rtol=1e-9)


def test_load_cdf_axioms():
    grid = np.concatenate([[0.0], np.logspace(-6, 3, 60)])
    f = analytic.load_cdf(grid, BASE)
    assert f[0] == 0.0
    assert np.all(np.diff(f) >= 0)
    assert f[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("g0", [20.0, 36.0])
def test_load_cdf_pushforward(g0):
    m = BASE.with_(g0_db=g0)
    mean = analytic.ei_mean_load(m)
    for l in np.array([0.01, 0.1, 0.5, 1.0, 3.0]) * mean:
        assert analytic.load_cdf(l, m) == pytest.approx(diagnostics.pushforward_cdf(l, m), abs=1e-6)


def test_load_cdf_vs_sampled_circular_loads():
    rng = np.random.default_rng(42)
    areas = analytic.area_ppf(rng.uniform(size=100_000), BASE.lam)
    loads = analytic.load_of_area(areas, BASE)
    ks = stats.kstest(loads, lambda l: analytic.load_cdf(l, BASE)).statistic
    assert ks <= 0.01


def test_load_cdf_asymptotic_form_deviation_is_bounded():
    # the asymptotic form shifts the argument of F_A; measure the gap
    grid = np.array([0.05, 0.2, 1.0])
    ref = analytic.load_cdf(grid, BASE)
    approx = analytic.load_cdf(grid, BASE, ApproxMode.PAPER_APPROX)
    assert np.all(approx >= ref - 1e-12)
    assert np.all(np.abs(approx - ref) <= 1.0)


def test_zero_traffic_short_circuits():
    m = BASE.with_(lambda_u=0.0)
    assert analytic.stable_fraction(m) == 1.0
    assert analytic.ei_mean_load(m) == 0.0
    assert analytic.cf_mean_load(m) == 0.0
    assert analytic.mean_load_mc_baseline(m) == 0.0
    assert analytic.load_cdf(0.0, m) == 1.0


def test_stable_fraction_monotone_in_density():
    vals = [analytic.stable_fraction(BASE.with_(lambda_bs=l * 1e-6)) for l in (0.5, 1, 2, 5, 10)]
    assert np.all(np.diff(vals) > 0)


def test_ei_mean_load_vs_direct_quadrature():
    m = BASE
    direct = integrate.quad(
        lambda a: analytic.load_of_area(a, m) * analytic.area_pdf(a, m.lam),
        0,
        m.max_area,
        points=[1 / m.lam],
        epsrel=1e-10,
        limit=400,
    )[0]
    assert analytic.ei_mean_load(m) == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize("m", FIG3)
def test_ei_mean_load_vs_t_domain_integral(m):
    assert analytic.ei_mean_load(m) == pytest.approx(analytic.mean_load_t_domain(m), rel=1e-6)


@pytest.mark.parametrize("m", FIG3)
def test_ei_mean_load_paper_approx_within_two_percent(m):
    ref = analytic.ei_mean_load(m)
    assert analytic.ei_mean_load(m, ApproxMode.PAPER_APPROX) == pytest.approx(ref, rel=2e-2)


@pytest.mark.parametrize("m", FIG3)
def test_mean_cell_dominates_typical_cell(m):
    ei = analytic.ei_mean_load(m)
    cf = analytic.cf_mean_load(m)
    mc = analytic.mean_load_mc_baseline(m)
    assert min(ei, cf, mc) >= 0
    assert mc >= ei


def test_mean_cell_baseline_equals_exact_rate_typical_mean():
    # the baseline is an average over the Rayleigh serving distance; redo it in r
    m = BASE
    t_mean = integrate.quad(
        lambda r: m.w / (m.net.bandwidth_hz * m.lam * math.log2(1 + m.xi * r**-2))
        * 2 * math.pi * m.lam * r * math.exp(-math.pi * m.lam * r * r),
        0,
        np.inf,
        epsrel=1e-10,
        limit=400,
    )[0]
    assert analytic.mean_load_mc_baseline(m) == pytest.approx(t_mean, rel=1e-6)


def test_tiny_density_raises():
    with pytest.raises(HighSNRViolation):
        analytic.ei_mean_load(BASE.with_(lambda_bs=1e-12))


def test_ramp_construction():
    q = 1e-4 * BASE.xi * math.pi
    ramp = RampApprox.from_rate(q)
    f2 = lambda t: math.exp(-3.5 * q * math.exp(-t))
    assert f2(ramp.t1) == pytest.approx(0.1, rel=1e-12)
    assert f2(ramp.t2) == pytest.approx(0.9, rel=1e-12)
    assert ramp(ramp.t1 + 1e-12) == pytest.approx(0.1, abs=1e-9)
    assert ramp(ramp.t2) == pytest.approx(0.9, abs=1e-12)
    assert ramp(ramp.t1 - 1) == 0.0 and ramp(ramp.t2 + 1) == 1.0


@pytest.mark.parametrize("lam_km2", [10, 100, 1000])
def test_cf_closed_form_vs_its_own_quadrature(lam_km2):
    m = BASE.with_(g0_db=36.0, lambda_bs=lam_km2 * 1e-6)
    assert analytic.cf_mean_load(m) == pytest.approx(analytic.cf_mean_load_numeric(m), rel=1e-8)
    assert analytic.cf_mean_load(m) >= 0


def test_cf_requires_alpha2():
    with pytest.raises(DomainError):
        analytic.cf_mean_load(BASE.with_(alpha=3.0))


def test_throughput_formulas():
    assert analytic.mean_active_users(0.5) == 1.0
    assert analytic.dyn_throughput(0.5, BASE) == pytest.approx(BASE.w / BASE.lam)
    assert analytic.dyn_throughput(1 - 1e-12, BASE) < 1e-2
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(InstabilityError):
            analytic.dyn_throughput(bad, BASE)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=0.5, max_value=1e4),
    st.floats(min_value=0.0, max_value=40.0),
    st.floats(min_value=1e-6, max_value=1.0),
)
def test_load_cdf_properties(lam_km2, g0, level):
    m = LoadModel(NetworkParams(lambda_bs=lam_km2 * 1e-6, g0_db=g0), TrafficParams())
    f1 = analytic.load_cdf(level, m)
    f2 = analytic.load_cdf(2 * level, m)
    assert 0.0 <= f1 <= f2 <= 1.0
