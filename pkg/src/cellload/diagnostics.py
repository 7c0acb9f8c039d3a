"""Oracle-equivalence checks behind ``cellload selftest``.

Each check measures one discrepancy and compares it with a frozen
tolerance. Tolerances can be overridden by name, which is how a tampered
gate is exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import analytic, specfun
from .analytic import ConstantMode, LoadModel
from .specfun import ApproxMode

TOLERANCES = {
    "area_normalization": 1e-9,
    "rederived_vs_quadrature": 1e-6,
    "constant_ratio_formula": 1e-12,
    "ei_inverse_roundtrip": 1e-10,
    "pushforward": 1e-6,
    "geller_ng_derivative": 1e-6,
    "cf_closed_form_vs_quadrature": 1e-8,
    "barry_max_rel_error": 1e-3,
    "series_abs_error_x0p1": 5e-3,
    "ei_reference_vs_t_domain": 1e-6,
}


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float | None

    @property
    def passed(self) -> bool:
        return self.tolerance is None or (math.isfinite(self.measured) and self.measured <= self.tolerance)


def disk_load_quadrature(a, model: LoadModel, rtol=1e-11):
    """2-D quadrature of ``w / (B log2(xi r^-alpha))`` over a disk of area ``a``."""
    radius = math.sqrt(a / math.pi)
    bw, xi, alpha, w = model.net.bandwidth_hz, model.xi, model.alpha, model.w

    def f(r, theta):
        return w * r / (bw * math.log2(xi * r ** (-alpha)))

    val, _ = integrate.dblquad(f, 0.0, 2.0 * math.pi, 0.0, radius, epsrel=rtol, epsabs=0.0)
    return val


def pushforward_cdf(l, model: LoadModel):
    """``P(load_of_area(A) <= l)`` by root-finding ``load_of_area`` directly."""
    a_hi = model.max_area * (1.0 - 1e-12)
    if analytic.load_of_area(a_hi, model) <= l:
        return float(analytic.area_cdf(a_hi, model.lam))

    def g(log_a):
        return math.log(analytic.load_of_area(math.exp(log_a), model)) - math.log(l)

    lo = math.log(a_hi) - 1.0
    while g(lo) > 0:
        lo -= 5.0
    root = optimize.brentq(g, lo, math.log(a_hi), xtol=1e-14, rtol=1e-15, maxiter=500)
    return float(analytic.area_cdf(math.exp(root), model.lam))


def run_checks(model: LoadModel, tolerances=None) -> list[Check]:
    tol = dict(TOLERANCES)
    tol.update(tolerances or {})
    checks = []

    norm = integrate.quad(analytic.area_pdf_reduced, 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
    checks.append(Check("area_normalization", abs(norm - 1.0), tol["area_normalization"]))

    worst = 0.0
    for alpha in (2.0, 3.0):
        m = model.with_(alpha=alpha, constant_mode=ConstantMode.REDERIVED)
        for frac in (1e-6, 1e-3, 0.1):
            a = frac * m.max_area
            worst = max(worst, abs(analytic.load_of_area(a, m) / disk_load_quadrature(a, m) - 1.0))
    checks.append(Check("rederived_vs_quadrature", worst, tol["rederived_vs_quadrature"]))

    lit = model.with_(constant_mode=ConstantMode.PAPER_LITERAL).k_prime()
    red = model.with_(constant_mode=ConstantMode.REDERIVED).k_prime()
    expected = 2.0 * model.xi / (model.alpha * model.lam)
    checks.append(Check("constant_mode_ratio", lit / red, None))
    checks.append(Check("constant_ratio_formula", abs(lit / red / expected - 1.0), tol["constant_ratio_formula"]))

    xs = -np.logspace(-6, 2, 41)
    rt = np.max(np.abs(specfun.ei_inverse(specfun.ei(xs)) / xs - 1.0))
    checks.append(Check("ei_inverse_roundtrip", float(rt), tol["ei_inverse_roundtrip"]))

    m = model.with_(constant_mode=ConstantMode.REDERIVED)
    if m.w > 0:
        grid = np.array([0.01, 0.1, 0.5, 1.0, 2.0]) * max(analytic.ei_mean_load(m), 1e-12)
        pf = max(abs(analytic.load_cdf(l, m) - pushforward_cdf(l, m)) for l in grid)
    else:
        pf = 0.0
    checks.append(Check("pushforward", pf, tol["pushforward"]))

    x = np.linspace(0.5, 12.0, 24)
    hstep = 1e-5
    d1 = (specfun.geller_ng_i1(x + hstep) - specfun.geller_ng_i1(x - hstep)) / (2 * hstep)
    d2 = (specfun.geller_ng_i2(x + hstep) - specfun.geller_ng_i2(x - hstep)) / (2 * hstep)
    t1 = x * specfun.e1(x) * np.exp(-3.5 * x)
    t2 = specfun.e1(x) * np.exp(-3.5 * x)
    gd = max(np.max(np.abs(d1 / t1 - 1)), np.max(np.abs(d2 / t2 - 1)))
    checks.append(Check("geller_ng_derivative", float(gd), tol["geller_ng_derivative"]))

    if m.alpha == 2.0 and m.w > 0:
        cf = analytic.cf_mean_load(m)
        cfq = analytic.cf_mean_load_numeric(m)
        checks.append(Check("cf_closed_form_vs_quadrature", abs(cf / cfq - 1), tol["cf_closed_form_vs_quadrature"]))
        t_domain = analytic.mean_load_t_domain(m)
        ref = analytic.ei_mean_load(m)
        checks.append(Check("ei_reference_vs_t_domain", abs(ref / t_domain - 1), tol["ei_reference_vs_t_domain"]))
        checks.append(Check("cf_rel_error_vs_t_domain", cf / t_domain - 1, None))
        checks.append(Check("cf_printed_rel_error_vs_t_domain", analytic.cf_mean_load(m, ApproxMode.PAPER_APPROX) / t_domain - 1, None))

    xb = np.linspace(1.0, 50.0, 981)
    barry = float(np.max(np.abs(specfun.e1_barry(xb) / specfun.e1(xb) - 1)))
    checks.append(Check("barry_max_rel_error", barry, tol["barry_max_rel_error"]))
    ser = abs(specfun.e1_asymptotic_smallx(0.1) - specfun.e1(0.1))
    checks.append(Check("series_abs_error_x0p1", ser, tol["series_abs_error_x0p1"]))
    return checks
