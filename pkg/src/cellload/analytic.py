"""Closed-form and single-integral results for the typical-cell load.

A circular cell of area ``A`` around its BS, with the high-SNR rate
``B log2(xi r^-alpha)``, carries the load::

    rho(A) = K' E1( (2/alpha) ln(xi (pi/A)^(alpha/2)) ),
    K' = 2 pi w ln2 xi^(2/alpha) / (alpha B)

Pushing the Poisson-Voronoi area law (gamma with shape 7/2) through
``rho(A)`` gives the load distribution, the stable fraction and the mean
load. The mean-cell baseline instead averages ``w / (lambda C)`` over the
SNR seen by the typical user.

Two constant conventions are available through ``ConstantMode``:
``REDERIVED`` (default) uses the constants that the disk integral actually
produces; ``PAPER_LITERAL`` uses the printed ``K'``, ``K1`` and ``chi2``,
which carry extra ``xi / lambda`` type factors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import specfun
from .errors import DomainError, HighSNRViolation, InstabilityError
from .linkbudget import NetworkParams, TrafficParams
from .specfun import ApproxMode

LN2 = math.log(2.0)
AREA_SHAPE = 3.5  # gamma shape of the reduced PV cell area
AREA_PDF_CONST = 343.0 / 15.0 * math.sqrt(7.0 / (2.0 * math.pi))

# beyond this CDF mass outside the high-SNR region, mean-load integrals refuse
HIGH_SNR_TAIL_TOL = 1e-9


class ConstantMode(enum.Enum):
    PAPER_LITERAL = "paper_literal"
    REDERIVED = "rederived"


@dataclass(frozen=True)
class LoadModel:
    net: NetworkParams = field(default_factory=NetworkParams)
    traffic: TrafficParams = field(default_factory=TrafficParams)
    constant_mode: ConstantMode = ConstantMode.REDERIVED
    quad_rtol: float = 1e-8
    quad_rtol_nested: float = 1e-6

    @property
    def xi(self) -> float:
        return self.net.xi

    @property
    def w(self) -> float:
        return self.traffic.w

    @property
    def lam(self) -> float:
        return self.net.lambda_bs

    @property
    def alpha(self) -> float:
        return self.net.alpha

    @property
    def max_area(self) -> float:
        """Disk area whose edge sees 0 dB mean SNR: ``pi xi^(2/alpha)``."""
        return math.pi * self.xi ** (2.0 / self.alpha)

    def k_prime(self) -> float:
        """Prefactor of E1 in the load-area map."""
        a, xi, w, bw = self.alpha, self.xi, self.w, self.net.bandwidth_hz
        if self.constant_mode is ConstantMode.PAPER_LITERAL:
            return 4.0 * w * math.pi * LN2 * xi / (a * a * bw * self.lam) * xi ** (2.0 / a)
        return 2.0 * math.pi * w * LN2 * xi ** (2.0 / a) / (a * bw)

    def k1(self) -> float:
        """Alpha = 2 prefactor used by the asymptotic load CDF."""
        xi, w, bw = self.xi, self.w, self.net.bandwidth_hz
        if self.constant_mode is ConstantMode.PAPER_LITERAL:
            return w * math.pi * LN2 * xi / (bw * self.lam)
        return w * math.pi * LN2 * xi / bw

    def log_chi2(self) -> float:
        """Log of the prefactor of the t-domain mean-load integral (alpha = 2)."""
        xi, w, bw, lam = self.xi, self.w, self.net.bandwidth_hz, self.lam
        q = lam * xi * math.pi
        if self.constant_mode is ConstantMode.PAPER_LITERAL:
            base = w * math.pi * LN2 * xi / (lam * bw)
        else:
            base = w * math.pi * LN2 * xi / bw * AREA_PDF_CONST
        return math.log(base) + 3.5 * math.log(q)

    def with_(self, **changes) -> "LoadModel":
        """Copy with network/traffic fields replaced by keyword."""
        net_keys = set(NetworkParams.__dataclass_fields__)
        tr_keys = set(TrafficParams.__dataclass_fields__)
        net = {k: v for k, v in changes.items() if k in net_keys}
        tr = {k: v for k, v in changes.items() if k in tr_keys}
        rest = {k: v for k, v in changes.items() if k not in net_keys | tr_keys}
        import dataclasses

        return dataclasses.replace(
            self,
            net=dataclasses.replace(self.net, **net),
            traffic=dataclasses.replace(self.traffic, **tr),
            **rest,
        )


def _require_alpha2(model):
    if model.alpha != 2.0:
        raise DomainError("this approximation is only defined for alpha = 2")


# ---------------------------------------------------------------- area law


def area_pdf_reduced(x):
    """Density of the reduced area ``s = lambda A`` of the typical PV cell."""
    x = np.asarray(x, dtype=float)
    out = AREA_PDF_CONST * np.power(np.maximum(x, 0.0), 2.5) * np.exp(-3.5 * x)
    return float(out) if out.ndim == 0 else out


def area_pdf(a, lambda_bs):
    return lambda_bs * area_pdf_reduced(lambda_bs * np.asarray(a, dtype=float))


def area_cdf(x, lambda_bs):
    """CDF of the typical-cell area [m^2] for BS density ``lambda_bs``."""
    x = np.asarray(x, dtype=float)
    norm = AREA_PDF_CONST * (2.0 / 7.0) ** 3.5
    out = norm * specfun.gamma_lower_inc(3.5 * lambda_bs * x, AREA_SHAPE)
    out = np.minimum(np.asarray(out), 1.0)
    return float(out) if out.ndim == 0 else out


def area_ppf(p, lambda_bs):
    """Quantile function of the typical-cell area."""
    return special.gammaincinv(AREA_SHAPE, p) / (AREA_SHAPE * lambda_bs)


# ---------------------------------------------------------------- load map


def _log_snr_arg(a, model):
    # (2/alpha) ln(xi (pi/A)^(alpha/2)) = (2/alpha) ln xi + ln(pi/A)
    return 2.0 / model.alpha * math.log(model.xi) + np.log(math.pi / a)


def load_of_area(a, model: LoadModel):
    """Load of a circular cell of area ``a`` [m^2] under the high-SNR rate."""
    a = np.asarray(a, dtype=float)
    scalar = a.ndim == 0
    if np.any(~(a > 0)):
        raise DomainError("cell area must be positive")
    if model.w == 0:
        out = np.zeros_like(a)
        return float(out) if scalar else out
    y = _log_snr_arg(a, model)
    if np.any(y <= 0):
        raise HighSNRViolation(
            f"cell area exceeds high-SNR limit pi*xi^(2/alpha) = {model.max_area:.4g} m^2"
        )
    out = model.k_prime() * specfun.e1(y)
    return float(out) if scalar else out


def disk_load_exact(a, model: LoadModel, rtol=1e-10):
    """Load of a disk of area ``a`` using the full Shannon rate ``log2(1 + SNR)``."""
    if model.w == 0:
        return 0.0
    bw, xi, alpha, w = model.net.bandwidth_hz, model.xi, model.alpha, model.w
    radius = math.sqrt(a / math.pi)

    def integrand(r):
        return 2.0 * math.pi * r * w / (bw * math.log2(1.0 + xi * r**-alpha))

    val, _ = integrate.quad(integrand, 0.0, radius, epsrel=rtol, limit=200)
    return val


def area_of_load(l, model: LoadModel):
    """Largest circular-cell area whose load does not exceed ``l``.

    Inverts ``load_of_area`` through the negative branch of Ei^-1. Returns
    0 at ``l = 0`` and approaches ``model.max_area`` as ``l`` grows.
    """
    l = np.asarray(l, dtype=float)
    scalar = l.ndim == 0
    if np.any(~(l >= 0)):
        raise DomainError("load must be nonnegative")
    out = np.zeros_like(l)
    pos = l > 0
    if np.any(pos):
        x = specfun.ei_inverse(-l[pos] / model.k_prime())
        out[pos] = model.max_area * np.exp(x)
    return float(out) if scalar else out


def load_cdf(l, model: LoadModel, mode=ApproxMode.REFERENCE):
    """CDF of the typical-cell load under the circular-cell approximation.

    REFERENCE evaluates ``F_A(pi xi^(2/alpha) exp(Ei^-1(-l/K')))`` exactly.
    PAPER_APPROX (alpha = 2) reproduces the asymptotic printed form
    ``F_A(xi pi (1 + e^(-l/K1)) / e^(-l/K1))``.
    """
    l = np.asarray(l, dtype=float)
    scalar = l.ndim == 0
    if np.any(~(l >= 0)):
        raise DomainError("load must be nonnegative")
    if model.w == 0:
        out = np.ones_like(l)
        return float(out) if scalar else out
    if mode is ApproxMode.PAPER_APPROX:
        _require_alpha2(model)
        z = np.exp(-l / model.k1())
        out = area_cdf(model.xi * math.pi * (1.0 + z) / z, model.lam)
    else:
        out = area_cdf(area_of_load(l, model), model.lam)
    out = np.asarray(out, dtype=float)
    return float(out) if scalar else out


def stable_fraction(model: LoadModel, mode=ApproxMode.REFERENCE) -> float:
    """Probability that the typical cell has load below one."""
    return float(load_cdf(1.0, model, mode))


# ---------------------------------------------------------------- mean loads


def mean_load_mc_baseline(model: LoadModel) -> float:
    """Mean-cell load ``int w / (B lambda log2(1+T)) p(T) dT``.

    ``T = xi r^-alpha`` is the fading-averaged SNR of the typical user, whose
    serving distance is Rayleigh with parameter ``lambda pi``. Its density is
    known in closed form, so no numerical differentiation is needed.
    """
    if model.w == 0:
        return 0.0
    lam, xi, a = model.lam, model.xi, model.alpha
    bw, w = model.net.bandwidth_hz, model.w
    c = lam * math.pi * xi ** (2.0 / a)

    def integrand(u):
        # dT = T du; p(T) T = (2/a) c T^(-2/a) exp(-c T^(-2/a))
        z = c * math.exp(-2.0 / a * u)
        return w / (bw * lam * math.log2(1.0 + math.exp(u))) * (2.0 / a) * z * math.exp(-z)

    centre = a / 2.0 * math.log(c)  # z = 1 here
    lo, hi = centre - 10.0, centre + 40.0 * a
    val, _ = integrate.quad(
        integrand, lo, hi, points=[centre], epsrel=model.quad_rtol_nested, limit=400
    )
    return val


def _check_tail(model):
    s_max = model.lam * model.max_area
    tail = special.gammaincc(AREA_SHAPE, AREA_SHAPE * s_max)
    if tail > HIGH_SNR_TAIL_TOL:
        raise HighSNRViolation(
            f"{tail:.3g} of cells exceed the high-SNR area limit; lambda is too small"
        )
    return s_max


def ei_mean_load(model: LoadModel, mode=ApproxMode.REFERENCE) -> float:
    """Mean load of the typical cell, ``E[rho(A)]`` over the PV area law.

    REFERENCE integrates ``K' E1(.) f_A`` with the reference E1 (any alpha).
    PAPER_APPROX (alpha = 2) swaps E1 for Barry's interpolation where its
    argument is in [1, 50] and for the three-term series below 1; cells
    smaller than ``pi xi e^-50`` are dropped (their mass is below e^-150).
    """
    if model.w == 0:
        return 0.0
    lam = model.lam
    s_max = _check_tail(model)
    kp = model.k_prime()
    s_stop = min(s_max, 80.0)

    if mode is ApproxMode.REFERENCE:

        def integrand(s):
            y = _log_snr_arg(s / lam, model)
            return kp * specfun.e1(y) * area_pdf_reduced(s)

        peak = min(2.5 / 3.5, 0.5 * s_stop)
        val, _ = integrate.quad(integrand, 0.0, s_stop, points=[peak], epsrel=model.quad_rtol, limit=400)
        return val

    _require_alpha2(model)
    s_e = s_max / math.e
    s_50 = s_max * math.exp(-50.0)

    def barry_part(s):
        x = min(max(math.log(s_max / s), 1.0), 50.0)
        return kp * float(specfun.e1_barry(x)) * area_pdf_reduced(s)

    def series_part(s):
        x = math.log(s_max / s)
        if x <= 0:
            return 0.0
        return kp * float(specfun.e1_asymptotic_smallx(x)) * area_pdf_reduced(s)

    total = 0.0
    hi = min(s_e, 80.0)
    if hi > s_50:
        pts = [p for p in (2.5 / 3.5,) if s_50 < p < hi]
        total += integrate.quad(barry_part, s_50, hi, points=pts or None, epsrel=model.quad_rtol, limit=400)[0]
    if s_e < 80.0:
        total += integrate.quad(series_part, s_e, s_stop, epsrel=model.quad_rtol, limit=400)[0]
    return total


def _f2_log(t, q):
    return -3.5 * q * np.exp(-t)


def mean_load_t_domain(model: LoadModel) -> float:
    """t-domain mean load ``chi2 int_0^inf E1(t) e^(-3.5 t) F2(t) dt`` (alpha = 2).

    ``t = ln(xi pi / A)``, ``F2(t) = exp(-3.5 lambda xi pi e^-t)``. Cells with
    ``t <= 0`` violate the high-SNR condition and are excluded.
    """
    _require_alpha2(model)
    if model.w == 0:
        return 0.0
    _check_tail(model)
    q = model.lam * model.xi * math.pi
    lc = model.log_chi2()

    def integrand(t):
        return math.exp(float(specfun.log_e1(t)) + lc - 3.5 * t + _f2_log(t, q))

    peak = math.log(q)
    parts = [(1e-300, max(peak, 1.0)), (max(peak, 1.0), max(peak, 1.0) + 60.0)]
    return sum(integrate.quad(integrand, a, b, epsrel=model.quad_rtol, limit=400)[0] for a, b in parts)


@dataclass(frozen=True)
class RampApprox:
    """Piecewise ramp replacing F2 between its 10 % and 90 % points."""

    t1: float
    t2: float
    y1: float

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ValueError("ramp requires t1 < t2")

    @classmethod
    def from_rate(cls, q: float) -> "RampApprox":
        """Build from ``q = lambda xi pi`` so that F2(t1) = 0.1, F2(t2) = 0.9."""
        c = 3.5 * q
        t1 = -math.log(-math.log(0.1) / c)
        t2 = -math.log(-math.log(0.9) / c)
        return cls(t1, t2, (0.9 * t1 - 0.1 * t2) / (t1 - t2))

    @property
    def slope(self) -> float:
        return 0.8 / (self.t2 - self.t1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ramp = self.slope * t + self.y1
        return np.where(t <= self.t1, 0.0, np.where(t > self.t2, 1.0, ramp))


def cf_mean_load(model: LoadModel, mode=ApproxMode.REFERENCE) -> float:
    """Closed-form mean load with F2 replaced by a ramp (alpha = 2).

    REFERENCE is the exact value of the ramp-approximated integral::

        chi2 [ s (I1(t2) - I1(t1)) + y1 (I2(t2) - I2(t1)) - I2(t2) ],  s = 0.8/(t2-t1)

    PAPER_APPROX keeps the printed combination, which drops the ramp slope
    ``s`` on the I1 term.
    """
    _require_alpha2(model)
    if model.w == 0:
        return 0.0
    ramp = RampApprox.from_rate(model.lam * model.xi * math.pi)
    if ramp.t1 <= 0:
        raise HighSNRViolation("ramp start t1 <= 0; lambda xi is too small")
    i1a, i1b = specfun.geller_ng_i1(ramp.t1), specfun.geller_ng_i1(ramp.t2)
    i2a, i2b = specfun.geller_ng_i2(ramp.t1), specfun.geller_ng_i2(ramp.t2)
    chi2 = math.exp(model.log_chi2())
    if mode is ApproxMode.PAPER_APPROX:
        return chi2 * (i1b - i1a + (ramp.y1 - 1.0) * i2b - ramp.y1 * i2a)
    return chi2 * (ramp.slope * (i1b - i1a) + ramp.y1 * (i2b - i2a) - i2b)


def cf_mean_load_numeric(model: LoadModel) -> float:
    """Quadrature of the ramp-approximated integral, independent of I1/I2."""
    _require_alpha2(model)
    ramp = RampApprox.from_rate(model.lam * model.xi * math.pi)
    lc = model.log_chi2()

    def integrand(t):
        return math.exp(float(specfun.log_e1(t)) + lc - 3.5 * t) * float(ramp(t))

    a = integrate.quad(integrand, ramp.t1, ramp.t2, epsrel=1e-10, limit=200)[0]
    b = integrate.quad(integrand, ramp.t2, ramp.t2 + 60.0, epsrel=1e-10, limit=200)[0]
    return a + b


# ---------------------------------------------------------------- throughput


def mean_active_users(rho_bar: float) -> float:
    """Mean flow count ``rho / (1 - rho)`` of a stable PS cell."""
    if not 0 < rho_bar < 1:
        raise InstabilityError(f"load {rho_bar} outside (0, 1)")
    return rho_bar / (1.0 - rho_bar)


def dyn_throughput(rho_bar: float, model: LoadModel) -> float:
    """Flow throughput ``w (1 - rho) / rho * (1/lambda)`` [bit/s]."""
    if not 0 < rho_bar < 1:
        raise InstabilityError(f"load {rho_bar} outside (0, 1)")
    return model.w * (1.0 - rho_bar) / rho_bar / model.lam
