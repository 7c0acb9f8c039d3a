"""Exponential integrals, their inverse, and the incomplete gamma function.

Reference evaluations are accurate to ~1e-13 relative. Alongside them live
the cheap approximants used by the load formulas: Barry's interpolation of
E1 on [1, 50], the truncated small-argument series, an asymptotic inverse of
Ei, and the Geller-Ng primitives of ``E1(x) exp(-3.5 x)`` and
``x E1(x) exp(-3.5 x)``.

All functions accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

EULER_GAMMA = float(np.euler_gamma)
EI_ROOT = 0.37250741078136663446  # positive zero of Ei

_EPS = 1e-16
_FPMIN = 1e-300


class ApproxMode(enum.Enum):
    REFERENCE = "reference"
    PAPER_APPROX = "paper_approx"


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def _e1_series(x):
    # E1 = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!), used for 0 < x <= 1
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (-x) / k
        contrib = term / k
        total -= contrib
        if np.all(np.abs(contrib) <= _EPS * np.abs(total)):
            break
    return -EULER_GAMMA - np.log(x) + total


def _e1_cf_scaled(x):
    """Continued fraction for exp(x) * E1(x), x > 1 (modified Lentz)."""
    tol = 4.0 * np.finfo(float).eps
    b = x + 1.0
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, 500):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        # freeze converged elements so that rounding noise cannot stall the batch
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) <= tol
        if np.all(done):
            return h
    raise ConvergenceError("E1 continued fraction did not converge", i, float(np.max(np.abs(delta - 1.0))))


def e1(x):
    """Exponential integral ``E1(x) = int_x^inf exp(-t)/t dt`` for x > 0.

    Power series for x <= 1, continued fraction for x > 1.
    """
    x, scalar = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("e1 requires x > 0")
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        out[small] = _e1_series(x[small])
    if np.any(~small):
        xl = x[~small]
        out[~small] = _e1_cf_scaled(xl) * np.exp(-xl)
    return _ret(out, scalar)


def log_e1(x):
    """``log(E1(x))`` without underflow for large x."""
    x, scalar = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("log_e1 requires x > 0")
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        out[small] = np.log(_e1_series(x[small]))
    if np.any(~small):
        xl = x[~small]
        out[~small] = np.log(_e1_cf_scaled(xl)) - xl
    return _ret(out, scalar)


def _ei_positive(x):
    out = np.empty_like(x)
    series = x <= 40.0
    if np.any(series):
        xs = x[series]
        total = np.zeros_like(xs)
        term = np.ones_like(xs)
        for k in range(1, 400):
            term = term * xs / k
            contrib = term / k
            total += contrib
            if np.all(contrib <= _EPS * total):
                break
        out[series] = EULER_GAMMA + np.log(xs) + total
    if np.any(~series):
        xa = x[~series]
        total = np.ones_like(xa)
        term = np.ones_like(xa)
        for k in range(1, 60):
            term = term * k / xa
            total += term
            if np.all(term <= _EPS * total):
                break
        out[~series] = np.exp(xa) / xa * total
    return out


def ei(x):
    """Exponential integral Ei (principal value for x > 0)."""
    x, scalar = _as_array(x)
    if np.any(x == 0) or np.any(np.isnan(x)):
        raise DomainError("ei is undefined at x = 0")
    out = np.empty_like(x)
    neg = x < 0
    if np.any(neg):
        out[neg] = -e1(-x[neg])
    if np.any(~neg):
        out[~neg] = _ei_positive(x[~neg])
    return _ret(out, scalar)


def _bisect_increasing(f, target, lo, hi, n_iter=90, tol=1e-14):
    """Vectorised bisection for increasing ``f`` on ``[lo, hi]``."""
    lo = np.broadcast_to(np.asarray(lo, float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, float), target.shape).copy()
    for it in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = f(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol * np.maximum(1.0, np.abs(mid))):
            return 0.5 * (lo + hi)
    width = float(np.max(hi - lo))
    raise ConvergenceError("bisection did not reach tolerance", n_iter, width)


def ei_inverse(y, mode=ApproxMode.REFERENCE, branch="negative"):
    """Solve ``Ei(x) = y`` for y < 0.

    Ei takes every negative value twice: once on x < 0 (where Ei = -E1(-x))
    and once on (0, EI_ROOT). ``branch`` picks which root REFERENCE mode
    returns. The load distribution needs the negative branch.

    PAPER_APPROX mode returns the asymptotic form ``e^y / (1 + e^y)``,
    which tracks the positive branch only loosely (0.5 vs 0.3725 as y -> 0).
    """
    y, scalar = _as_array(y)
    if np.any(~(y < 0)):
        raise DomainError("ei_inverse requires y < 0")
    if mode is ApproxMode.PAPER_APPROX:
        return _ret(special.expit(y), scalar)
    if branch == "negative":
        v = -y  # solve E1(u) = v, x = -u
        out = np.empty_like(v)
        tiny = v >= 40.0
        # E1(u) = -gamma - ln u + O(u); u < 1e-17 here
        out[tiny] = np.exp(-EULER_GAMMA - v[tiny])
        rest = ~tiny
        if np.any(rest):
            # log E1 is decreasing in t = ln u; bisect on -log E1
            t = _bisect_increasing(
                lambda t: -log_e1(np.exp(t)), -np.log(v[rest]), -45.0, math.log(800.0)
            )
            out[rest] = np.exp(t)
        return _ret(-out, scalar)
    if branch == "positive":
        out = np.empty_like(y)
        tiny = y <= -40.0
        out[tiny] = np.exp(y[tiny] - EULER_GAMMA)
        rest = ~tiny
        if np.any(rest):
            t = _bisect_increasing(
                lambda t: _ei_positive(np.exp(t)), y[rest], -45.0, math.log(EI_ROOT)
            )
            out[rest] = np.exp(t)
        return _ret(out, scalar)
    raise ValueError(f"unknown branch {branch!r}")


def gamma_lower_inc(x, a):
    """Lower incomplete gamma ``int_0^x t^(a-1) exp(-t) dt`` (unregularised)."""
    x, scalar = _as_array(x)
    if not a > 0:
        raise DomainError("gamma_lower_inc requires a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("gamma_lower_inc requires x >= 0")
    return _ret(special.gammainc(a, x) * special.gamma(a), scalar)


# Barry et al. interpolation, constants as printed (b, 0.46 and 0.43 are rounded)
BARRY_K2 = math.exp(-EULER_GAMMA)
BARRY_B = 1.04207
_BARRY_POW = math.sqrt(31.0 / 26.0)


def _barry(x):
    xp = x**_BARRY_POW
    h = 1.0 / (1.0 + x * np.sqrt(x)) + 0.46 * xp / (1.0 + 0.43 * xp)
    beta = 1.0 - 1.0 / (h + BARRY_B * x) ** 2
    k2 = BARRY_K2
    num = np.exp(-x) * np.log(k2 / x + k2 + (1.0 - k2) * beta)
    return num / (k2 + (1.0 - k2) * np.exp(-x / (1.0 - k2)))


def e1_barry(x):
    """Barry's closed-form interpolation of E1, valid on 1 <= x <= 50."""
    x, scalar = _as_array(x)
    if np.any((x < 1.0) | (x > 50.0)) or np.any(np.isnan(x)):
        raise DomainError("e1_barry is only defined on [1, 50]")
    return _ret(_barry(x), scalar)


def e1_asymptotic_smallx(x, mode=ApproxMode.PAPER_APPROX):
    """Three-term small-argument expansion of E1 for 0 < x < 1.

    PAPER_APPROX keeps the printed quadratic coefficient 1/8; REFERENCE
    uses the Taylor coefficient 1/4 (``E1 = -gamma - ln x + x - x^2/4 + ...``).
    """
    x, scalar = _as_array(x)
    if np.any(~(x > 0)) or np.any(x >= 1):
        raise DomainError("e1_asymptotic_smallx requires 0 < x < 1")
    quad = 8.0 if mode is ApproxMode.PAPER_APPROX else 4.0
    return _ret(-EULER_GAMMA - np.log(x) + x - x * x / quad, scalar)


def geller_ng_i1(x):
    """Primitive of ``x E1(x) exp(-3.5 x)``; tends to 0 at infinity."""
    x, scalar = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("geller_ng_i1 requires x > 0")
    val = (2.0 / 7.0) ** 2 * (
        e1(4.5 * x) - (1.0 + 3.5 * x) * np.exp(-3.5 * x) * e1(x) + (7.0 / 9.0) * np.exp(-4.5 * x)
    )
    return _ret(np.asarray(val), scalar)


def geller_ng_i2(x):
    """Primitive of ``E1(x) exp(-3.5 x)``; tends to 0 at infinity."""
    x, scalar = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("geller_ng_i2 requires x > 0")
    val = (2.0 / 7.0) * (e1(4.5 * x) - np.exp(-3.5 * x) * e1(x))
    return _ret(np.asarray(val), scalar)
