"""Scalar special functions and Gauss-Legendre rules.

Everything here is self-contained (no scipy.special) so that the tests can
use scipy as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ParameterError

EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992
EPS = np.finfo(float).eps

# Largest exponent argument kept in Gaussian sums (e^-40 ~ 4e-18).
_TAIL = 40.0


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int


def _gamma_of(q):
    if not 0.0 <= q < 1.0:
        raise DomainError(f"nome q must lie in [0, 1), got {q!r}")
    if q == 0.0:
        return math.inf
    return -math.log(q)


def theta3(z, q):
    """Jacobi theta_3(z, q) = sum_n q^(n^2) e^(2inz) for real z (vectorized in z).

    For q > e^-pi the series is evaluated through the Poisson-dual form
    sqrt(pi/gamma) * sum_n exp(-(z - n pi)^2 / gamma), which converges fast
    exactly where the direct series does not.
    """
    gamma = _gamma_of(q)
    z = np.asarray(z, dtype=float)
    if math.isinf(gamma):
        out = np.ones_like(z)
        return out if out.ndim else float(out)
    if gamma >= math.pi:
        nmax = int(math.ceil(math.sqrt(_TAIL / gamma))) + 1
        n = np.arange(1, nmax + 1)
        terms = np.exp(-gamma * n * n)
        out = 1.0 + 2.0 * np.cos(2.0 * np.multiply.outer(z, n)) @ terms
    else:
        # reduce to z in [-pi/2, pi/2]; theta_3 has period pi in z
        zr = z - math.pi * np.round(z / math.pi)
        nmax = int(math.ceil(math.sqrt(_TAIL * gamma) / math.pi)) + 2
        n = np.arange(-nmax, nmax + 1)
        d = np.subtract.outer(zr, math.pi * n)
        out = math.sqrt(math.pi / gamma) * np.exp(-d * d / gamma).sum(axis=-1)
    return out if out.ndim else float(out)


def theta3_dual_sum(z, gamma):
    """sum_n exp(-(z - n pi)^2 / gamma), i.e. theta_3(z, e^-gamma) / sqrt(pi / gamma).

    Useful when the sqrt(pi/gamma) prefactor cancels analytically, as in
    ratios of theta functions with the same nome.
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    z = np.asarray(z, dtype=float)
    zr = z - math.pi * np.round(z / math.pi)
    nmax = int(math.ceil(math.sqrt(_TAIL * gamma) / math.pi)) + 2
    n = np.arange(-nmax, nmax + 1)
    d = np.subtract.outer(zr, math.pi * n)
    out = np.exp(-d * d / gamma).sum(axis=-1)
    return out if out.ndim else float(out)


def theta3_minus_one(q):
    """theta_3(0, q) - 1 without cancellation for small q."""
    gamma = _gamma_of(q)
    if math.isinf(gamma):
        return 0.0
    if gamma < 1.0:
        return theta3(0.0, q) - 1.0
    total = 0.0
    n = 1
    while True:
        term = math.exp(-gamma * n * n)
        total += term
        if term <= EPS * total * 1e-3:
            break
        n += 1
    return 2.0 * total


def theta2(q):
    """theta_2(0, q) = 2 sum_{n>=0} q^((n+1/2)^2)."""
    gamma = _gamma_of(q)
    if math.isinf(gamma):
        return 0.0
    if gamma < 0.5:
        # dual form: sqrt(pi/gamma) sum_n (-1)^n exp(-pi^2 n^2 / gamma)
        nmax = int(math.ceil(math.sqrt(_TAIL * gamma) / math.pi)) + 2
        n = np.arange(-nmax, nmax + 1)
        return float(
            math.sqrt(math.pi / gamma)
            * np.sum((-1.0) ** n * np.exp(-math.pi**2 * n * n / gamma))
        )
    total = 0.0
    n = 0
    while True:
        term = math.exp(-gamma * (n + 0.5) ** 2)
        total += term
        if term <= EPS * total * 1e-3:
            break
        n += 1
    return 2.0 * total


def epsilon_of_alpha(alpha):
    """Accuracy of the Gaussian basis with exponent alpha: theta_3(0, e^(-3pi^2/4alpha)) - 1."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha!r}")
    if alpha > 3 * math.pi:
        raise ParameterError(f"alpha must not exceed 3*pi, got {alpha!r}")
    return theta3_minus_one(math.exp(-3 * math.pi**2 / (4 * alpha)))


def _k0_series(x):
    # K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} (x^2/4)^k / (k!)^2 H_k
    y = 0.25 * x * x
    term = 1.0
    i0 = 1.0
    tail = 0.0
    harmonic = 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * k)
        harmonic += 1.0 / k
        i0 += term
        tail += term * harmonic
        if term * max(harmonic, 1.0) < 1e-18 * (abs(tail) + i0):
            break
    return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k0_trapezoid(x):
    # K0(x) = e^-x int_0^inf exp(-x (cosh t - 1)) dt.  The integrand is analytic,
    # so the trapezoid rule converges geometrically; for large x it narrows like
    # exp(-x t^2 / 2), hence a step proportional to 1/sqrt(x).
    h = min(0.1, 0.5 / math.sqrt(x))
    top = math.acosh(1.0 + _TAIL / x)
    t = np.arange(0.0, top + h, h)
    w = np.full(t.size, h)
    w[0] = 0.5 * h
    # cosh t - 1 = 2 sinh^2(t/2) without cancellation
    return math.exp(-x) * float(np.exp(-2.0 * x * np.sinh(0.5 * t) ** 2) @ w)


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero, for x > 0."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"K0 is defined for x > 0, got {x!r}")
    if x <= 2.0:
        return _k0_series(x)
    return _k0_trapezoid(x)


def bessel_k0_array(x):
    x = np.asarray(x, dtype=float)
    return np.vectorize(bessel_k0, otypes=[float])(x)


def _legendre_with_derivative(n, x):
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    k = np.arange(1, order + 1)
    x = np.cos(np.pi * (k - 0.25) / (order + 0.5))
    for _ in range(100):
        p, dp = _legendre_with_derivative(order, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p, dp = _legendre_with_derivative(order, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order_idx = np.argsort(x)
    x = x[order_idx]
    w = w[order_idx]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w, order)


def gauss_legendre(order):
    """Gauss-Legendre rule with `order` nodes on [-1, 1]."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 64:
        raise ParameterError(f"rule order must be an integer in [1, 64], got {order!r}")
    return _gauss_legendre(int(order))


_ERF_SWITCH = 1.5
_ERF_SERIES_TERMS = 40
_ERFC_CF_TERMS = 100


def _erf_series(x):
    # erf(x) = 2x/sqrt(pi) e^(-x^2) sum_n (2x^2)^n / (1*3*...*(2n+1)); all terms positive
    y = 2.0 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(1, _ERF_SERIES_TERMS):
        term = term * y / (2 * n + 1)
        total = total + term
    return 2.0 / math.sqrt(math.pi) * x * np.exp(-x * x) * total


def _erfc_cf(x):
    # erfc(x) = e^(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0
    tail = x.copy()
    for k in range(_ERFC_CF_TERMS, 0, -1):
        tail = x + 0.5 * k / tail
    return np.exp(-x * x) / (math.sqrt(math.pi) * tail)


def erf(x):
    """Error function, vectorized, absolute error ~1e-16."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    out = np.empty_like(a)
    small = a <= _ERF_SWITCH
    out[small] = _erf_series(a[small])
    out[~small] = 1.0 - _erfc_cf(a[~small])
    out = np.copysign(out, x)
    return out if out.ndim else float(out)


def erfc(x):
    """Complementary error function with full relative accuracy for large x."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    out = np.empty_like(a)
    small = a <= _ERF_SWITCH
    out[small] = 1.0 - _erf_series(a[small])
    out[~small] = _erfc_cf(a[~small])
    out = np.where(x < 0, 2.0 - out, out)
    return out if out.ndim else float(out)
