"""Filters of the Gaussian two-scale relation and an exact orthogonal variant.

All filters are 1-periodic, even functions of the frequency p and are built
from theta_3.  The Gaussian scaling function has Fourier transform
exp(-pi^2 p^2 / alpha), so m0(p) = phi_hat(2p) / phi_hat(p) periodized.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import ConsistencyError, ParameterError
from .special import theta3, theta3_dual_sum

RADICAND_SLACK = 1e-15
# below this alpha the dynamic range of M00 costs several digits
M00_WARN_ALPHA = 0.3


def _out(v, p):
    return float(v) if np.ndim(p) == 0 else v


def _theta(x, gamma):
    """theta_3(pi x, e^{-gamma}) up to the factor sqrt(pi/gamma) when gamma < pi.

    Returns (value, scale) with theta_3 = scale * value, so that ratios and
    the m0 normalization cancel the prefactor exactly.
    """
    x = np.asarray(x, dtype=float)
    # reduce before scaling by pi so that x and x + 1 give identical values
    z = np.pi * (x - np.round(x))
    if gamma < math.pi:
        return theta3_dual_sum(z, gamma), math.sqrt(math.pi / gamma)
    return theta3(z, math.exp(-gamma)), 1.0


def filter_m0(p, alpha: float):
    """sqrt(alpha / 3pi) theta_3(pi p, e^{-alpha/3}) = sum_n exp(-(3 pi^2 / alpha)(p - n)^2)."""
    p = np.asarray(p, dtype=float)
    v, scale = _theta(p, alpha / 3)
    if scale != 1.0:
        # sqrt(alpha / 3pi) * sqrt(3pi / alpha) = 1
        return _out(v, p)
    return _out(math.sqrt(alpha / (3 * math.pi)) * v, p)


def _ratio(p, alpha):
    num, _ = _theta(p, alpha / 2)
    den, _ = _theta(2 * p, alpha / 2)
    return num / den


def filter_Ma(p, alpha: float):
    """m0(p) (theta_3(pi p, e^{-alpha/2}) / theta_3(2 pi p, e^{-alpha/2}))^{1/2}."""
    p = np.asarray(p, dtype=float)
    return _out(filter_m0(p, alpha) * np.sqrt(_ratio(p, alpha)), p)


def filter_M00(p, alpha: float):
    """Dual filter m0(p) theta_3(pi p, e^{-alpha/2}) / theta_3(2 pi p, e^{-alpha/2})."""
    p = np.asarray(p, dtype=float)
    return _out(filter_m0(p, alpha) * _ratio(p, alpha), p)


def _t8(p, alpha):
    # common prefactors cancel in every use
    return _theta(p, alpha / 8)[0]


def eta(alpha: float) -> float:
    """1 - theta_3(0, e^{-alpha/8}) / (2 theta_3(0, e^{-alpha/2})).

    With T(p) = theta_3(pi p, e^{-alpha/8}) the half-period identity gives
    2 theta_3(0, e^{-alpha/2}) = T(0) + T(1/2), so eta = T(1/2) / (T(0) + T(1/2)),
    which avoids cancelling two numbers that agree to ~40 digits.
    """
    t0, th = _t8(0.0, alpha), _t8(0.5, alpha)
    return float(th / (t0 + th))


def filter_M0_exact(p, alpha: float):
    """Exact quadrature mirror filter close to Ma.

    The radicand theta_3(pi p, e^{-alpha/8}) / (2 theta_3(2 pi p, e^{-alpha/2}))
    + eta cos(2 pi p) is evaluated as T(p) / (T(p) + T(p + 1/2)) + eta cos(2 pi p),
    the same quantity written without cancellation near p = 1/2.
    """
    p = np.asarray(p, dtype=float)
    t, th = _t8(p, alpha), _t8(p + 0.5, alpha)
    rad = np.asarray(t / (t + th) + eta(alpha) * np.cos(2 * np.pi * p))
    if np.any(rad < -RADICAND_SLACK):
        worst = float(np.min(rad))
        raise ConsistencyError(f"negative radicand {worst:.3g} in M0")
    return _out(np.sqrt(np.maximum(rad, 0.0)), p)


def filter_M_exact(p, alpha: float):
    """(m0(p) - m0(1/2)) / (m0(0) - m0(1/2)); equals 1 at 0 and 0 at 1/2."""
    p = np.asarray(p, dtype=float)
    q = math.exp(-alpha / 3)
    half = theta3(math.pi / 2, q)
    v = (theta3(np.pi * (p - np.round(p)), q) - half) / (theta3(0.0, q) - half)
    return _out(v, p)


PHI_TRUNCATION = 1e-4


def phi_exact_hat(p, alpha: float, J: int | None = None):
    """Truncated product prod_{j=1}^{J} M_exact(p / 2^j).

    Without J, each p uses the smallest J with 2^{-J} |p| < 1e-4; the
    omitted factors then differ from 1 by far less than 1e-8.
    """
    p = np.asarray(p, dtype=float)
    if J is not None and J < 1:
        raise ParameterError("J must be at least 1")
    pmax = float(np.max(np.abs(p))) if p.size else 0.0
    if J is None:
        J = max(1, math.ceil(math.log2(pmax / PHI_TRUNCATION)) + 1) if pmax > 0 else 1
    out = np.ones_like(p)
    for j in range(1, J + 1):
        out = out * filter_M_exact(p / 2.0**j, alpha)
    return _out(out, p)


def project_coarser(f_coeffs, alpha: float, N: int):
    """Coefficients g_n, n = 0..N-1 (mod N), of the next coarser scale.

    f_coeffs[k] is the weight of phi(x - k).  The frequency integral is
    discretized on N equispaced points, which is exact up to aliasing
    because the integrand is 1-periodic; N must exceed the output support.
    """
    f = np.asarray(f_coeffs, dtype=float)
    if N < 1:
        raise ParameterError("N must be positive")
    if alpha < M00_WARN_ALPHA:
        warnings.warn(
            f"alpha={alpha} < {M00_WARN_ALPHA}: the dual filter's dynamic range loses digits",
            RuntimeWarning,
            stacklevel=2,
        )
    if not np.any(f):
        return np.zeros(N)
    p = np.arange(N) / N
    k = np.arange(f.size)

    def symbol(x):
        return np.exp(-2j * np.pi * np.outer(x, k)) @ f

    bracket = symbol(p / 2) * filter_M00(p / 2, alpha) + symbol(p / 2 + 0.5) * filter_M00(
        p / 2 + 0.5, alpha
    )
    # (1/N) sum_m H(p_m) e^{2 pi i n p_m}
    g = np.fft.ifft(bracket) / math.sqrt(2)
    return g.real


def refine(g_coeffs, alpha: float, rel_cutoff: float = 1e-17):
    """Fine-scale weights f_k = 2^{-1/2} sum_n g_n h_{k - 2n}; returns (k0, f).

    h_k = sqrt(4 alpha / 3 pi) exp(-alpha k^2 / 3) are the two-scale
    coefficients; g_coeffs[n] is the weight of 2^{-1/2} phi(x/2 - n).
    """
    g = np.asarray(g_coeffs, dtype=float)
    kmax = math.floor(math.sqrt(-3.0 * math.log(rel_cutoff) / alpha))
    kk = np.arange(-kmax, kmax + 1)
    h = math.sqrt(4 * alpha / (3 * math.pi)) * np.exp(-alpha * kk * kk / 3.0)
    up = np.zeros(2 * g.size - 1)
    up[::2] = g
    return -kmax, np.convolve(up, h) / math.sqrt(2)
