"""Moments, expectations and distribution functions of expansions.

Every basis function phi_jk is the density of 2^-j (U + k) scaled by 2^(-j/2),
with U ~ N(0, 1/(2 alpha)), so raw moments reduce to Gaussian moments
mu_k^(n) = E[(U + k)^n] that satisfy a two-term recurrence.
"""

from __future__ import annotations

import math

import numpy as np

from .core import GmraExpansion
from .errors import MomentDivergenceError, ParameterError
from .quadrature import AdaptiveConfig, adaptive_integrate
from .special import erfc

# erfc(-z)/2 equals 1 (resp. 0) to double precision beyond this |z|
_ERF_FLAT = 27.0


def basis_moment(k, n: int, alpha: float):
    """mu_k^(n) = E[(U + k)^n], U ~ N(0, 1/(2 alpha)); vectorized in k."""
    if n < 0:
        raise ParameterError("moment order must be nonnegative")
    k = np.asarray(k, dtype=float)
    prev, cur = np.ones_like(k), k.copy()
    if n == 0:
        out = prev
    else:
        for m in range(2, n + 1):
            prev, cur = cur, k * cur + (m - 1) / (2 * alpha) * prev
        out = cur
    return float(out) if out.ndim == 0 else out


def moment(e: GmraExpansion, n: int) -> float:
    """Raw moment int t^n p(t) dt summed scale by scale."""
    if n < 0:
        raise ParameterError("moment order must be nonnegative")
    if n >= 1 and e.heavy_tailed:
        raise MomentDivergenceError(f"moment of order {n} diverges for a heavy-tailed density")
    alpha = e.params.alpha
    total = 0.0
    # coarse scales carry the largest powers; sum fine to coarse for accuracy
    for j in sorted(e.scales, reverse=True):
        k0, w = e.scales[j]
        k = k0 + np.arange(w.size, dtype=float)
        total += 2.0 ** (-j * (n + 0.5)) * float(w @ basis_moment(k, n, alpha))
    return total


# panel width in basis shifts for scale-by-scale quadrature
_PANEL_SHIFTS = 64


def _split(e):
    """(tilt, body) with e = tilt(t) * body(t); tilt is None for a plain expansion."""
    if isinstance(e, GmraExpansion):
        return None, e
    c, d = e.tilt_c, e.tilt_d
    return (lambda t: np.exp(c * t + d)), e.body


def _integrate_parts(g, e, upper, cfg):
    """int_{-inf}^{upper} g(t) p(t) dt, one scale at a time.

    Each scale's part is a sum of Gaussians of width ~2^-j, so panels of
    _PANEL_SHIFTS shifts let the adaptive rule resolve every bump; a single
    pass over the whole support can step over narrow components.
    """
    tilt, body = _split(e)
    total = 0.0
    for j, (k0, w) in body.scales.items():
        part = GmraExpansion(body.params, {j: (k0, w)})
        lo, hi = part.support()
        hi = min(hi, upper)
        if not lo < hi:
            continue
        if tilt is None:
            f = lambda t, part=part: g(t) * part(t)  # noqa: E731
        else:
            f = lambda t, part=part: g(t) * tilt(t) * part(t)  # noqa: E731
        panels = max(1, math.ceil((hi - lo) * 2.0**j / _PANEL_SHIFTS))
        edges = np.linspace(lo, hi, panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            total += adaptive_integrate(f, a, b, cfg)
    return total


def expectation(u, e, cfg: AdaptiveConfig | None = None) -> float:
    """E[u(Z)] by adaptive quadrature of u(t) p(t) over the effective support.

    `e` is a GmraExpansion or a TiltedExpansion.
    """
    return _integrate_parts(u, e, math.inf, cfg or AdaptiveConfig(tol=1e-13))


def _cdf_expansion(e: GmraExpansion, t):
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    out = np.zeros(flat.size)
    sa = math.sqrt(e.params.alpha)
    band = math.ceil(_ERF_FLAT / sa) + 1
    for j, (k0, w) in e.scales.items():
        mass = 2.0 ** (-j / 2) * w
        # cum[i] = sum of mass over shifts k0 .. k0 + i - 1
        cum = np.concatenate([[0.0], np.cumsum(mass)])
        # clipping keeps the integer cast finite; far-away t saturate anyway
        z = np.clip(flat * 2.0**j, k0 - 2 * band - 2, k0 + w.size + 2 * band + 2)
        centre = np.floor(z).astype(np.int64)
        first = centre - band - k0
        # shifts far to the left of t contribute their full mass
        out += cum[np.clip(first, 0, w.size)]
        cols = np.arange(2 * band + 1)
        idx = first[:, None] + cols
        valid = (idx >= 0) & (idx < w.size)
        kk = idx + k0
        terms = 0.5 * erfc(-sa * (z[:, None] - kk)) * mass[np.clip(idx, 0, w.size - 1)]
        out += np.where(valid, terms, 0.0).sum(axis=1)
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def cdf(e, t, cfg: AdaptiveConfig | None = None):
    """P(Z <= t).

    Expansions use the closed-form Gaussian integral of each basis function;
    other densities (tilted expansions) are integrated numerically.
    """
    if isinstance(e, GmraExpansion):
        return _cdf_expansion(e, t)
    cfg = cfg or AdaptiveConfig(tol=1e-13)
    t_arr = np.asarray(t, dtype=float)
    one = lambda x: np.ones_like(x)  # noqa: E731
    vals = [_integrate_parts(one, e, float(x), cfg) for x in t_arr.ravel()]
    out = np.array(vals)
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)
