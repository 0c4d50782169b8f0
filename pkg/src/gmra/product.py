"""Densities of products of independent random variables as GMRA expansions.

Three pipelines:

* product_with_normal: Z = X Y with Y normal and X given pointwise.  For each
  scale j the coefficients of every shift k come from one vector-valued
  adaptive integral over tau in [0, 1].
* product_gmra: Z = X Y with both densities given as expansions.  Each basis
  function of g is itself a scaled normal density, so the same integral
  applies with f evaluated from its expansion.  A fixed-node variant driven
  by precomputed BasisProductTables is available for expansions with small
  shifts.
* product_bivariate_normal: correlated normals reduce to a product of two
  independent normals times an exponential tilt in t.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GmraExpansion, GmraParams, ScaleAccumulator, compress, expansion_from_gaussians
from .distributions import DistributionSpec, Expansion, Mixture, Normal
from .errors import NonConvergenceError, ParameterError, TableRangeError
from .mixture import fit_distribution, fit_laplace_unit
from .quadrature import AdaptiveConfig, adaptive_integrate, quadrature_sum
from .special import gauss_legendre

LN2 = math.log(2.0)
# Gaussian factors below e^-42 (~6e-19) are dropped from shift bands
BAND_ARG = 42.0
TABLE_CUTOFF = 1e-17


def thread_count(workers: int | None = None) -> int:
    """Worker threads for per-scale work: explicit argument, else GMRA_THREADS (0 = auto)."""
    if workers is None:
        raw = os.environ.get("GMRA_THREADS", "1").strip() or "1"
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ParameterError(f"GMRA_THREADS must be an integer, got {raw!r}") from exc
    if workers < 0:
        raise ParameterError("thread count must be nonnegative")
    return workers or (os.cpu_count() or 1)


def _map(fn, items, workers):
    n = thread_count(workers)
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _finalize(params, pieces, heavy, metadata) -> GmraExpansion:
    """Merge per-scale results and compress at the configured threshold.

    No fixed relative cutoff is applied: a weight that is tiny next to the
    largest one can still matter at fine scales, where phi_jk peaks at 2^(j/2).
    """
    acc = ScaleAccumulator()
    for j, k0, w in pieces:
        acc.add(j, k0, w)
    e = GmraExpansion(params, acc.scales, metadata, heavy)
    return compress(e, params.drop_threshold)


def _integrate_scale(integrand, cfg: AdaptiveConfig, where: str):
    """Adaptive integral over tau in [0, 1] with tolerance relative to the scale's size.

    Returns None when the integrand vanishes on the coarse rule.
    """
    rough = np.abs(quadrature_sum(integrand, 0.0, 1.0, cfg.rule))
    rough = np.maximum(rough, np.abs(quadrature_sum(integrand, 0.0, 0.5, cfg.rule)))
    rough = np.maximum(rough, np.abs(quadrature_sum(integrand, 0.5, 1.0, cfg.rule)))
    size = float(np.max(rough))
    if size == 0.0:
        return None
    local = AdaptiveConfig(max(cfg.tol * size, 1e-300), cfg.rule_order, cfg.max_depth, cfg.max_intervals)
    try:
        return adaptive_integrate(integrand, 0.0, 1.0, local)
    except NonConvergenceError as exc:
        raise NonConvergenceError(f"{where}: {exc}", exc.interval) from exc


# -- density times normal ----------------------------------------------------


def product_with_normal(
    f: DistributionSpec,
    mu_y: float,
    sigma_y: float,
    params: GmraParams | None = None,
    cfg: AdaptiveConfig | None = None,
    *,
    workers: int | None = None,
) -> GmraExpansion:
    """Expansion of the density of X Y, X ~ f, Y ~ N(mu_y, sigma_y^2)."""
    params = params or GmraParams()
    cfg = cfg or AdaptiveConfig()
    if not sigma_y > 0:
        raise ParameterError("sigma_y must be positive")
    alpha = params.alpha
    r = math.sqrt(2 * alpha) * sigma_y
    mu_p = mu_y / r
    c0 = 1.0 / (math.sqrt(2 * math.pi) * sigma_y)
    # e^{-A d^2} with A >= alpha/15 on tau in [0, 1]
    half = math.sqrt(BAND_ARG * 15.0 / alpha)
    kmax = math.ceil(4 * abs(mu_p) + half)
    ks = np.arange(-kmax, kmax + 1, dtype=float)

    def scale(j):
        def integrand(tau):
            q = 4.0 ** (tau - 2)
            a = (alpha * q / (1 - q))[:, None]
            shift = (mu_p * 2.0 ** (2 - tau))[:, None]
            xi = 2.0 ** (2 - j - tau) / r
            fp = np.asarray(f.pdf(xi), dtype=float)[:, None]
            fm = np.asarray(f.pdf(-xi), dtype=float)[:, None]
            dm = ks - shift
            dp = ks + shift
            body = fp * np.exp(-a * dm * dm) + fm * np.exp(-a * dp * dp)
            return c0 * body / np.sqrt(1 - q)[:, None]

        w = _integrate_scale(integrand, cfg, f"scale j={j}, shifts {-kmax}..{kmax}")
        if w is None:
            return None
        return j, -kmax, 2.0 ** (-j / 2) * LN2 * w

    pieces = [p for p in _map(scale, range(params.j_min, params.j_max + 1), workers) if p]
    meta = f"product {f} x normal({mu_y:g},{sigma_y:g}) alpha={alpha:g}"
    return _finalize(params, pieces, f.heavy_tailed, meta)


def order_factors(x: DistributionSpec, y: DistributionSpec):
    """Order two factors by decreasing mu^2 / (2 sigma^2); ties keep input order."""
    if y.ordering_ratio() > x.ordering_ratio():
        return y, x
    return x, y


def product_normals(x: Normal, y: Normal, params=None, cfg=None, *, ordered=True, workers=None):
    f, g = order_factors(x, y) if ordered else (x, y)
    return product_with_normal(f, g.mu, g.sigma, params, cfg, workers=workers)


# -- expansion times expansion ----------------------------------------------


def _gaussian_band_sum(coeffs_k0, coeffs, u, a, reach):
    """sum_m c_m exp(-a (u - m)^2) for each entry of u, using only |u - m| <= reach."""
    span = int(math.ceil(reach)) + 1
    padded = np.concatenate([np.zeros(span + 1), coeffs, np.zeros(span + 1)])
    base = np.floor(u).astype(np.int64) - span
    cols = np.arange(2 * span + 2)
    m = base[..., None] + cols
    idx = np.clip(m - coeffs_k0 + span + 1, 0, padded.size - 1)
    d = u[..., None] - m
    return np.einsum("...c,...c->...", np.exp(-a[..., None] * d * d), padded[idx])


def _expansion_ratio(e: GmraExpansion) -> float:
    spec = Expansion(e)
    return spec.ordering_ratio()


def product_gmra(
    f_exp: GmraExpansion,
    g_exp: GmraExpansion,
    tables: "BasisProductTables | None" = None,
    cfg: AdaptiveConfig | None = None,
    *,
    ordered: bool = True,
    workers: int | None = None,
) -> GmraExpansion:
    """Expansion of the density of X Y from expansions of the densities of X and Y.

    With `tables`, the tau integral uses the tables' fixed Gauss-Legendre
    nodes (accurate while the shifts involved stay small).  Without, every
    (output scale, g-scale) pair is integrated adaptively with f evaluated
    pointwise, which handles arbitrarily large shifts.
    """
    if f_exp.params.alpha != g_exp.params.alpha:
        raise ParameterError("expansions must share alpha")
    if ordered and _expansion_ratio(g_exp) > _expansion_ratio(f_exp):
        f_exp, g_exp = g_exp, f_exp
    if tables is not None:
        return _product_gmra_tables(f_exp, g_exp, tables)
    return _product_gmra_adaptive(f_exp, g_exp, cfg or AdaptiveConfig(), workers)


def _product_gmra_adaptive(f_exp, g_exp, cfg, workers):
    params = f_exp.params
    alpha = params.alpha
    pref = math.sqrt(alpha / math.pi) * LN2
    lo, hi = f_exp.support()
    xmax = max(abs(lo), abs(hi))
    reach = math.sqrt(BAND_ARG / alpha)
    pieces = []
    for l, (m0, b) in g_exp.scales.items():
        m1, m2 = m0 - reach, m0 + b.size - 1 + reach
        # '-' branch shifts k with 2^{tau-2} k in [m1, m2]; '+' branch mirrored
        k_lo = math.floor(min(2 * m1, 4 * m1))
        k_hi = math.ceil(max(2 * m2, 4 * m2))
        km = np.arange(k_lo, k_hi + 1, dtype=float)
        cache: dict = {}

        def bsum(tau, m0=m0, b=b, km=km, cache=cache):
            # the node array identifies the subinterval, so sums are shared across J
            key = (float(tau[0]), float(tau[-1]))
            if key not in cache:
                q = 4.0 ** (tau - 2)
                u = np.multiply.outer(2.0 ** (tau - 2), km)
                a = np.broadcast_to((alpha / (1 - q))[:, None], u.shape)
                cache[key] = _gaussian_band_sum(m0, b, u, a, reach)
            return cache[key]

        j_first = params.j_min
        if xmax > 0:
            j_first = max(params.j_min, l - math.floor(math.log2(xmax)))

        def scale(J, l=l, bsum=bsum, km=km):
            def integrand(tau):
                q = 4.0 ** (tau - 2)
                xi = 2.0 ** (2 - J + l - tau)
                fp = np.asarray(f_exp(xi))[:, None]
                fm = np.asarray(f_exp(-xi))[:, None]
                bm = bsum(tau)
                return np.concatenate([fp * bm, fm * bm], axis=1) / np.sqrt(1 - q)[:, None]

            w = _integrate_scale(integrand, cfg, f"output scale J={J}, g-scale l={l}")
            if w is None:
                return None
            w = pref * 2.0 ** ((l - J) / 2) * w
            n = km.size
            minus = (J, int(km[0]), w[:n])
            plus = (J, -int(km[-1]), w[n:][::-1])
            return minus, plus

        for res in _map(scale, range(j_first, params.j_max + 1), workers):
            if res:
                pieces.extend(res)
    meta = f"product of expansions ({f_exp.metadata}) x ({g_exp.metadata})"
    return _finalize(params, pieces, f_exp.heavy_tailed or g_exp.heavy_tailed, meta)


@dataclass(frozen=True)
class BasisProductTables:
    """Fixed-node tables of the Gaussian factors of the basis-pair integral.

    Arrays are indexed [j - j_lo, m - m_lo, i] for U and [k - k_lo, m' - mp_lo, i]
    for V; tau and eta hold the nodes on [0, 1] and the weights including the
    1/sqrt(1 - 4^{tau-2}) factor.
    """

    alpha: float
    tau: np.ndarray
    eta: np.ndarray
    j_range: tuple[int, int]
    m_range: tuple[int, int]
    mp_range: tuple[int, int]
    k_range: tuple[int, int]
    U_minus: np.ndarray
    U_plus: np.ndarray
    V_minus: np.ndarray
    V_plus: np.ndarray
    cutoff: float = TABLE_CUTOFF

    def U(self, sign: int, j, m, i):
        """U^{sign}_{j,m} at node i for real m (table-free evaluation)."""
        return math.exp(-self.alpha * (2.0 ** (2 - j - self.tau[i]) + sign * m) ** 2)

    def V(self, sign: int, k, mp, i):
        q = 4.0 ** (self.tau[i] - 2)
        return math.exp(-(self.alpha / (1 - q)) * (2.0 ** (self.tau[i] - 2) * k + sign * mp) ** 2)


def build_basis_tables(
    params: GmraParams,
    M: int,
    m_range: tuple[int, int],
    mp_range: tuple[int, int],
    j_range: tuple[int, int],
    k_range: tuple[int, int],
    cutoff: float = TABLE_CUTOFF,
) -> BasisProductTables:
    rule = gauss_legendre(M)
    tau = 0.5 * (rule.nodes + 1.0)
    q = 4.0 ** (tau - 2)
    eta = 0.5 * rule.weights / np.sqrt(1 - q)
    alpha = params.alpha
    j = np.arange(j_range[0], j_range[1] + 1)[:, None, None]
    m = np.arange(m_range[0], m_range[1] + 1)[None, :, None]
    x = 2.0 ** (2 - j - tau)
    k = np.arange(k_range[0], k_range[1] + 1)[:, None, None]
    mp = np.arange(mp_range[0], mp_range[1] + 1)[None, :, None]
    a = alpha / (1 - q)
    y = 2.0 ** (tau - 2) * k

    def table(v):
        v = np.where(v < cutoff, 0.0, v)
        v.setflags(write=False)
        return v

    return BasisProductTables(
        alpha,
        tau,
        eta,
        tuple(j_range),
        tuple(m_range),
        tuple(mp_range),
        tuple(k_range),
        table(np.exp(-alpha * (x - m) ** 2)),
        table(np.exp(-alpha * (x + m) ** 2)),
        table(np.exp(-a * (y - mp) ** 2)),
        table(np.exp(-a * (y + mp) ** 2)),
        cutoff,
    )


def _product_gmra_tables(f_exp, g_exp, t: BasisProductTables):
    params = f_exp.params
    if t.alpha != params.alpha:
        raise ParameterError("tables built for a different alpha")
    pref = params.alpha / math.pi * LN2
    j_lo, j_hi = t.j_range
    js = np.arange(j_lo, j_hi + 1)
    pieces = []
    for n, (mf0, a) in f_exp.scales.items():
        mf1 = mf0 + a.size - 1
        if mf0 < t.m_range[0] or mf1 > t.m_range[1]:
            bad = mf0 if mf0 < t.m_range[0] else mf1
            raise TableRangeError(f"shift m={bad} outside table range {t.m_range} (scale n={n})")
        sl = slice(mf0 - t.m_range[0], mf1 - t.m_range[0] + 1)
        # A^{+-}[j, i] = sum_m a_m U^{+-}[j, m, i]
        am = np.einsum("m,jmi->ji", a, t.U_minus[:, sl, :])
        ap = np.einsum("m,jmi->ji", a, t.U_plus[:, sl, :])
        for l, (mg0, b) in g_exp.scales.items():
            mg1 = mg0 + b.size - 1
            if mg0 < t.mp_range[0] or mg1 > t.mp_range[1]:
                bad = mg0 if mg0 < t.mp_range[0] else mg1
                raise TableRangeError(
                    f"shift m'={bad} outside table range {t.mp_range} (scale l={l})"
                )
            sl2 = slice(mg0 - t.mp_range[0], mg1 - t.mp_range[0] + 1)
            bm = np.einsum("m,kmi->ki", b, t.V_minus[:, sl2, :])
            bp = np.einsum("m,kmi->ki", b, t.V_plus[:, sl2, :])
            # C[j, k] = sum_i eta_i (A-[j,i] B-[k,i] + A+[j,i] B+[k,i])
            c = (am * t.eta) @ bm.T + (ap * t.eta) @ bp.T
            for row, j in enumerate(js):
                J = int(j) + n + l
                if not params.j_min <= J <= params.j_max:
                    continue
                pieces.append((J, t.k_range[0], pref * 2.0 ** (-j / 2) * c[row]))
    meta = f"product of expansions via tables (M={t.tau.size})"
    return _finalize(params, pieces, f_exp.heavy_tailed or g_exp.heavy_tailed, meta)


# -- correlated normals -------------------------------------------------------


@dataclass(frozen=True)
class TiltedExpansion:
    """exp(tilt_c t + tilt_d) times an expansion."""

    tilt_c: float
    tilt_d: float
    body: GmraExpansion

    @property
    def params(self):
        return self.body.params

    @property
    def heavy_tailed(self):
        return self.body.heavy_tailed

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        b = np.asarray(self.body(t_arr))
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.where(b == 0.0, 0.0, np.exp(self.tilt_c * t_arr + self.tilt_d) * b)
        return float(v) if t_arr.ndim == 0 else v

    def support(self, width: float = 10.0):
        return self.body.support(width)


def product_bivariate_normal(
    mu_x, mu_y, sigma_x, sigma_y, rho, params=None, cfg=None, *, workers=None
) -> TiltedExpansion:
    """Density of X Y for jointly normal (X, Y) with correlation rho."""
    if not -1 < rho < 1:
        raise ParameterError(f"correlation must lie in (-1, 1), got {rho!r}")
    if not (sigma_x > 0 and sigma_y > 0):
        raise ParameterError("standard deviations must be positive")
    qx, qy = mu_x / sigma_x, mu_y / sigma_y
    one = 1.0 - rho * rho
    s = math.sqrt(one)
    x_body = Normal(mu_x - rho * sigma_x * qy, sigma_x * s)
    y_body = Normal(mu_y - rho * sigma_y * qx, sigma_y * s)
    body = product_normals(x_body, y_body, params, cfg, workers=workers)
    c = rho / (one * sigma_x * sigma_y)
    d = -rho * qx * qy / one + rho * rho * (qx * qx + qy * qy) / (2 * one) + 0.5 * math.log(one)
    return TiltedExpansion(c, d, body)


# -- dispatcher ---------------------------------------------------------------


def as_expansion(spec: DistributionSpec, params: GmraParams, n: int = 300) -> GmraExpansion:
    """Expansion of a factor's density via its Gaussian mixture."""
    from .distributions import Laplace

    if isinstance(spec, Expansion):
        return spec.expansion
    if isinstance(spec, Laplace):
        mix = fit_laplace_unit().rescale(spec.mu, spec.b)
    elif isinstance(spec, Mixture):
        mix = spec.mixture
    else:
        mix = fit_distribution(spec, n=n, alpha=params.alpha)
    meta = f"{spec}: {mix.metadata}"
    return expansion_from_gaussians(mix.terms, params, meta)


def product(x: DistributionSpec, y: DistributionSpec, params=None, cfg=None, *, workers=None):
    """Density of X Y for independent factors, choosing the pipeline from their types."""
    params = params or GmraParams()
    if isinstance(x, Normal) and isinstance(y, Normal):
        return product_normals(x, y, params, cfg, workers=workers)
    if isinstance(y, Normal):
        return product_with_normal(x, y.mu, y.sigma, params, cfg, workers=workers)
    if isinstance(x, Normal):
        return product_with_normal(y, x.mu, x.sigma, params, cfg, workers=workers)
    if x.heavy_tailed or y.heavy_tailed:
        raise ParameterError("heavy-tailed factors are supported only against a normal factor")
    return product_gmra(as_expansion(x, params), as_expansion(y, params), cfg=cfg, workers=workers)
