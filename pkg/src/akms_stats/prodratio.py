"""Statistics of the product ``Y = X1 X2`` and ratio ``Z = X1 / X2``.

Production values come from single Laplace-type integrals over ``t`` in
``(0, inf)``, evaluated in log space by :func:`integrate_log_batch`.  The
Fox-H series forms are kept as independent cross-checks: the product PDF,
CDF and MGF and the ratio CDF through Mellin-Barnes line integrals, the
ratio PDF through its residue series.

Only the ``zeta z <= 1`` ratio integral is coded directly.  The other side
uses ``f_Z(z) = f_W(1/z) / z^2`` with ``W = X2 / X1``, whose pair constant is
``1 / zeta``, so every ratio evaluation runs on the well-conditioned side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np
from scipy.special import loggamma

from .akmu import FadingParams, log_mellin
from .errors import (
    AccuracyError,
    DegenerateCaseError,
    DomainError,
    MomentUndefinedError,
    ParameterError,
)
from .quadrature import _panel_nodes, adaptive_gl, integrate_log_batch
from .result import EvalResult
from .specfun import appell_f2, gauss_2f1_unit, hyp2f1_complex_b, log_hyp1f1_pos, mb_line_integral

_EPS = np.finfo(float).eps
_DROP = 48.0  # support cut for CDF/MGF integrals, relative to the peak of y f(y)


@dataclass(frozen=True)
class Policy:
    """Accuracy and budget settings shared by the pair evaluators.

    Attributes
    ----------
    tol : float
        Relative tolerance requested from quadratures and series.
    max_uv : int
        Term budget of every series index.
    quad_order, quad_panels : int
        Starting Gauss-Legendre order and panel count of the ``t`` integrals.
    accept : float
        Largest relative error estimate returned without raising.
    """

    tol: float = 1e-11
    max_uv: int = 5000
    quad_order: int = 32
    quad_panels: int = 8
    accept: float = 1e-7


@dataclass(frozen=True)
class PairStats:
    """Two independent variables bound together with their pair constants."""

    p1: FadingParams
    p2: FadingParams
    policy: Policy = field(default_factory=Policy)
    log_delta: float = field(init=False)
    log_zeta: float = field(init=False)

    def __post_init__(self):
        c1, c2 = self.p1.constants, self.p2.constants
        a1, a2 = self.p1.alpha, self.p2.alpha
        g1, g2 = math.log(self.p1.gamma_bar), math.log(self.p2.gamma_bar)
        ld = -2.0 / a1 * c1.log_c - 2.0 / a2 * c2.log_c - g1 - g2
        lz = g2 - 2.0 / a1 * c1.log_c + 2.0 / a2 * c2.log_c - g1
        object.__setattr__(self, "log_delta", ld)
        object.__setattr__(self, "log_zeta", lz)

    @property
    def delta(self) -> float:
        return math.exp(self.log_delta)

    @property
    def zeta(self) -> float:
        return math.exp(self.log_zeta)

    @property
    def rho(self) -> float:
        return self.p1.alpha / self.p2.alpha

    @cached_property
    def swapped(self) -> "PairStats":
        return PairStats(self.p2, self.p1, self.policy)

    @cached_property
    def product_support(self) -> tuple[float, float, float]:
        """``(v_lo, v_hi, v_mode)`` in ``v = ln y`` holding the mass of ``y f_Y``."""
        e_lo = 0.5 * min(self.p1.alpha * self.p1.mu, self.p2.alpha * self.p2.mu)
        e_hi = self.p1.alpha * self.p2.alpha / (2.0 * (self.p1.alpha + self.p2.alpha))
        bmax = max(self.p1.constants.beta, self.p2.constants.beta)
        center = math.log(self.p1.gamma_bar * self.p2.gamma_bar)
        left = (_DROP + 25.0) / e_lo + 10.0
        right = math.log(200.0 / (1.0 - bmax)) / e_hi + 10.0
        return _scan_support(lambda v: _product_log_ypdf(self, v), center - left, center + right)

    @cached_property
    def ratio_lower_support(self) -> tuple[float, float, float]:
        """Support of ``z f_Z`` in ``v = ln z`` restricted to ``zeta z <= 1``."""
        top = -self.log_zeta
        left = (_DROP + 25.0) / (0.5 * self.p1.alpha * self.p1.mu) + 10.0
        return _scan_support(lambda v: _ratio_log_ypdf_lower(self, v), top - left, top,
                             fixed_right=True)


def _check_accept(ps: PairStats, rel, what: str, partial=None):
    rel = np.asarray(rel)
    if np.any(rel > ps.policy.accept):
        raise AccuracyError(
            f"{what}: relative error estimate {float(np.max(rel)):.3g} above "
            f"{ps.policy.accept:g}", partial=partial)


def _log1f1(a, b, x):
    x = np.minimum(x, 1e300)
    return log_hyp1f1_pos(a, b, np.ravel(x)).reshape(np.shape(x))


# ---------------------------------------------------------------------------
# Laplace-type integrals, batched over the argument


def _product_log_pdf(ps: PairStats, y: np.ndarray):
    """``ln f_Y(y)`` and its relative error estimate for ``y > 0``."""
    p1, p2 = ps.p1, ps.p2
    k1, k2 = p1.constants, p2.constants
    rho = ps.rho
    a = p2.mu - rho * p1.mu
    lb3 = np.atleast_1d(0.5 * p1.alpha * (ps.log_delta + np.log(y)))
    b1, b2 = k1.beta, k2.beta

    def logf(t, rows):
        lt = np.log(t)
        z = np.exp(lb3[rows, None] - rho * lt)
        out = (a - 1.0) * lt - t - z
        if b1 > 0:
            out = out + _log1f1(p1.m, p1.mu, b1 * z)
        if b2 > 0:
            out = out + _log1f1(p2.m, p2.mu, b2 * t)
        return out

    # bracket: the exponent must exceed its value at the peak by ~100
    lb3e = lb3 + math.log1p(-b1)
    peak = 2.0 * (1.0 + rho) * np.exp(np.minimum(lb3e, 600.0) / (1.0 + rho))
    big = 100.0 + 3.0 * abs(a - 1.0 + p2.m - p2.mu) + peak
    x_lo = (lb3e - np.log(big)) / rho
    if a > 0:
        x_lo = np.maximum(x_lo, -(60.0 + peak) / a - 5.0)
    x_hi = np.log(big / (1.0 - b2)) + 1.0
    lv, rel = integrate_log_batch(logf, x_lo, x_hi, rtol=ps.policy.tol,
                                  order=ps.policy.quad_order, panels=ps.policy.quad_panels)
    pref = (math.log(0.5 * p1.alpha) + k1.log_theta + k2.log_theta + ps.log_delta
            + (p1.mu - 2.0 / p1.alpha) * lb3)
    return pref + lv, rel


def _ratio_log_pdf_lower(ps: PairStats, z: np.ndarray):
    """``ln f_Z(z)`` for ``zeta z <= 1`` (any ``z > 0`` is valid, but slow above)."""
    p1, p2 = ps.p1, ps.p2
    k1, k2 = p1.constants, p2.constants
    rho = ps.rho
    C = p2.mu + rho * p1.mu
    lb5 = np.atleast_1d(0.5 * p1.alpha * (ps.log_zeta + np.log(z)))
    b1, b2 = k1.beta, k2.beta

    def logf(t, rows):
        lt = np.log(t)
        u = np.exp(lb5[rows, None] + rho * lt)
        out = (C - 1.0) * lt - t - u
        if b1 > 0:
            out = out + _log1f1(p1.m, p1.mu, b1 * u)
        if b2 > 0:
            out = out + _log1f1(p2.m, p2.mu, b2 * t)
        return out

    big = 100.0 + 3.0 * abs(C - 1.0 + p2.m - p2.mu)
    x_lo = np.full_like(lb5, -(60.0 + big) / C - 5.0)
    x_hi = np.full_like(lb5, math.log(big / (1.0 - b2)) + 1.0)
    lv, rel = integrate_log_batch(logf, x_lo, x_hi, rtol=ps.policy.tol,
                                  order=ps.policy.quad_order, panels=ps.policy.quad_panels)
    pref = (math.log(0.5 * p1.alpha) + k1.log_theta + k2.log_theta + ps.log_zeta
            + (p1.mu - 2.0 / p1.alpha) * lb5)
    return pref + lv, rel


def _product_log_ypdf(ps, v):
    lv, _ = _product_log_pdf(ps, np.exp(v))
    return lv + v


def _ratio_log_ypdf_lower(ps, v):
    lv, _ = _ratio_log_pdf_lower(ps, np.exp(v))
    return lv + v


def _scan_support(log_g, v_lo, v_hi, fixed_right=False, n=401):
    """Find where ``log_g`` is within ``_DROP`` of its maximum on a grid.

    The window is widened (up to four times) while mass touches a free edge.
    """
    for _ in range(5):
        v = np.linspace(v_lo, v_hi, n)
        L = np.asarray(log_g(v))
        L = np.where(np.isnan(L), -np.inf, L)
        i_max = int(np.argmax(L))
        keep = np.flatnonzero(L > L[i_max] - _DROP)
        lo_edge = keep[0] == 0
        hi_edge = keep[-1] == n - 1 and not fixed_right
        if not (lo_edge or hi_edge):
            step = v[1] - v[0]
            return float(v[keep[0]] - step), float(v[keep[-1]] + step), float(v[i_max])
        width = v_hi - v_lo
        if lo_edge:
            v_lo -= width
        if hi_edge:
            v_hi += width
    if fixed_right and not lo_edge:
        return float(v[keep[0]]), float(v_hi), float(v[i_max])
    raise AccuracyError("could not bracket the support of the distribution")


# ---------------------------------------------------------------------------
# product: density, CDF, MGF


def _positive(y, what):
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError(f"{what} must be > 0")
    return y


def product_pdf_array(ps: PairStats, y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised product density: ``(values, abs_err)``."""
    y = np.atleast_1d(_positive(y, "y"))
    lv, rel = _product_log_pdf(ps, y)
    val = np.exp(lv)
    _check_accept(ps, rel, "product_pdf", partial=val)
    return val, rel * val


def product_pdf(ps: PairStats, y: float) -> EvalResult:
    """Density of ``Y = X1 X2`` at ``y > 0`` from its Laplace-type integral."""
    val, err = product_pdf_array(ps, float(y))
    return EvalResult(float(val[0]), float(err[0]))


def _region_integral(log_g, a, b, tol, what):
    """``int_a^b exp(log_g(v)) dv`` with adaptive Gauss-Legendre."""
    if not b > a:
        return 0.0, 0.0
    try:
        return adaptive_gl(lambda v: np.exp(log_g(v)), a, b, atol=1e-300, rtol=tol,
                           order=16, init_panels=8, max_panels=2048)
    except AccuracyError as exc:
        raise AccuracyError(f"{what}: {exc}", partial=exc.partial) from exc


def product_cdf(ps: PairStats, y: float) -> EvalResult:
    """CDF of the product, integrating ``y f_Y`` over ``ln y``."""
    y = float(y)
    if y < 0 or math.isnan(y):
        raise DomainError("y must be >= 0")
    if y == 0.0:
        return EvalResult(0.0, 0.0)
    v_lo, v_hi, v_mode = ps.product_support
    v = math.log(y)
    tol = max(ps.policy.tol, 1e-12)
    g = lambda u: _product_log_ypdf(ps, u)  # noqa: E731
    if v <= v_mode:
        val, err = _region_integral(g, v_lo, v, tol, "product_cdf")
        return EvalResult(val, err + 1e-14 * val)
    val, err = _region_integral(g, v, v_hi, tol, "product_cdf")
    return EvalResult(max(1.0 - val, 0.0), err + 1e-12)


def _cumulative(log_g, v_start, v_nodes, order=20):
    """``int_{v_start}^{v_k} exp(log_g)`` at sorted ``v_nodes`` using one GL cell per gap."""
    edges = np.concatenate([[v_start], v_nodes])
    a, b = edges[:-1], edges[1:]
    nodes, w = _panel_nodes(order, 1, a, np.maximum(b, a))
    vals = np.exp(log_g(nodes.ravel())).reshape(nodes.shape)
    return np.cumsum(np.sum(w * vals, axis=1))


def product_cdf_curve(ps: PairStats, y, order: int = 20) -> np.ndarray:
    """Product CDF on a sorted grid of ``y > 0`` by cumulative cell quadrature.

    Suited to dense grids (a few hundred points spanning the support);
    accuracy is set by the grid spacing and the per-cell rule ``order``.
    """
    y = _positive(y, "y")
    v = np.log(y)
    if np.any(np.diff(v) < 0):
        raise ParameterError("grid must be sorted")
    v_lo, _, _ = ps.product_support
    return np.minimum(_cumulative(lambda u: _product_log_ypdf(ps, u), min(v_lo, v[0]), v, order), 1.0)


def product_mgf(ps: PairStats, s: float) -> EvalResult:
    """``E[exp(s Y)]`` for ``s < 0``."""
    s = float(s)
    if not s < 0:
        raise DomainError("the MGF is only evaluated for s < 0")
    v_lo, v_hi, _ = ps.product_support
    # exp(s y) < e^-60 beyond this point
    v_hi = min(v_hi, math.log(60.0 / -s))
    g = lambda u: _product_log_ypdf(ps, u) + s * np.exp(u)  # noqa: E731
    val, err = _region_integral(g, v_lo, v_hi, max(ps.policy.tol, 1e-12), "product_mgf")
    return EvalResult(val, err + 1e-14 * val)


def product_moment(ps: PairStats, n: float) -> float:
    """``E[Y^n]`` in closed form."""
    return math.exp(log_mellin(ps.p1, n + 1.0) + log_mellin(ps.p2, n + 1.0))


def product_cdf_asymptotic(ps: PairStats, y) -> np.ndarray | float:
    """Small-``y`` power law of the product CDF.

    Requires ``mu2 - (alpha1/alpha2) mu1 > 0``; otherwise the link with the
    smaller ``alpha mu`` must be labelled link 1.
    """
    p1, p2 = ps.p1, ps.p2
    g = p2.mu - ps.rho * p1.mu
    if not g > 0:
        raise ParameterError(
            f"asymptotic product CDF needs mu2 - (alpha1/alpha2) mu1 > 0 (got {g:.6g}); "
            "swap the link labels so that link 1 has the smaller alpha*mu")
    y = np.asarray(y, dtype=float)
    lf = math.log(gauss_2f1_unit(p2.m, g, p2.mu, p2.constants.beta).value) if p2.constants.beta else 0.0
    with np.errstate(divide="ignore"):
        lb3 = 0.5 * p1.alpha * (ps.log_delta + np.log(y))
    out = np.exp(p1.constants.log_theta + p2.constants.log_theta - math.log(p1.mu)
                 + math.lgamma(g) + lf + p1.mu * lb3)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# ratio: density, CDF, MGF


def ratio_pdf_array(ps: PairStats, z) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ratio density: ``(values, abs_err)``."""
    z = np.atleast_1d(_positive(z, "z"))
    low = ps.log_zeta + np.log(z) <= 0.0
    lv = np.empty_like(z)
    rel = np.empty_like(z)
    if np.any(low):
        lv[low], rel[low] = _ratio_log_pdf_lower(ps, z[low])
    if np.any(~low):
        zh = z[~low]
        l2, r2 = _ratio_log_pdf_lower(ps.swapped, 1.0 / zh)
        lv[~low] = l2 - 2.0 * np.log(zh)
        rel[~low] = r2
    val = np.exp(lv)
    _check_accept(ps, rel, "ratio_pdf", partial=val)
    return val, rel * val


def ratio_pdf(ps: PairStats, z: float) -> EvalResult:
    """Density of ``Z = X1 / X2`` at ``z > 0`` from its Laplace-type integral."""
    val, err = ratio_pdf_array(ps, float(z))
    return EvalResult(float(val[0]), float(err[0]))


def _ratio_lower_cdf(ps: PairStats, v: float) -> tuple[float, float]:
    v_lo, _, _ = ps.ratio_lower_support
    return _region_integral(lambda u: _ratio_log_ypdf_lower(ps, u), v_lo, v,
                            max(ps.policy.tol, 1e-12), "ratio_cdf")


def ratio_cdf(ps: PairStats, z: float) -> EvalResult:
    """CDF of the ratio.

    Below the branch point ``1/zeta`` the density is integrated directly;
    above it ``F_Z(z) = 1 - F_W(1/z)`` with ``W = X2 / X1``.
    """
    z = float(z)
    if z < 0 or math.isnan(z):
        raise DomainError("z must be >= 0")
    if z == 0.0:
        return EvalResult(0.0, 0.0)
    if math.isinf(z):
        return EvalResult(1.0, 0.0)
    v = math.log(z)
    if ps.log_zeta + v <= 0.0:
        val, err = _ratio_lower_cdf(ps, v)
        return EvalResult(val, err + 1e-14 * val)
    val, err = _ratio_lower_cdf(ps.swapped, -v)
    return EvalResult(max(1.0 - val, 0.0), err + 1e-14)


def ratio_cdf_curve(ps: PairStats, z, order: int = 20) -> np.ndarray:
    """Ratio CDF on a sorted grid, by cumulative cell quadrature on both sides."""
    z = _positive(z, "z")
    v = np.log(z)
    if np.any(np.diff(v) < 0):
        raise ParameterError("grid must be sorted")
    vb = -ps.log_zeta
    out = np.empty_like(v)
    low = v <= vb
    if np.any(low):
        v_lo, _, _ = ps.ratio_lower_support
        out[low] = _cumulative(lambda u: _ratio_log_ypdf_lower(ps, u), min(v_lo, v[0]), v[low], order)
    if np.any(~low):
        sw = ps.swapped
        w_lo, _, _ = sw.ratio_lower_support
        vw = -v[~low][::-1]
        out[~low] = 1.0 - _cumulative(lambda u: _ratio_log_ypdf_lower(sw, u), min(w_lo, vw[0]), vw, order)[::-1]
    return np.clip(out, 0.0, 1.0)


def ratio_mgf(ps: PairStats, s: float) -> EvalResult:
    """``E[exp(s Z)]`` for ``s < 0``, split at the branch point."""
    s = float(s)
    if not s < 0:
        raise DomainError("the MGF is only evaluated for s < 0")
    tol = max(ps.policy.tol, 1e-12)
    v_lo, _, _ = ps.ratio_lower_support
    vb = -ps.log_zeta
    lower, e1 = _region_integral(
        lambda u: _ratio_log_ypdf_lower(ps, u) + s * np.exp(u), v_lo, vb, tol, "ratio_mgf")
    # upper side in w = 1/z: exp(s/w) < e^-60 below w = -s/60
    sw = ps.swapped
    w_lo, _, _ = sw.ratio_lower_support
    w_lo = max(w_lo, math.log(-s / 60.0))
    upper, e2 = _region_integral(
        lambda u: _ratio_log_ypdf_lower(sw, u) + s * np.exp(-u), w_lo, ps.log_zeta, tol, "ratio_mgf")
    val = lower + upper
    return EvalResult(val, e1 + e2 + 1e-14 * val)


def ratio_moment(ps: PairStats, n: float) -> float:
    """``E[Z^n]``; exists only while ``mu2 - 2n/alpha2 > 0``."""
    if not ps.p2.mu - 2.0 * n / ps.p2.alpha > 0:
        raise MomentUndefinedError(
            f"E[Z^{n}] is infinite: mu2 - 2n/alpha2 = {ps.p2.mu - 2.0 * n / ps.p2.alpha:.6g} <= 0")
    return math.exp(log_mellin(ps.p1, n + 1.0) + log_mellin(ps.p2, 1.0 - n))


def ratio_cdf_asymptotic(ps: PairStats, z) -> np.ndarray | float:
    """Small-``z`` power law of the ratio CDF."""
    p1, p2 = ps.p1, ps.p2
    g = p2.mu + ps.rho * p1.mu
    lf = math.log(gauss_2f1_unit(p2.m, g, p2.mu, p2.constants.beta).value) if p2.constants.beta else 0.0
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        lb5 = 0.5 * p1.alpha * (ps.log_zeta + np.log(z))
    out = np.exp(p1.constants.log_theta + p2.constants.log_theta - math.log(p1.mu)
                 + math.lgamma(g) + lf + p1.mu * lb5)
    return float(out) if out.ndim == 0 else out


def ratio_pdf_same_alpha(ps: PairStats, z: float) -> EvalResult:
    """Closed-form ratio density through Appell's F2 when ``alpha1 == alpha2``."""
    p1, p2 = ps.p1, ps.p2
    if p1.alpha != p2.alpha:
        raise ParameterError("closed form needs alpha1 == alpha2")
    z = float(_positive(z, "z"))
    al = p1.alpha
    lb7 = 0.5 * al * (ps.log_zeta + math.log(z))
    l1b = np.logaddexp(0.0, lb7)  # ln(1 + beta7)
    x = p1.constants.beta * math.exp(lb7 - l1b)
    yv = p2.constants.beta * math.exp(-l1b)
    f2 = appell_f2(p1.mu + p2.mu, p1.m, p2.m, p1.mu, p2.mu, x, yv, tol=ps.policy.tol,
                   max_terms=ps.policy.max_uv)
    lpref = (math.log(0.5 * al) + ps.log_zeta + p1.constants.log_theta + p2.constants.log_theta
             + math.lgamma(p1.mu + p2.mu) + (p1.mu - 2.0 / al) * lb7 - (p1.mu + p2.mu) * l1b)
    pref = math.exp(lpref)
    return EvalResult(float(pref * f2.value), float(pref * f2.abs_err_est), f2.terms_used)


# ---------------------------------------------------------------------------
# series cross-checks


def _log_mellin_sum(p: FadingParams, shift: float, slope: float, s: np.ndarray, tol, max_terms):
    """``ln sum_u (m)_u beta^u / ((mu)_u u!) Gamma(shift + u + slope s)``.

    This is the single-variable Mellin series with its ``u``-sum done
    inside the contour integrand.
    """
    b = shift + slope * s
    lg = loggamma(b)
    if p.constants.beta == 0.0:
        return lg, 1
    f, n = hyp2f1_complex_b(p.m, b, p.mu, p.constants.beta, tol=tol, max_terms=max_terms)
    return lg + np.log(f), n


def _mb_series(ps: PairStats, make_kernel, s_left, s_right, what) -> EvalResult:
    tol = min(ps.policy.tol, 1e-12)
    counts = []

    def log_kernel(s):
        s = np.asarray(s, dtype=complex)
        out, n = make_kernel(s, tol)
        counts.append(n)
        return out

    try:
        r = mb_line_integral(log_kernel, s_left, s_right, rtol=1e-10, drop=30.0)
    except AccuracyError as exc:
        raise AccuracyError(f"{what}: series budget of {ps.policy.max_uv} terms exceeded",
                            partial=exc.partial) from exc
    # rounding in the inner sums is bounded by eps times the real-axis kernel
    floor = 64 * _EPS * r.info["T"] * math.exp(float(np.real(log_kernel(np.array([r.info["s0"]]))[0]))) / math.pi
    return EvalResult(float(r.value), float(r.abs_err_est + floor), int(max(counts)), info=r.info)


def product_pdf_series(ps: PairStats, y: float) -> EvalResult:
    """Product density from its double Fox-H series (contour form)."""
    y = float(_positive(y, "y"))
    p1, p2 = ps.p1, ps.p2
    B1, B2 = 2.0 / p1.alpha, 2.0 / p2.alpha
    lx = ps.log_delta + math.log(y)
    base = p1.constants.log_theta + p2.constants.log_theta + ps.log_delta

    def kern(s, tol):
        a, n1 = _log_mellin_sum(p1, p1.mu - B1, B1, s, tol, ps.policy.max_uv)
        b, n2 = _log_mellin_sum(p2, p2.mu - B2, B2, s, tol, ps.policy.max_uv)
        return base - s * lx + a + b, n1 * n2

    left = max(1.0 - 0.5 * p1.alpha * p1.mu, 1.0 - 0.5 * p2.alpha * p2.mu)
    return _mb_series(ps, kern, left, math.inf, "product_pdf_series")


def _cdf_kernel(ps, p1, p2, lx, sign2):
    B1, B2 = 2.0 / p1.alpha, 2.0 / p2.alpha
    base = p1.constants.log_theta + p2.constants.log_theta

    def kern(s, tol):
        a, n1 = _log_mellin_sum(p1, p1.mu, B1, s, tol, ps.policy.max_uv)
        b, n2 = _log_mellin_sum(p2, p2.mu, sign2 * B2, s, tol, ps.policy.max_uv)
        return base - s * lx + a + b + loggamma(-s) - loggamma(1.0 - s), n1 * n2

    return kern


def product_cdf_series(ps: PairStats, y: float) -> EvalResult:
    """Product CDF from its Fox-H series (contour form)."""
    y = float(_positive(y, "y"))
    kern = _cdf_kernel(ps, ps.p1, ps.p2, ps.log_delta + math.log(y), 1.0)
    left = -0.5 * min(ps.p1.alpha * ps.p1.mu, ps.p2.alpha * ps.p2.mu)
    return _mb_series(ps, kern, left, 0.0, "product_cdf_series")


def product_mgf_series(ps: PairStats, s: float) -> EvalResult:
    """Product MGF at ``s < 0`` from its Fox-H series (contour form)."""
    if not s < 0:
        raise DomainError("the MGF is only evaluated for s < 0")
    p1, p2 = ps.p1, ps.p2
    B1, B2 = 2.0 / p1.alpha, 2.0 / p2.alpha
    lx = ps.log_delta - math.log(-s)
    base = p1.constants.log_theta + p2.constants.log_theta

    def kern(w, tol):
        a, n1 = _log_mellin_sum(p1, p1.mu, B1, w, tol, ps.policy.max_uv)
        b, n2 = _log_mellin_sum(p2, p2.mu, B2, w, tol, ps.policy.max_uv)
        return base - w * lx + a + b + loggamma(-w), n1 * n2

    left = -0.5 * min(p1.alpha * p1.mu, p2.alpha * p2.mu)
    return _mb_series(ps, kern, left, 0.0, "product_mgf_series")


def ratio_cdf_series(ps: PairStats, z: float) -> EvalResult:
    """Ratio CDF from its Fox-H series (contour form)."""
    z = float(_positive(z, "z"))
    kern = _cdf_kernel(ps, ps.p1, ps.p2, ps.log_zeta + math.log(z), -1.0)
    return _mb_series(ps, kern, -0.5 * ps.p1.alpha * ps.p1.mu, 0.0, "ratio_cdf_series")


def _residue_coeffs(p: FadingParams, J: int, dps: int):
    """Power-series coefficients of ``exp(-w) 1F1(m; mu; beta w)`` up to ``w^J``."""
    with mpmath.workdps(dps):
        m, mu, beta = mpmath.mpf(p.m), mpmath.mpf(p.mu), mpmath.mpf(p.constants.beta)
        a = [mpmath.mpf(1)]
        for u in range(1, J + 1):
            a.append(a[-1] * (m + u - 1) * beta / ((mu + u - 1) * u))
        inv_fact = [mpmath.mpf(1)]
        for n in range(1, J + 1):
            inv_fact.append(-inv_fact[-1] / n)
        return [mpmath.fsum(a[u] * inv_fact[j - u] for u in range(j + 1)) for j in range(J + 1)]


def ratio_pdf_series(ps: PairStats, z: float) -> EvalResult:
    """Ratio density from its residue series.

    The residues of the link-1 Gamma family give a power series in
    ``w = (zeta z)^(alpha1/2)`` whose terms grow like
    ``Gamma(rho j) w^j / j!``, ``rho = alpha1/alpha2``.  For ``rho < 1`` it is
    entire; for ``rho > 1`` the same series is summed for ``W = X2 / X1``.
    With equal alphas the radius is ``1 - beta2`` (``1 - beta1`` for ``W``)
    and arguments outside both discs are rejected.

    Raises
    ------
    DegenerateCaseError
        At the branch boundary ``zeta z = 1``, or with equal alphas outside
        the discs of convergence.
    AccuracyError
        If the term budget is exhausted.
    """
    z = float(_positive(z, "z"))
    lzz = ps.log_zeta + math.log(z)
    if abs(lzz) < 1e-9:
        raise DegenerateCaseError("residue series is not used at zeta z = 1")
    rho = ps.rho
    if rho == 1.0:
        # equal alphas: the series has a finite radius, 1 - beta of the other link
        w = math.exp(0.5 * ps.p1.alpha * lzz)
        if w < 0.8 * (1.0 - ps.p2.constants.beta):
            use_swap = False
        elif 1.0 / w < 0.8 * (1.0 - ps.p1.constants.beta):
            use_swap = True
        else:
            raise DegenerateCaseError(
                "equal alphas: residue series does not converge usefully here; use ratio_pdf")
    else:
        use_swap = rho > 1.0
    if use_swap:
        r = _residue_sum(ps.swapped, 1.0 / z)
        sc = 1.0 / (z * z)
        return EvalResult(r.value * sc, r.abs_err_est * sc, r.terms_used)
    return _residue_sum(ps, z)


def _residue_terms(ps: PairStats, lzz: float, J: int, dps: int):
    """Sum the residue series up to ``J`` terms at ``dps`` digits.

    Returns ``(total, sum_abs, last_term, terms, converged)``.
    """
    p1, p2 = ps.p1, ps.p2
    c = _residue_coeffs(p1, J, dps)
    with mpmath.workdps(dps):
        w = mpmath.exp(mpmath.mpf(0.5 * p1.alpha * lzz))
        # C_j must be exact to working precision: the terms can exceed the sum by 1e25
        rho = mpmath.mpf(p1.alpha) / mpmath.mpf(p2.alpha)
        mu1, mu2 = mpmath.mpf(p1.mu), mpmath.mpf(p2.mu)
        total = mpmath.mpf(0)
        sabs = mpmath.mpf(0)
        small = 0
        for j in range(J + 1):
            Cj = mu2 + rho * (mu1 + j)
            t = c[j] * w ** j * mpmath.gamma(Cj) * mpmath.hyp2f1(p2.m, Cj, p2.mu, p2.constants.beta)
            total += t
            sabs += abs(t)
            if j > 8 and abs(t) <= 1e-3 * ps.policy.tol * abs(total):
                small += 1
                if small >= 5:
                    return total, sabs, t, j + 1, True
            else:
                small = 0
        return total, sabs, t, J + 1, False


def _residue_sum(ps: PairStats, z: float) -> EvalResult:
    p1, p2 = ps.p1, ps.p2
    lzz = ps.log_zeta + math.log(z)
    J = 64
    # the alternating sums behind c_j lose about log10((1+beta)/(1-beta)) digits per term
    loss = math.log10((1.0 + p1.constants.beta) / (1.0 - p1.constants.beta)) + 0.5
    dps = 40 + int(J * loss)
    while True:
        total, sabs, last, n, ok = _residue_terms(ps, lzz, J, dps)
        with mpmath.workdps(dps):
            lost = float(mpmath.log10(sabs / abs(total))) if total else float(dps)
        if ok and lost < dps - 25:
            lpref = (math.log(0.5 * p1.alpha) + p1.constants.log_theta + p2.constants.log_theta
                     + ps.log_zeta - lzz + p1.mu * 0.5 * p1.alpha * lzz)
            with mpmath.workdps(dps):
                pref = mpmath.exp(lpref)
                val = float(pref * total)
                err = float(pref * (sabs * mpmath.mpf(10) ** (2 - dps) + 10 * abs(last)))
            return EvalResult(val, abs(err), n)
        if ok:
            dps = int(lost) + 40
        elif J >= ps.policy.max_uv:
            raise AccuracyError("ratio residue series: term budget exhausted", partial=float(total))
        else:
            J = min(2 * J, ps.policy.max_uv)
            dps = max(dps, 40 + int(J * loss))
        if dps > 5000:
            raise AccuracyError("ratio residue series: cancellation beyond working precision",
                                partial=float(total))
