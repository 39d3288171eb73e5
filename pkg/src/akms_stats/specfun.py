"""Hypergeometric-type functions, Kratzel-type integrals and Mellin-Barnes inversion.

Only the argument ranges needed by the fading statistics are supported.
Every public evaluator returns an :class:`~akms_stats.result.EvalResult`.
Series are truncated once the geometric tail bound of three consecutive
terms falls below ``tol`` times the running sum, with a hard budget of
``max_terms`` terms.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import loggamma

from . import kernels
from .errors import AccuracyError, DegenerateCaseError, DomainError, ParameterError
from .quadrature import adaptive_gl, integrate_log_batch
from .result import EvalResult

TOL = 1e-14
MAX_TERMS = 10_000
_EPS = np.finfo(float).eps


def _is_nonpos_int(q: float) -> bool:
    return q <= 0 and float(q).is_integer()


def log_pochhammer(q: float, k: int) -> tuple[float, float]:
    """Return ``(log|(q)_k|, sign)`` via log-gamma differences.

    Handles negative non-integer ``q``; for non-positive integer ``q`` the
    symbol vanishes once ``k > -q``.
    """
    if k == 0:
        return 0.0, 1.0
    if _is_nonpos_int(q):
        if k > -q:
            return -math.inf, 0.0
        # (q)_k = (-1)^k (-q)! / (-q-k)!
        n = int(-q)
        return math.lgamma(n + 1) - math.lgamma(n - k + 1), (-1.0) ** k
    lg_hi, s_hi = _lgamma_sign(q + k)
    lg_lo, s_lo = _lgamma_sign(q)
    return lg_hi - lg_lo, s_hi * s_lo


def _lgamma_sign(x: float) -> tuple[float, float]:
    if x > 0:
        return math.lgamma(x), 1.0
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    s = math.sin(math.pi * x)
    return math.log(math.pi / abs(s)) - math.lgamma(1.0 - x), math.copysign(1.0, s)


def _series(ratio: Callable[[int], float], tol: float, max_terms: int, what: str):
    """Sum 1 + t1 + t2 + ... with t_{k+1} = t_k * ratio(k).

    Returns (sum, abs_err, terms, sum_abs).
    """
    s = 1.0
    t = 1.0
    sabs = 1.0
    small = 0
    for k in range(max_terms):
        r = ratio(k)
        t *= r
        s += t
        sabs += abs(t)
        if t == 0.0:
            return s, _EPS * sabs, k + 1, sabs
        if abs(r) < 1.0 and abs(t) * abs(r) / (1.0 - abs(r)) <= tol * abs(s):
            small += 1
            if small >= 3:
                tail = abs(t) * abs(r) / (1.0 - abs(r))
                return s, tail + 4 * _EPS * sabs, k + 1, sabs
        else:
            small = 0
    raise AccuracyError(f"{what}: no convergence in {max_terms} terms", partial=s)


# ---------------------------------------------------------------------------
# Kummer 1F1


def log_hyp1f1_pos(a: float, b: float, x, tol: float = TOL) -> np.ndarray:
    """Vectorised ``ln 1F1(a; b; x)`` for ``a, b > 0`` and ``x >= 0``."""
    out, _ = kernels.log_hyp1f1_pos(float(a), float(b), x, tol, MAX_TERMS)
    return out


def kummer_1f1(a: float, b: float, x: float, tol: float = TOL, max_terms: int = MAX_TERMS) -> EvalResult:
    """Confluent hypergeometric function 1F1(a; b; x) for real ``x``.

    Positive parameters with ``x >= 0`` use the compiled log-space kernel,
    which switches to the exponentially scaled asymptotic expansion for
    large ``x``.  Negative ``x`` goes through Kummer's transformation
    ``1F1(a;b;x) = e^x 1F1(b-a;b;-x)``.
    """
    if not b > 0:
        raise ParameterError(f"1F1 needs b > 0, got {b}")
    if not math.isfinite(x):
        raise ParameterError("1F1 argument must be finite")
    if x == 0.0 or a == 0.0:
        return EvalResult(1.0, 0.0, 0)
    if a == b:
        return EvalResult(math.exp(x), _EPS * math.exp(x), 0)
    if x < 0.0:
        inner = kummer_1f1(b - a, b, -x, tol, max_terms)
        scale = math.exp(x)
        return EvalResult(
            scale * inner.value, scale * inner.abs_err_est, inner.terms_used,
            info={"log_value": x + inner.info.get("log_value", _safe_log(inner.value))},
        )
    if a > 0.0:
        lv = float(log_hyp1f1_pos(a, b, np.array([x]), tol)[0])
        val = math.exp(lv) if lv < 709.0 else math.inf
        return EvalResult(val, 8 * tol * val if math.isfinite(val) else 0.0, 0,
                          info={"log_value": lv})
    # a < 0 with x > 0: terms change sign until a + k > 0
    s, err, n, _ = _series(lambda k: (a + k) * x / ((b + k) * (k + 1.0)), tol, max_terms, "1F1")
    return EvalResult(s, err, n, info={"log_value": _safe_log(s)})


def _safe_log(v: float) -> float:
    return math.log(v) if v > 0 else (math.nan if v < 0 else -math.inf)


# ---------------------------------------------------------------------------
# Gauss 2F1


def _hyp2f1_real(a, b, c, z, tol=TOL, max_terms=MAX_TERMS):
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0, 0.0, 0
    # Euler's transformation speeds up the series near z = 1 when a+b-c > 1
    if z > 0.5 and a + b - c > 1.0:
        pref = (1.0 - z) ** (c - a - b)
        s, err, n, _ = _series(
            lambda k: (c - a + k) * (c - b + k) * z / ((c + k) * (k + 1.0)), tol, max_terms, "2F1"
        )
        return pref * s, pref * err, n
    s, err, n, _ = _series(
        lambda k: (a + k) * (b + k) * z / ((c + k) * (k + 1.0)), tol, max_terms, "2F1"
    )
    return s, err, n


def gauss_2f1_unit(a: float, b: float, c: float, z: float, tol: float = TOL,
                   max_terms: int = MAX_TERMS) -> EvalResult:
    """Gauss hypergeometric function 2F1(a, b; c; z) on ``0 <= z < 1``."""
    if not c > 0:
        raise ParameterError(f"2F1 needs c > 0, got {c}")
    if not (0.0 <= z < 1.0):
        raise DomainError(f"2F1 is only evaluated on [0, 1), got z={z}")
    s, err, n = _hyp2f1_real(a, b, c, z, tol, max_terms)
    return EvalResult(s, err, n)


def hyp2f1_vec_a(a: np.ndarray, b: float, c: float, z: float, tol: float = TOL) -> np.ndarray:
    """2F1(a_i, b; c; z) for an array of first parameters, |z| < 1."""
    a = np.asarray(a, dtype=float)
    s = np.ones_like(a)
    t = np.ones_like(a)
    small = 0
    for k in range(MAX_TERMS):
        r = (a + k) * (b + k) * z / ((c + k) * (k + 1.0))
        t = t * r
        s = s + t
        if np.all(np.abs(t) <= tol * np.abs(s)) and np.all(np.abs(r) < 1.0):
            small += 1
            if small >= 3:
                return s
        else:
            small = 0
    raise AccuracyError("vectorised 2F1: no convergence", partial=float(s[0]))


def hyp2f1_complex_b(a: float, b: np.ndarray, c: float, z: float, tol: float = TOL,
                     max_terms: int = MAX_TERMS) -> tuple[np.ndarray, int]:
    """2F1(a, b_i; c; z) for complex ``b_i`` and real ``0 <= z < 1``.

    Plain power series.  Terms are bounded in modulus by the real-axis
    series at ``Re b`` shifted by ``|Im b|``, so the absolute rounding
    error stays below ``eps`` times that real-axis value.

    Returns
    -------
    values : ndarray of complex
    terms : int
        Number of terms summed.
    """
    b = np.asarray(b, dtype=complex)
    s = np.ones_like(b)
    if z == 0.0:
        return s, 0
    t = np.ones_like(b)
    small = 0
    for k in range(max_terms):
        r = (a + k) * (b + k) * z / ((c + k) * (k + 1.0))
        t = t * r
        s = s + t
        ra = np.abs(r)
        if np.all(ra < 1.0) and np.all(np.abs(t) * ra / (1.0 - ra) <= tol * np.abs(s)):
            small += 1
            if small >= 3:
                return s, k + 1
        else:
            small = 0
    raise AccuracyError(f"complex 2F1: no convergence in {max_terms} terms")


# ---------------------------------------------------------------------------
# two-variable functions


def appell_f2(a, b1, b2, c1, c2, x, y, tol: float = TOL, max_terms: int = 2000) -> EvalResult:
    """Appell F2(a; b1, b2; c1, c2; x, y) for ``|x| + |y| < 1``.

    Summed as ``sum_k (a)_k (b1)_k x^k / ((c1)_k k!) * 2F1(a+k, b2; c2; y)``.
    """
    if not (c1 > 0 and c2 > 0):
        raise ParameterError("F2 needs c1, c2 > 0")
    if abs(x) + abs(y) >= 1.0:
        raise DomainError(f"F2 requires |x|+|y| < 1, got {abs(x) + abs(y)}")
    if x == 0.0:
        s, err, n = _hyp2f1_real(a, b2, c2, y, tol)
        return EvalResult(s, err, n)
    total = 0.0
    sabs = 0.0
    coef = 1.0
    chunk = 64
    small = 0
    k0 = 0
    while k0 < max_terms:
        ks = np.arange(k0, k0 + chunk)
        inner = hyp2f1_vec_a(a + ks, b2, c2, y, tol) if y != 0.0 else np.ones(chunk)
        for i, k in enumerate(ks):
            if k > 0:
                coef *= (a + k - 1) * (b1 + k - 1) * x / ((c1 + k - 1) * k)
            term = coef * inner[i]
            total += term
            sabs += abs(term)
            if abs(term) <= tol * abs(total):
                small += 1
                if small >= 3:
                    return EvalResult(total, tol * abs(total) + 8 * _EPS * sabs, int(k) + 1)
            else:
                small = 0
        k0 += chunk
    raise AccuracyError("F2: no convergence", partial=total)


def humbert_phi2(b1, b2, c, x, y, tol: float = TOL, max_terms: int = 2000) -> EvalResult:
    """Humbert's confluent function Phi2(b1, b2; c; x, y).

    Summed as ``sum_k (b1)_k x^k / ((c)_k k!) * 1F1(b2; c+k; y)``.  ``b1``
    may be negative.  For large negative arguments the alternating outer
    sum loses accuracy; the error estimate accounts for it.
    """
    if not c > 0:
        raise ParameterError("Phi2 needs c > 0")
    total = 0.0
    sabs = 0.0
    inner_err = 0.0
    coef = 1.0
    small = 0
    for k in range(max_terms):
        if k > 0:
            coef *= (b1 + k - 1) * x / ((c + k - 1) * k)
        if coef == 0.0 and k > 0:
            return EvalResult(total, inner_err + 8 * _EPS * sabs, k)
        f = kummer_1f1(b2, c + k, y, tol)
        term = coef * f.value
        total += term
        sabs += abs(term)
        inner_err += abs(coef) * f.abs_err_est
        if abs(term) <= tol * abs(total) and k > abs(b1 * x):
            small += 1
            if small >= 3:
                return EvalResult(total, inner_err + tol * abs(total) + 8 * _EPS * sabs, k + 1)
        else:
            small = 0
    raise AccuracyError("Phi2: no convergence", partial=total)


# ---------------------------------------------------------------------------
# Kratzel-type integral


def kratzel_like(nu: float, rho: float, x: float, rtol: float = 1e-12) -> EvalResult:
    """``int_0^inf t^(nu-1) exp(-t - x t^(-rho)) dt`` for ``rho > 0, x >= 0``."""
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        if nu <= 0:
            raise DomainError("integral diverges for x = 0 and nu <= 0")
        return EvalResult(math.gamma(nu), _EPS * math.gamma(nu), 0)

    def logf(t, rows):
        return (nu - 1.0) * np.log(t) - t - x * t ** (-rho)

    x_lo = (math.log(x) - math.log(200.0)) / rho
    x_hi = math.log(200.0 + 3.0 * abs(nu))
    lv, err = integrate_log_batch(logf, x_lo, x_hi, rtol=rtol)
    val = math.exp(lv[0])
    return EvalResult(val, float(err[0]) * val, 0, info={"log_value": float(lv[0])})


# ---------------------------------------------------------------------------
# Mellin-Barnes inversion


def mb_line_integral(
    log_kernel: Callable[[np.ndarray], np.ndarray],
    s_left: float,
    s_right: float,
    *,
    rtol: float = 1e-11,
    drop: float = 40.0,
) -> EvalResult:
    """``(1/2 pi i) int_{s0 - i inf}^{s0 + i inf} exp(log_kernel(s)) ds``.

    ``log_kernel`` must be real on the real axis with conjugate symmetry;
    it already contains the ``x^-s`` factor.  The line ``Re s = s0`` is put
    inside ``(s_left, s_right)`` where ``|kernel|`` is smallest, which is
    where cancellation along the contour is mildest.  The line is cut where
    the kernel has dropped by ``e^-drop`` relative to the real axis.

    Raises
    ------
    DegenerateCaseError
        If the strip ``(s_left, s_right)`` is empty.
    """
    if not s_right > s_left:
        raise DegenerateCaseError(f"no contour strip: ({s_left}, {s_right})")
    width = s_right - s_left
    if math.isinf(width):
        lo, hi = s_left + 1e-3, s_left + 60.0
    else:
        lo, hi = s_left + 0.02 * width, s_right - 0.02 * width

    def real_log(s):
        return float(np.real(log_kernel(np.array([s + 0j]))[0]))

    opt = minimize_scalar(real_log, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6})
    s0 = float(opt.x)
    ref = real_log(s0)

    tau = 1.0
    while tau < 1e5:
        v = np.real(log_kernel(np.array([s0 + 1j * tau])))[0]
        if v < ref - drop:
            break
        tau *= 1.5
    T = tau

    def integrand(t):
        lk = log_kernel(s0 + 1j * t)
        return np.real(np.exp(lk - ref))

    def integrand_abs(t):
        return np.exp(np.real(log_kernel(s0 + 1j * t)) - ref)

    val, err = adaptive_gl(integrand, 0.0, T, rtol=rtol, atol=1e-300, order=24,
                           init_panels=max(8, int(T)), strict=False)
    mag, _ = adaptive_gl(integrand_abs, 0.0, T, rtol=1e-6, atol=1e-300, order=16,
                         init_panels=max(8, int(T)), strict=False)
    scale = math.exp(ref) / math.pi
    abs_err = scale * (err + 64 * _EPS * mag)
    return EvalResult(scale * val, abs_err, 0, info={"s0": s0, "T": T})


def fox_h(
    x: float,
    a: Sequence[tuple[float, float]],
    b: Sequence[tuple[float, float]],
    m: int,
    n: int,
    rtol: float = 1e-11,
) -> EvalResult:
    """Fox H-function ``H^{m,n}_{p,q}[x | a; b]`` by direct contour integration.

    ``a`` and ``b`` are lists of ``(value, weight)`` pairs.  Only the
    standard separated-poles situation is handled.
    """
    if not x > 0:
        raise DomainError("H-function argument must be positive")
    a = [(float(u), float(v)) for u, v in a]
    b = [(float(u), float(v)) for u, v in b]
    left = max((-bj / Bj for bj, Bj in b[:m]), default=-math.inf)
    right = min(((1.0 - aj) / Aj for aj, Aj in a[:n]), default=math.inf)
    lx = math.log(x)

    def log_kernel(s):
        s = np.asarray(s, dtype=complex)
        out = -s * lx
        for bj, Bj in b[:m]:
            out = out + loggamma(bj + Bj * s)
        for aj, Aj in a[:n]:
            out = out + loggamma(1.0 - aj - Aj * s)
        for bj, Bj in b[m:]:
            out = out - loggamma(1.0 - bj - Bj * s)
        for aj, Aj in a[n:]:
            out = out - loggamma(aj + Aj * s)
        return out

    if math.isinf(left):
        raise DegenerateCaseError("no left pole family")
    return mb_line_integral(log_kernel, left, right, rtol=rtol)


CASES = ("H20_02", "H21_13", "H21_12", "H11_11", "H12_22")


def mellin_barnes_h(case_id: str, x: float, params: dict) -> EvalResult:
    """Evaluate one of the H-function layouts used by the fading statistics.

    ``params`` keys per case (weights ``B1 = 2/alpha1``, ``B2 = 2/alpha2``):

    ``H20_02``  b1, b2, B1, B2 -- product density kernel
    ``H21_13``  b3, b4, B1, B2 -- product CDF kernel, includes ``-1/s``
    ``H21_12``  b3, b4, B1, B2 -- product MGF kernel, includes ``Gamma(-s)``
    ``H11_11``  a1, b1, A1, B1 -- ratio density kernel
    ``H12_22``  a, b3, A1, B1 -- ratio CDF kernel, ``a = 1 - mu2 - v``
    """
    p = params
    if case_id == "H20_02":
        return fox_h(x, [], [(p["b1"], p["B1"]), (p["b2"], p["B2"])], 2, 0)
    if case_id == "H21_13":
        return fox_h(x, [(1.0, 1.0)], [(p["b3"], p["B1"]), (p["b4"], p["B2"]), (0.0, 1.0)], 2, 1)
    if case_id == "H21_12":
        return fox_h(x, [(1.0, 1.0)], [(p["b3"], p["B1"]), (p["b4"], p["B2"])], 2, 1)
    if case_id == "H11_11":
        return fox_h(x, [(p["a1"], p["A1"])], [(p["b1"], p["B1"])], 1, 1)
    if case_id == "H12_22":
        return fox_h(x, [(p["a"], p["A1"]), (1.0, 1.0)], [(p["b3"], p["B1"]), (0.0, 1.0)], 1, 2)
    raise ParameterError(f"unknown case_id {case_id!r}; expected one of {CASES}")
