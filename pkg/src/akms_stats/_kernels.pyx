# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: log of Kummer's 1F1 for positive parameters."""

import numpy as np
from libc.math cimport log, lgamma, fabs, isfinite

cdef double _LN_BIG = 644.7238260383328  # 280 * ln(10)
cdef double _BIG = 1e280
cdef double _ASYM_X = 50.0


cdef inline double _asymptotic(double a, double b, double x, bint* ok) nogil:
    cdef double s = 1.0, t = 1.0, prev = 1e300
    cdef int k
    ok[0] = False
    for k in range(120):
        t *= (b - a + k) * (1.0 - a + k) / ((k + 1.0) * x)
        if fabs(t) > prev:
            return 0.0
        s += t
        if fabs(t) < 1e-17 * fabs(s):
            ok[0] = s > 0.0
            break
        prev = fabs(t)
    if not ok[0]:
        return 0.0
    return x + (a - b) * log(x) + lgamma(b) - lgamma(a) + log(s)


cdef inline double _series(double a, double b, double x, double tol,
                           int max_terms, bint* ok) nogil:
    cdef double s = 1.0, t = 1.0, r, scale = 0.0
    cdef int k, small = 0
    ok[0] = False
    for k in range(max_terms):
        r = (a + k) * x / ((b + k) * (k + 1.0))
        t *= r
        s += t
        if s > _BIG:
            s /= _BIG
            t /= _BIG
            scale += _LN_BIG
        if t <= tol * s and r < 1.0:
            small += 1
            if small >= 3:
                ok[0] = True
                break
        else:
            small = 0
    return log(s) + scale


def log_hyp1f1_pos(double a, double b, x, double tol=1e-14, int max_terms=10000):
    """ln 1F1(a; b; x) for a > 0, b > 0 and x >= 0 (elementwise).

    Returns
    -------
    out : ndarray
        Logarithm of the function, same shape as ``x``.
    n_bad : int
        Number of entries whose series did not converge in ``max_terms``.
    """
    arr = np.ascontiguousarray(x, dtype=np.float64)
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    cdef double[::1] xv = flat
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef int bad = 0
    cdef bint ok
    cdef double xi, v
    with nogil:
        for i in range(n):
            xi = xv[i]
            if xi <= 0.0:
                ov[i] = 0.0
                continue
            if not isfinite(xi):
                ov[i] = xi
                continue
            if xi >= _ASYM_X:
                v = _asymptotic(a, b, xi, &ok)
                if ok:
                    ov[i] = v
                    continue
            v = _series(a, b, xi, tol, max_terms, &ok)
            if not ok:
                bad += 1
            ov[i] = v
    return out.reshape(arr.shape), bad
