"""Pure NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Both implementations follow the same algorithm so results agree to
rounding.
"""

import numpy as np
from scipy.special import gammaln

_BIG = 1e280
_LN_BIG = 280.0 * np.log(10.0)
_ASYM_X = 50.0


def _asymptotic(a, b, x):
    s = np.ones_like(x)
    t = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    ok = np.zeros(x.shape, dtype=bool)
    for k in range(120):
        t = np.where(live, t * (b - a + k) * (1.0 - a + k) / ((k + 1.0) * x), t)
        diverging = live & (np.abs(t) > prev)
        live &= ~diverging
        s = np.where(live, s + t, s)
        done = live & (np.abs(t) < 1e-17 * np.abs(s))
        ok |= done
        live &= ~done
        prev = np.abs(t)
        if not live.any():
            break
    ok &= s > 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        val = x + (a - b) * np.log(x) + gammaln(b) - gammaln(a) + np.log(s)
    return val, ok


def _series(a, b, x, tol, max_terms):
    s = np.ones_like(x)
    t = np.ones_like(x)
    scale = np.zeros_like(x)
    small = np.zeros(x.shape, dtype=np.int64)
    live = np.ones(x.shape, dtype=bool)
    idx = np.arange(x.size)
    for k in range(max_terms):
        if not live.any():
            break
        j = idx[live]
        r = (a + k) * x[j] / ((b + k) * (k + 1.0))
        tj = t[j] * r
        sj = s[j] + tj
        big = sj > _BIG
        if big.any():
            sj[big] /= _BIG
            tj[big] /= _BIG
            scale[j[big]] += _LN_BIG
        t[j] = tj
        s[j] = sj
        hit = (tj <= tol * sj) & (r < 1.0)
        small[j] = np.where(hit, small[j] + 1, 0)
        live[j[small[j] >= 3]] = False
    return np.log(s) + scale, ~live


def log_hyp1f1_pos(a, b, x, tol=1e-14, max_terms=10000):
    """ln 1F1(a; b; x) for a > 0, b > 0 and x >= 0 (elementwise).

    Returns the log values and the number of non-converged entries.
    """
    arr = np.asarray(x, dtype=np.float64)
    flat = arr.reshape(-1).copy()
    out = np.zeros_like(flat)
    pos = flat > 0.0
    nonfinite = ~np.isfinite(flat)
    out[nonfinite] = flat[nonfinite]
    pos &= ~nonfinite
    bad = 0
    asym = pos & (flat >= _ASYM_X)
    if asym.any():
        val, ok = _asymptotic(a, b, flat[asym])
        ia = np.flatnonzero(asym)
        out[ia[ok]] = val[ok]
        pos[ia[ok]] = False
    if pos.any():
        ip = np.flatnonzero(pos)
        val, ok = _series(a, b, flat[ip], tol, max_terms)
        out[ip] = val
        bad = int((~ok).sum())
    return out.reshape(arr.shape), bad
