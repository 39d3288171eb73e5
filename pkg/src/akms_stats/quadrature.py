"""Gauss-Legendre rules and the integrators built on them.

Two integrators cover every integral in the package:

* :func:`integrate_log_batch` handles positive integrands on ``(0, inf)``
  given in log form, one independent integral per row.  It maps
  ``t = exp(x)``, locates the region where the integrand is within
  ``e^-46`` of its peak and applies panel Gauss-Legendre there.
* :func:`adaptive_gl` is a global adaptive composite Gauss-Legendre rule
  for finite intervals with vectorised integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AccuracyError, ParameterError

RuleKind = Literal["finite", "semi_infinite_exp"]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a composite Gauss-Legendre rule.

    For ``kind == "semi_infinite_exp"`` the rule integrates over ``t`` in
    ``(exp(a), exp(b))`` through ``t = exp(x)``; the Jacobian is folded into
    the weights.
    """

    kind: RuleKind
    order: int
    panels: int
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=64)
def _unit_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on [0, 1]."""
    x, w = leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_nodes(order: int, panels: int, a, b):
    """Composite nodes/weights; ``a``/``b`` may be arrays (one row each)."""
    u, w = _unit_rule(order)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    h = (b - a) / panels
    k = np.arange(panels)
    starts = a[..., None] + h[..., None] * k[:, None]  # (..., panels, 1)
    nodes = (starts + h[..., None] * u).reshape(*a.shape[:-1], panels * order)
    weights = np.broadcast_to(h[..., None] * w, (*a.shape[:-1], panels, order))
    return nodes, weights.reshape(*a.shape[:-1], panels * order)


def gauss_legendre(order: int, a: float, b: float, panels: int = 1) -> QuadratureRule:
    """Composite Gauss-Legendre rule with ``panels`` equal panels on [a, b]."""
    if int(order) != order or order < 2:
        raise ParameterError(f"order must be an integer >= 2, got {order!r}")
    if int(panels) != panels or panels < 1:
        raise ParameterError(f"panels must be a positive integer, got {panels!r}")
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise ParameterError(f"need finite a < b, got [{a}, {b}]")
    x, w = _panel_nodes(int(order), int(panels), float(a), float(b))
    return QuadratureRule("finite", int(order), int(panels), float(a), float(b), x, w)


def exp_substitution_rule(
    order: int, x_lo: float, x_hi: float, panels: int = 4
) -> QuadratureRule:
    """Rule for ``int_{e^x_lo}^{e^x_hi} g(t) dt`` via ``t = exp(x)``."""
    base = gauss_legendre(order, x_lo, x_hi, panels)
    t = np.exp(base.nodes)
    return QuadratureRule(
        "semi_infinite_exp", base.order, base.panels, x_lo, x_hi, t, base.weights * t
    )


# ---------------------------------------------------------------------------
# positive log-integrands on (0, inf)

_DROP = 46.0  # e^-46 ~ 1e-20 relative to the peak


def integrate_log_batch(
    logf: Callable[[np.ndarray], np.ndarray],
    x_lo,
    x_hi,
    *,
    rtol: float = 1e-11,
    order: int = 32,
    panels: int = 8,
    coarse: int = 400,
    max_panels: int = 256,
):
    """Integrate ``exp(logf(t))`` over ``t in (0, inf)`` for a batch of rows.

    Parameters
    ----------
    logf : callable
        ``logf(t, rows)`` maps ``t`` of shape ``(len(rows), k)`` to the
        log-integrand; row ``i`` of ``t`` belongs to integral ``rows[i]``.
    x_lo, x_hi : array_like
        Per-row bracket in ``x = ln t`` that must contain all non-negligible
        mass.  Hitting a bracket edge is reported through the error estimate.

    Returns
    -------
    log_value : ndarray
        Natural log of each integral (``-inf`` for an all-zero integrand).
    rel_err : ndarray
        Estimated relative error of each integral.
    """
    x_lo = np.atleast_1d(np.asarray(x_lo, dtype=float))
    x_hi = np.atleast_1d(np.asarray(x_hi, dtype=float))
    x_lo, x_hi = np.broadcast_arrays(x_lo, x_hi)
    nrows = x_lo.size

    def lx(x, rows):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            v = logf(np.exp(x), rows) + x
        return np.where(np.isnan(v), -np.inf, v)

    # coarse scan for the support
    g = np.linspace(0.0, 1.0, coarse)
    X = x_lo[:, None] + (x_hi - x_lo)[:, None] * g
    rows = np.arange(nrows)
    L = lx(X, rows)
    lmax = L.max(axis=1)
    empty = ~np.isfinite(lmax)
    lmax = np.where(empty, 0.0, lmax)
    above = L > (lmax - _DROP)[:, None]
    first = np.argmax(above, axis=1)
    last = coarse - 1 - np.argmax(above[:, ::-1], axis=1)
    edge = ((first == 0) | (last == coarse - 1)) & ~empty

    # refine both ends by bisection between an inside and an outside point
    thr = (lmax - _DROP)[:, None]

    def bisect(inside, outside):
        a, b = inside.copy(), outside.copy()
        for _ in range(30):
            m = 0.5 * (a + b)
            hit = lx(m[:, None], rows)[:, 0] > thr[:, 0]
            a = np.where(hit, m, a)
            b = np.where(hit, b, m)
        return b

    lo_in = X[rows, first]
    lo_out = X[rows, np.maximum(first - 1, 0)]
    hi_in = X[rows, last]
    hi_out = X[rows, np.minimum(last + 1, coarse - 1)]
    xa = bisect(lo_in, lo_out)
    xb = bisect(hi_in, hi_out)
    narrow = xb - xa < 1e-9
    xb = np.where(narrow, xa + 1e-3, xb)

    log_value = np.full(nrows, -np.inf)
    rel_err = np.zeros(nrows)
    todo = np.flatnonzero(~empty)
    p = panels
    while todo.size:
        nodes, w = _panel_nodes(order, p, xa[todo], xb[todo])
        hn, hw = _panel_nodes(order // 2, p, xa[todo], xb[todo])
        ref = lmax[todo][:, None]
        big = np.sum(w * np.exp(lx(nodes, todo) - ref), axis=1)
        small = np.sum(hw * np.exp(lx(hn, todo) - ref), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.abs(big - small) / big
        err = np.where(big > 0, err, 0.0)
        ok = err <= rtol
        if p >= max_panels:
            ok[:] = True
        done = todo[ok]
        with np.errstate(divide="ignore"):
            log_value[done] = lmax[done] + np.log(big[ok])
        rel_err[done] = err[ok]
        todo = todo[~ok]
        p *= 2
    rel_err = np.where(edge, np.maximum(rel_err, 1e-3), rel_err)
    return log_value, rel_err


# ---------------------------------------------------------------------------
# finite intervals


def adaptive_gl(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    atol: float = 1e-13,
    rtol: float = 1e-11,
    order: int = 16,
    init_panels: int = 8,
    max_panels: int = 4096,
    strict: bool = True,
):
    """Global adaptive composite Gauss-Legendre integration on [a, b].

    Each panel is integrated with orders ``order`` and ``order // 2``; the
    difference is the panel error estimate.  Panels with the largest error
    are bisected until the total estimate meets ``max(atol, rtol*|I|)``.

    Returns
    -------
    value, abs_err : float
    """
    if not b > a:
        return 0.0, 0.0
    ub, wb = _unit_rule(order)
    us, ws = _unit_rule(order // 2)
    edges = np.linspace(a, b, init_panels + 1)
    lefts, rights = edges[:-1], edges[1:]

    def panel(lefts, rights):
        h = (rights - lefts)[:, None]
        xb = lefts[:, None] + h * ub
        xs = lefts[:, None] + h * us
        n = xb.size
        vals = f(np.concatenate([xb.ravel(), xs.ravel()]))
        vb = vals[:n].reshape(xb.shape)
        vs = vals[n:].reshape(xs.shape)
        ib = np.sum(h * wb * vb, axis=1)
        is_ = np.sum(h * ws * vs, axis=1)
        return ib, np.abs(ib - is_)

    vals, errs = panel(lefts, rights)
    while True:
        total = float(np.sum(vals))
        err = float(np.sum(errs))
        if not np.isfinite(total):
            raise AccuracyError("non-finite integrand", partial=total)
        if err <= max(atol, rtol * abs(total)):
            return total, err
        if lefts.size >= max_panels:
            if strict:
                raise AccuracyError(
                    f"adaptive quadrature: error {err:.3g} after {lefts.size} panels",
                    partial=total,
                )
            return total, err
        # split panels holding the largest errors
        order_idx = np.argsort(errs)[::-1]
        csum = np.cumsum(errs[order_idx])
        nsplit = int(np.searchsorted(csum, 0.5 * err)) + 1
        split = order_idx[:nsplit]
        keep = np.setdiff1d(np.arange(lefts.size), split)
        mids = 0.5 * (lefts[split] + rights[split])
        nl = np.concatenate([lefts[split], mids])
        nr = np.concatenate([mids, rights[split]])
        nv, ne = panel(nl, nr)
        lefts = np.concatenate([lefts[keep], nl])
        rights = np.concatenate([rights[keep], nr])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
