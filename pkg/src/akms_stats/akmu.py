"""The single-variable alpha-kappa-mu shadowed power distribution.

The power ``X`` is written as ``X = gamma_bar * (c W)^(2/alpha)`` where
``W`` has density ``theta w^(mu-1) e^(-w) 1F1(m; mu; beta w)``.  That
density is a negative-binomial mixture of Gamma(mu + j, 1) laws, which
gives both an exact sampler and a positive-term series for the CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.special import gammainc, gammaln

from .errors import DomainError, ParameterError
from .specfun import gauss_2f1_unit, log_hyp1f1_pos

_NB_TAIL = 1e-17


@dataclass(frozen=True)
class DerivedConstants:
    """``theta``, ``beta`` and ``c`` together with their logarithms."""

    theta: float
    beta: float
    c: float
    log_theta: float
    log_c: float


@dataclass(frozen=True)
class FadingParams:
    """Parameters of one alpha-kappa-mu shadowed variable.

    Parameters
    ----------
    alpha : float
        Non-linearity, ``> 0``.
    kappa : float
        Dominant-to-scattered power ratio, ``>= 0``.
    mu : float
        Number of multipath clusters, ``> 0`` (need not be an integer).
    m : float
        Nakagami shadowing shape, ``> 0``.
    gamma_bar : float
        Mean power in linear units.
    """

    alpha: float
    kappa: float
    mu: float
    m: float
    gamma_bar: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "kappa", "mu", "m", "gamma_bar"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        for name in ("alpha", "mu", "m", "gamma_bar"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")

    @cached_property
    def constants(self) -> DerivedConstants:
        return derive_constants(self)


def derive_constants(p: FadingParams) -> DerivedConstants:
    """Compute ``theta``, ``beta`` and the normalization ``c`` in log space."""
    mk = p.mu * p.kappa
    # m^m / (mu kappa + m)^m = (1 + mu kappa / m)^-m
    log_theta = -p.m * math.log1p(mk / p.m) - math.lgamma(p.mu)
    beta = mk / (mk + p.m)
    q = 2.0 / p.alpha
    log_f = 0.0 if beta == 0.0 else math.log(gauss_2f1_unit(p.m, p.mu + q, p.mu, beta).value)
    log_c = -0.5 * p.alpha * (log_theta + math.lgamma(p.mu + q) + log_f)
    if not (math.isfinite(log_theta) and math.isfinite(log_c)):
        raise ParameterError(f"non-finite derived constants for {p}")
    return DerivedConstants(math.exp(log_theta), beta, math.exp(log_c), log_theta, log_c)


def _as_array(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("argument must be >= 0")
    return x


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _w_of_x(p: FadingParams, x: np.ndarray) -> np.ndarray:
    dc = p.constants
    with np.errstate(divide="ignore"):
        return np.exp(0.5 * p.alpha * (np.log(x) - math.log(p.gamma_bar)) - dc.log_c)


def log_pdf_power(p: FadingParams, x) -> np.ndarray:
    """Natural log of :func:`pdf_power`."""
    x = _as_array(x)
    dc = p.constants
    w = _w_of_x(p, x)
    e = 0.5 * p.alpha * p.mu - 1.0
    # mu ln w - ln x = e ln x + const, with the x -> 0 limit taken explicitly
    at_zero = -np.inf if e > 0 else (np.inf if e < 0 else 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(x == 0, at_zero, e * np.log(x))
    power = power + p.mu * (-0.5 * p.alpha * math.log(p.gamma_bar) - dc.log_c)
    lf = 0.0 if dc.beta == 0.0 else log_hyp1f1_pos(p.m, p.mu, np.ravel(dc.beta * w)).reshape(w.shape)
    return math.log(0.5 * p.alpha) + dc.log_theta + power - w + lf


def pdf_power(p: FadingParams, x):
    """Density of the power variable at ``x >= 0``."""
    return _ret(x, np.exp(log_pdf_power(p, x)))


def _nb_weights(p: FadingParams):
    """Negative-binomial mixing weights, truncated where the tail is < 1e-17."""
    beta = p.constants.beta
    if beta == 0.0:
        return np.ones(1)
    nb = stats.nbinom(p.m, 1.0 - beta)
    jmax = int(max(nb.isf(_NB_TAIL), 1)) + 8
    j = np.arange(jmax + 1)
    return nb.pmf(j)


def cdf_power(p: FadingParams, x):
    """CDF of the power variable.

    Evaluated as ``sum_j w_j P(mu + j, lambda(x) / c)`` with
    ``lambda(x) = (x / gamma_bar)^(alpha/2)``, ``w_j`` the negative-binomial
    weights and ``P`` the regularized lower incomplete gamma function.  All
    terms are positive, so there is no cancellation for any argument.
    """
    x = _as_array(x)
    w = _w_of_x(p, x)
    out = np.zeros_like(w)
    for j, wj in enumerate(_nb_weights(p)):
        if wj > 0:
            out += wj * gammainc(p.mu + j, w)
    return _ret(x, np.minimum(out, 1.0))


def cdf_envelope(p: FadingParams, r):
    """CDF of the envelope ``R = sqrt(X)``, i.e. ``cdf_power(p, r**2)``."""
    r = _as_array(r)
    return cdf_power(p, r * r) if np.ndim(r) else float(cdf_power(p, float(r) ** 2))


def log_mellin(p: FadingParams, s: float) -> float:
    """``ln E[X^(s-1)]``."""
    if s == 1.0:
        return 0.0
    dc = p.constants
    q = 2.0 * (s - 1.0) / p.alpha
    if not p.mu + q > 0:
        raise DomainError(f"Mellin transform diverges: mu + 2(s-1)/alpha = {p.mu + q} <= 0")
    log_f = 0.0 if dc.beta == 0.0 else math.log(gauss_2f1_unit(p.m, p.mu + q, p.mu, dc.beta).value)
    return (dc.log_theta + (s - 1.0) * math.log(p.gamma_bar) + q * dc.log_c
            + float(gammaln(p.mu + q)) + log_f)


def mellin(p: FadingParams, s: float) -> float:
    """Mellin transform ``E[X^(s-1)]``; defined for ``mu + 2(s-1)/alpha > 0``."""
    return math.exp(log_mellin(p, s))


def moment(p: FadingParams, n: float) -> float:
    """Moment ``E[X^n]`` for real ``n`` (half-integers included)."""
    return mellin(p, n + 1.0)


def sample(p: FadingParams, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. power samples.

    Uses ``xi^2 ~ Gamma(m, 1/m)``, ``P ~ Poisson(mu kappa xi^2)``,
    ``W ~ Gamma(mu + P, 1)`` and ``X = gamma_bar (c W)^(2/alpha)``.
    """
    count = int(count)
    if count < 1:
        raise ParameterError("count must be >= 1")
    dc = p.constants
    if p.kappa == 0.0:
        w = rng.gamma(p.mu, 1.0, count)
    else:
        xi2 = rng.gamma(p.m, 1.0 / p.m, count)
        k = rng.poisson(p.mu * p.kappa * xi2)
        w = rng.gamma(p.mu + k, 1.0)
    return p.gamma_bar * np.exp((2.0 / p.alpha) * (dc.log_c + np.log(w)))
