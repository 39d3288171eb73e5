"""Application metrics: cascaded outage, secrecy, and IRS-assisted outage."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .akmu import FadingParams, cdf_envelope, moment
from .errors import DomainError, ParameterError
from .prodratio import PairStats, product_cdf, product_moment, ratio_cdf
from .quadrature import adaptive_gl
from .result import EvalResult

K_SWITCH = 100.0
DEFAULT_POSITIONS = ((0.0, 0.0), (0.0, 10.0), (90.0, 0.0))


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


# ---------------------------------------------------------------------------
# cascaded channel


def cascade_outage(ps: PairStats, gamma_th: float) -> EvalResult:
    """Outage probability of the cascaded channel ``X1 X2`` at threshold ``gamma_th``."""
    if not gamma_th > 0:
        raise DomainError("gamma_th must be > 0")
    return product_cdf(ps, gamma_th)


def amount_of_fading(ps: PairStats) -> float:
    """Variance over squared mean of the cascaded power."""
    return product_moment(ps, 2.0) / product_moment(ps, 1.0) ** 2 - 1.0


# ---------------------------------------------------------------------------
# secrecy


@dataclass(frozen=True)
class SecrecyScenario:
    """Legitimate link ``sd``, eavesdropper link ``se`` and target rate in bits."""

    sd: FadingParams
    se: FadingParams
    rate_rs: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rate_rs) and self.rate_rs >= 0):
            raise ParameterError(f"rate_rs must be >= 0, got {self.rate_rs}")

    @property
    def gamma_th(self) -> float:
        return 2.0**self.rate_rs

    @property
    def pair(self) -> PairStats:
        return PairStats(self.sd, self.se)


def secrecy_outage(sc: SecrecyScenario) -> EvalResult:
    """Secrecy outage probability, using ``(1 + g_SD)/(1 + g_SE) ~ g_SD / g_SE``."""
    return ratio_cdf(sc.pair, sc.gamma_th)


def spsc(sc: SecrecyScenario) -> EvalResult:
    """Probability of strictly positive secrecy capacity."""
    r = secrecy_outage(dataclasses.replace(sc, rate_rs=0.0))
    return EvalResult(1.0 - r.value, r.abs_err_est, r.terms_used)


# ---------------------------------------------------------------------------
# IRS-assisted link


@dataclass(frozen=True)
class IrsScenario:
    """Source, IRS with ``n_elements`` reflectors, and destination.

    Link means are set from the geometry, ``gamma_bar = d^-pathloss_beta``,
    overriding whatever ``gamma_bar`` the given parameters carry.
    """

    sd: FadingParams
    sr: FadingParams
    rd: FadingParams
    n_elements: int = 16
    gamma_s_db: float = 73.0
    positions: tuple = DEFAULT_POSITIONS
    pathloss_beta: float = 4.0
    gamma_s: float = field(init=False)

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ParameterError(f"n_elements must be an integer >= 1, got {self.n_elements}")
        if not self.pathloss_beta > 0:
            raise ParameterError("pathloss_beta must be > 0")
        pos = tuple(tuple(float(c) for c in p) for p in self.positions)
        if len(pos) != 3 or any(len(p) != 2 for p in pos):
            raise ParameterError("positions must be three (x, y) pairs: S, IRS, D")
        s, r, d = (np.array(p) for p in pos)
        dists = {"sd": np.hypot(*(d - s)), "sr": np.hypot(*(r - s)), "rd": np.hypot(*(d - r))}
        for name, dist in dists.items():
            if not dist > 0:
                raise ParameterError(f"nodes of link {name} coincide")
            p = getattr(self, name)
            object.__setattr__(self, name,
                               dataclasses.replace(p, gamma_bar=float(dist ** -self.pathloss_beta)))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "n_elements", int(self.n_elements))
        object.__setattr__(self, "gamma_s", float(db_to_linear(self.gamma_s_db)))


@dataclass(frozen=True)
class IrsGammaParams:
    k_mom: float
    theta_mom: float
    mu_half: float
    sigma2: float


def irs_gamma_params(sc: IrsScenario) -> IrsGammaParams:
    """Moment-matched Gamma law of ``u = sum_i g_SR,i g_RD,i``."""
    mu = moment(sc.sr, 0.5) * moment(sc.rd, 0.5)
    sigma2 = sc.sr.gamma_bar * sc.rd.gamma_bar - mu * mu
    if not sigma2 > 0:
        raise ArithmeticError(f"non-positive per-element variance {sigma2!r}")
    n = sc.n_elements
    return IrsGammaParams(n * mu * mu / sigma2, sigma2 / mu, mu, sigma2)


def _envelope_threshold(sc: IrsScenario, gamma_th: float) -> float:
    if not gamma_th > 0:
        raise DomainError("gamma_th must be > 0")
    return math.sqrt(gamma_th / sc.gamma_s)


def irs_outage_gamma(sc: IrsScenario, gamma_th: float, *, rtol: float = 1e-10) -> EvalResult:
    """OP with ``u`` replaced by its moment-matched Gamma law.

    Integrates ``t^(k-1) e^-t F_SD(r - t theta) / Gamma(k)`` over
    ``0 <= t <= r / theta`` where ``r = sqrt(gamma_th / gamma_s)`` and
    ``F_SD`` is the envelope CDF of the direct link.

    Raises
    ------
    DomainError
        If ``k_mom`` exceeds ``K_SWITCH``; use :func:`irs_outage_gaussian`.
    """
    r = _envelope_threshold(sc, gamma_th)
    g = irs_gamma_params(sc)
    k, th = g.k_mom, g.theta_mom
    if k > K_SWITCH:
        raise DomainError(
            f"k_mom = {k:.4g} exceeds {K_SWITCH:g}; the Gamma form is unstable here, "
            "use irs_outage_gaussian")
    t_max = r / th
    # the Gamma(k) weight is negligible outside k +- 40 sqrt(k) + 40
    hi = min(t_max, k + 40.0 * math.sqrt(k) + 40.0)
    lo = max(0.0, k - 40.0 * math.sqrt(k) - 40.0)
    if hi <= lo:
        return EvalResult(0.0, 0.0)
    lg = float(gammaln(k))

    if k < 1.0:
        # s = t^k removes the t^(k-1) endpoint singularity
        def f(s):
            t = s ** (1.0 / k)
            return np.exp(-t - lg) / k * cdf_envelope(sc.sd, np.maximum(r - t * th, 0.0))
        a, b = lo**k, hi**k
    else:
        def f(t):
            with np.errstate(divide="ignore"):
                w = np.exp((k - 1.0) * np.log(t) - t - lg)
            return w * cdf_envelope(sc.sd, np.maximum(r - t * th, 0.0))
        a, b = lo, hi
    val, err = adaptive_gl(f, a, b, atol=1e-15, rtol=rtol)
    return EvalResult(min(max(val, 0.0), 1.0), err)


def irs_outage_gaussian(sc: IrsScenario, gamma_th: float, *, rtol: float = 1e-10) -> EvalResult:
    """OP with ``u`` replaced by ``Normal(N mu_half, N sigma^2)``.

    With ``x = N mu - sqrt(2 N sigma^2) t`` the OP is
    ``pi^-1/2 int_L^inf e^(-t^2) F_SD(sqrt(2 N sigma^2) t - (N mu - r)) dt``,
    ``L = (N mu - r) / sqrt(2 N sigma^2)``.
    """
    r = _envelope_threshold(sc, gamma_th)
    g = irs_gamma_params(sc)
    n = sc.n_elements
    s = math.sqrt(2.0 * n * g.sigma2)
    shift = n * g.mu_half - r
    L = shift / s
    lo = max(L, -7.0)
    hi = max(L, 0.0) + 7.0

    def f(t):
        return np.exp(-t * t) * cdf_envelope(sc.sd, np.maximum(s * t - shift, 0.0))

    val, err = adaptive_gl(f, lo, hi, atol=1e-300, rtol=rtol)
    scale = 1.0 / math.sqrt(math.pi)
    return EvalResult(min(max(scale * val, 0.0), 1.0), scale * err + 1e-21)


def irs_outage(sc: IrsScenario, gamma_th: float, method: str = "auto") -> EvalResult:
    """IRS OP by ``method`` in {"gamma", "gaussian", "auto"}; auto switches at ``K_SWITCH``."""
    if method == "gamma":
        return irs_outage_gamma(sc, gamma_th)
    if method == "gaussian":
        return irs_outage_gaussian(sc, gamma_th)
    if method != "auto":
        raise ParameterError(f"unknown method {method!r}")
    if irs_gamma_params(sc).k_mom > K_SWITCH:
        return irs_outage_gaussian(sc, gamma_th)
    return irs_outage_gamma(sc, gamma_th)
