"""Two-moment surrogates: Gamma for the product, Beta-prime for the ratio.

The Beta-prime surrogate matches the first two moments of each link
separately, then uses the exact ratio law of two Gamma variables.  It does
not match the moments of the ratio itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .akmu import FadingParams, moment
from .prodratio import PairStats, product_moment


@dataclass(frozen=True)
class GammaFit:
    """Gamma law with shape ``k`` and scale ``theta``."""

    k: float
    theta: float

    @property
    def dist(self):
        return stats.gamma(self.k, scale=self.theta)


@dataclass(frozen=True)
class BetaPrimeFit:
    """Ratio of ``Gamma(k1, theta1)`` to ``Gamma(k2, theta2)``."""

    k1: float
    k2: float
    theta1: float
    theta2: float

    @property
    def dist(self):
        # Z = (theta1/theta2) * B' with B' ~ BetaPrime(k1, k2)
        return stats.betaprime(self.k1, self.k2, scale=self.theta1 / self.theta2)


def _excess(second_moment: float, mean: float) -> float:
    c = second_moment / mean**2 - 1.0
    if not c > 0:
        raise ArithmeticError(f"moment ratio {c!r} is not positive")
    return c


def link_gamma_fit(p: FadingParams) -> GammaFit:
    """Match ``Gamma(k, theta)`` to the first two moments of one link."""
    c = _excess(moment(p, 2.0), p.gamma_bar)
    return GammaFit(1.0 / c, p.gamma_bar * c)


def fit_gamma_product(ps: PairStats) -> GammaFit:
    """Gamma law with the exact mean and variance of ``Y = X1 X2``."""
    mean = ps.p1.gamma_bar * ps.p2.gamma_bar
    c = _excess(product_moment(ps, 2.0), mean)
    return GammaFit(1.0 / c, mean * c)


def fit_beta_prime_ratio(ps: PairStats) -> BetaPrimeFit:
    """Beta-prime surrogate of ``Z = X1 / X2`` from per-link Gamma fits."""
    g1 = link_gamma_fit(ps.p1)
    g2 = link_gamma_fit(ps.p2)
    return BetaPrimeFit(g1.k, g2.k, g1.theta, g2.theta)


def gamma_pdf(fit: GammaFit, y):
    return fit.dist.pdf(y)


def gamma_cdf(fit: GammaFit, y):
    return fit.dist.cdf(y)


def beta_prime_pdf(fit: BetaPrimeFit, z):
    return fit.dist.pdf(z)


def beta_prime_cdf(fit: BetaPrimeFit, z):
    return fit.dist.cdf(z)


def max_cdf_gap(exact, surrogate, grid) -> float:
    """Largest absolute difference between two CDF callables on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(np.asarray(exact(grid)) - np.asarray(surrogate(grid)))))

