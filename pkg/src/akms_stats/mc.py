"""Seeded Monte Carlo harness for the product, ratio and IRS statistics.

Stream ``k`` of a run is seeded from ``SeedSequence(master_seed, spawn_key=(k,))``,
so any stream can be rebuilt on its own.  Trials are split over the streams
and results are merged in stream order, which keeps runs bit-reproducible
whether the streams are processed serially or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .akmu import FadingParams, sample
from .apps import IrsScenario
from .errors import ParameterError
from .prodratio import PairStats, product_cdf_curve, ratio_cdf_curve

_CHUNK = 1 << 16


@dataclass(frozen=True)
class McConfig:
    master_seed: int = 2024
    trials: int = 1_000_000
    stream_count: int = 8

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ParameterError("master_seed must be a 64-bit unsigned integer")
        if int(self.trials) < 1000:
            raise ParameterError(f"trials must be >= 1000, got {self.trials}")
        if int(self.stream_count) < 1:
            raise ParameterError("stream_count must be >= 1")

    def stream(self, k: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(k),))
        return np.random.Generator(np.random.PCG64(ss))

    def counts(self) -> list[int]:
        q, r = divmod(int(self.trials), int(self.stream_count))
        return [q + (k < r) for k in range(int(self.stream_count))]


@dataclass(frozen=True)
class SampleSummary:
    """Sorted draws plus moment estimates with standard errors."""

    samples: np.ndarray
    mean: float
    mean_se: float
    var: float
    var_se: float

    def ecdf(self, grid) -> np.ndarray:
        return np.searchsorted(self.samples, np.asarray(grid, dtype=float), side="right") / self.samples.size


def _summarize(x: np.ndarray) -> SampleSummary:
    x = np.sort(x)
    n = x.size
    mean = float(np.mean(x))
    d = x - mean
    var = float(np.mean(d * d)) * n / (n - 1)
    m4 = float(np.mean(d**4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / n)
    return SampleSummary(x, mean, math.sqrt(var / n), var, var_se)


def _run_streams(fn, cfg: McConfig, jobs: int):
    args = [(cfg, k, c) for k, c in enumerate(cfg.counts())]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, *zip(*args)))
    return [fn(*a) for a in args]


def _pair_draws(p1: FadingParams, p2: FadingParams, op: str, cfg: McConfig, k: int, count: int):
    rng = cfg.stream(k)
    x1 = sample(p1, rng, count)
    x2 = sample(p2, rng, count)
    return x1 * x2 if op == "product" else x1 / x2


def simulate_product(ps: PairStats, cfg: McConfig, jobs: int = 1) -> SampleSummary:
    """Draws of ``Y = X1 X2``."""
    parts = _run_streams(_Bound(ps, "product"), cfg, jobs)
    return _summarize(np.concatenate(parts))


def simulate_ratio(ps: PairStats, cfg: McConfig, jobs: int = 1) -> SampleSummary:
    """Draws of ``Z = X1 / X2``."""
    parts = _run_streams(_Bound(ps, "ratio"), cfg, jobs)
    return _summarize(np.concatenate(parts))


class _Bound:
    """Picklable stream worker for the pair simulations."""

    def __init__(self, ps: PairStats, op: str):
        self.p1, self.p2, self.op = ps.p1, ps.p2, op

    def __call__(self, cfg, k, count):
        return _pair_draws(self.p1, self.p2, self.op, cfg, k, count)


def ks_distance(samples: np.ndarray, cdf_at_samples: np.ndarray) -> float:
    """Kolmogorov-Smirnov statistic of sorted ``samples`` against CDF values."""
    n = samples.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf_at_samples), np.max(cdf_at_samples - (i - 1) / n)))


def analytic_cdf_at(samples: np.ndarray, curve, points: int = 400) -> np.ndarray:
    """Evaluate a CDF-curve routine at sorted ``samples`` through a PCHIP in ``ln x``."""
    lo, hi = math.log(samples[0]), math.log(samples[-1])
    v = np.linspace(lo, hi, points)
    F = curve(np.exp(v))
    F = np.maximum.accumulate(F)
    return np.clip(PchipInterpolator(v, F)(np.log(samples)), 0.0, 1.0)


def ks_product(ps: PairStats, summary: SampleSummary) -> float:
    s = summary.samples
    return ks_distance(s, analytic_cdf_at(s, lambda y: product_cdf_curve(ps, y)))


def ks_ratio(ps: PairStats, summary: SampleSummary) -> float:
    s = summary.samples
    return ks_distance(s, analytic_cdf_at(s, lambda z: ratio_cdf_curve(ps, z)))


@dataclass(frozen=True)
class OutageCurve:
    """Empirical OP per threshold with a two-sided confidence band."""

    gamma_th: np.ndarray
    op: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    trials: int

    def half_width(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)


class _IrsWorker:
    def __init__(self, sc: IrsScenario, n_elements: int, thresholds: np.ndarray):
        self.sc, self.n, self.th = sc, n_elements, thresholds

    def __call__(self, cfg, k, count):
        rng = cfg.stream(k)
        sc = self.sc
        hits = np.zeros(self.th.size, dtype=np.int64)
        done = 0
        while done < count:
            c = min(_CHUNK, count - done)
            g = np.sqrt(sample(sc.sd, rng, c))
            if self.n > 0:
                a = np.sqrt(sample(sc.sr, rng, c * self.n)).reshape(c, self.n)
                b = np.sqrt(sample(sc.rd, rng, c * self.n)).reshape(c, self.n)
                g = g + np.sum(a * b, axis=1)
            snr = np.sort(sc.gamma_s * g * g)
            hits += np.searchsorted(snr, self.th, side="right")
            done += c
        return hits


def simulate_irs(sc: IrsScenario, cfg: McConfig, gamma_th_db, *, n_elements: int | None = None,
                 level: float = 0.99, jobs: int = 1) -> OutageCurve:
    """Empirical OP of ``gamma_s (g_SD + sum_i g_SR,i g_RD,i)^2`` over a dB grid.

    ``n_elements`` overrides the scenario's ``N``; ``0`` keeps only the
    direct link.
    """
    n = sc.n_elements if n_elements is None else int(n_elements)
    if n < 0:
        raise ParameterError("n_elements must be >= 0")
    th = 10.0 ** (np.asarray(gamma_th_db, dtype=float) / 10.0)
    hits = sum(_run_streams(_IrsWorker(sc, n, th), cfg, jobs))
    trials = int(cfg.trials)
    p = hits / trials
    z = norm.ppf(0.5 + 0.5 * level)
    hw = z * np.sqrt(np.maximum(p * (1.0 - p), 1.0 / trials) / trials)
    return OutageCurve(th, p, np.maximum(p - hw, 0.0), np.minimum(p + hw, 1.0), trials)
