"""Acceptance criteria 1-10; each test records one PASS/FAIL summary line."""

import math
import os
import time

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import gammainc, gammaln, ive, kv

from akms_stats.akmu import FadingParams, cdf_power, pdf_power, sample
from akms_stats.approx import (
    beta_prime_cdf,
    fit_beta_prime_ratio,
    fit_gamma_product,
    gamma_cdf,
    max_cdf_gap,
)
from akms_stats.apps import (
    IrsScenario,
    SecrecyScenario,
    amount_of_fading,
    cascade_outage,
    irs_outage,
    secrecy_outage,
    spsc,
)
from akms_stats.cli import run
from akms_stats.errors import DegenerateCaseError, MomentUndefinedError
from akms_stats.mc import McConfig, ks_product, ks_ratio, simulate_irs, simulate_product, simulate_ratio
from akms_stats.prodratio import (
    PairStats,
    product_cdf,
    product_cdf_asymptotic,
    product_cdf_curve,
    product_moment,
    product_pdf,
    product_pdf_series,
    ratio_cdf,
    ratio_cdf_asymptotic,
    ratio_cdf_curve,
    ratio_moment,
    ratio_pdf,
    ratio_pdf_same_alpha,
    ratio_pdf_series,
)
from conftest import (
    APPROX_M,
    CASCADE_A,
    FIG_SETS,
    IRS,
    SECRECY,
    criterion,
    pair,
    product_mass,
    random_pairs,
    ratio_mass,
)

Z99 = stats.norm.ppf(0.995)
SEED = 20240611
MC_TRIALS = 1_000_000


def _band(p_hat, n):
    return Z99 * math.sqrt(max(p_hat * (1 - p_hat), 1.0 / n) / n)


def test_criterion_01_normalisation():
    with criterion(1, "normalisation of product and ratio densities") as info:
        t0 = time.perf_counter()
        sets = [pair(n) for n in FIG_SETS] + random_pairs(10)
        worst = max(max(abs(product_mass(ps) - 1), abs(ratio_mass(ps) - 1)) for ps in sets)
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{len(sets)} sets, worst |mass - 1| = {worst:.1e}, {elapsed:.1f} s"
        assert worst < 1e-7, info["detail"]
        assert elapsed < 10.0, info["detail"]


def test_criterion_02_series_vs_integral():
    with criterion(2, "series against integral densities") as info:
        worst_p = worst_r = 0.0
        y = np.logspace(-2, 1.3, 20)
        zz = np.logspace(math.log10(0.05), math.log10(2.5), 20)
        for name in FIG_SETS:
            ps = pair(name)
            for v in y:
                worst_p = max(worst_p, abs(product_pdf_series(ps, v).value / product_pdf(ps, v).value - 1))
            for x in zz:
                z = x / ps.zeta
                worst_r = max(worst_r, abs(ratio_pdf_series(ps, z).value / ratio_pdf(ps, z).value - 1))
        info["detail"] = f"80 points each, worst rel product {worst_p:.1e}, ratio {worst_r:.1e}"
        assert worst_p < 1e-6 and worst_r < 1e-6, info["detail"]
        same = PairStats(FadingParams(2.0, 3.0, 1.5, 2.0), FadingParams(2.0, 1.2, 2.5, 5.0))
        with pytest.raises(DegenerateCaseError):
            ratio_pdf_series(same, 1.1 / same.zeta)
        with pytest.raises(DegenerateCaseError):
            ratio_pdf_series(pair("vary_alpha"), 1.0 / pair("vary_alpha").zeta)
        info["detail"] += "; degenerate cases raise"


def test_criterion_03_same_alpha():
    with criterion(3, "equal-alpha Appell form against integral") as info:
        ps = PairStats(FadingParams(2.0, 3.0, 1.5, 2.0), FadingParams(2.0, 1.2, 2.5, 5.0))
        z = np.logspace(-2, 2, 20)
        worst = max(abs(ratio_pdf_same_alpha(ps, v).value / ratio_pdf(ps, v).value - 1) for v in z)
        info["detail"] = f"20 points, worst rel {worst:.1e}"
        assert worst < 1e-8, info["detail"]


def test_criterion_04_moments():
    with criterion(4, "closed-form moments against quadrature") as info:
        worst = 0.0
        checked = 0
        for name in FIG_SETS:
            ps = pair(name)
            for n in (0.5, 1.0, 2.0):
                worst = max(worst, abs(product_mass(ps, n) / product_moment(ps, n) - 1))
                checked += 1
                if ps.p2.mu > 2 * n / ps.p2.alpha:
                    worst = max(worst, abs(ratio_mass(ps, n) / ratio_moment(ps, n) - 1))
                    checked += 1
                else:
                    with pytest.raises(MomentUndefinedError):
                        ratio_moment(ps, n)
            edge = 0.5 * ps.p2.alpha * ps.p2.mu
            assert math.isfinite(ratio_moment(ps, edge * (1 - 1e-9)))
            for n in (edge, edge * (1 + 1e-9), edge + 1):
                with pytest.raises(MomentUndefinedError):
                    ratio_moment(ps, n)
        info["detail"] = f"{checked} moments, worst rel {worst:.1e}; undefined exactly past alpha2 mu2/2"
        assert worst < 1e-6, info["detail"]


def test_criterion_05_monte_carlo_ks():
    with criterion(5, "Kolmogorov-Smirnov gate with 1e6 samples") as info:
        t0 = time.perf_counter()
        ps = pair("vary_alpha")
        cfg = McConfig(SEED, MC_TRIALS)
        sp = simulate_product(ps, cfg)
        sr = simulate_ratio(ps, cfg)
        kp, kr = ks_product(ps, sp), ks_ratio(ps, sr)
        again = simulate_product(ps, cfg)
        elapsed = time.perf_counter() - t0
        info["detail"] = f"KS product {kp:.5f}, ratio {kr:.5f}, {elapsed:.1f} s"
        assert np.array_equal(sp.samples, again.samples)
        assert kp < 0.0017 and kr < 0.0017, info["detail"]
        assert elapsed < 60.0, info["detail"]


def test_criterion_06_asymptotics():
    with criterion(6, "asymptotic CDFs") as info:
        ps = pair("vary_alpha")
        a1mu1 = 0.5 * ps.p1.alpha * ps.p1.mu
        F = product_cdf_asymptotic(ps, np.array([1e-8, 1e-6]))
        s_p = math.log(F[1] / F[0]) / math.log(100.0)
        G = ratio_cdf_asymptotic(ps, np.array([1e-9, 1e-7]))
        s_r = math.log(G[1] / G[0]) / math.log(100.0)
        y = math.exp(2.0 / ps.p1.alpha * math.log(1e-3) - ps.log_delta)
        z = math.exp(2.0 / ps.p1.alpha * math.log(1e-3) - ps.log_zeta)
        rp = product_cdf(ps, y).value / product_cdf_asymptotic(ps, y)
        rr = ratio_cdf(ps, z).value / ratio_cdf_asymptotic(ps, z)
        info["detail"] = (f"ratios {rp:.5f}, {rr:.5f}; slope errors "
                          f"{abs(s_p - a1mu1):.1e}, {abs(s_r - a1mu1):.1e}")
        assert 0.99 <= rp <= 1.01 and 0.99 <= rr <= 1.01, info["detail"]
        assert abs(s_p - a1mu1) < 1e-10 and abs(s_r - a1mu1) < 1e-10, info["detail"]


def test_criterion_07_surrogates():
    with criterion(7, "Gamma and Beta-prime surrogate CDF gaps") as info:
        grid = np.logspace(-2, 1, 200)
        gaps = []
        for m1, m2 in APPROX_M:
            ps = PairStats(FadingParams(1.5, 5.0, 1.2, m1), FadingParams(2.5, 2.1, 3.0, m2))
            g = max_cdf_gap(lambda v: product_cdf_curve(ps, v),
                            lambda v: gamma_cdf(fit_gamma_product(ps), v), grid)
            b = max_cdf_gap(lambda v: ratio_cdf_curve(ps, v),
                            lambda v: beta_prime_cdf(fit_beta_prime_ratio(ps), v), grid)
            gaps.append(f"m={m1:g},{m2:g}: {g:.4f}/{b:.4f}")
            assert g < 0.05 and b < 0.05, "; ".join(gaps)
        info["detail"] = "product/ratio " + "; ".join(gaps)


def _cascade(alpha1=None, alpha2=None, gamma_bar1=1.0):
    a, b = list(CASCADE_A["link1"]) + [gamma_bar1], list(CASCADE_A["link2"])
    if alpha1 is not None:
        a[0] = alpha1
    if alpha2 is not None:
        b[0] = alpha2
    return PairStats(FadingParams(*a), FadingParams(*b))


def _af_band(samples):
    # amount of fading with a batch-means standard error
    batches = samples.reshape(100, -1)
    af = batches.var(axis=1, ddof=1) / batches.mean(axis=1) ** 2
    x = samples
    return float(x.var(ddof=1) / x.mean() ** 2), float(af.std(ddof=1) / math.sqrt(af.size))


def test_criterion_08_applications():
    with criterion(8, "application trends with Monte Carlo bands") as info:
        gth = 10 ** 0.5
        worst = 0.0  # largest |analytic - MC| / allowed half-width

        def check(analytic, est, half):
            nonlocal worst
            worst = max(worst, abs(analytic - est) / half)
            assert abs(analytic - est) <= half, f"{analytic} vs {est} +- {half}"

        # (a) cascade OP against the mean of link 1 and against alpha1
        ps = _cascade()
        y = np.sort(_raw_product(ps, 0))
        gb = 10 ** (np.linspace(0, 20, 5) / 10)
        op = []
        for g in gb:
            sc = PairStats(FadingParams(*CASCADE_A["link1"], g), ps.p2)
            op.append(cascade_outage(sc, gth).value)
            p_hat = np.searchsorted(y, gth / g, side="right") / y.size
            check(op[-1], p_hat, _band(p_hat, y.size))
        assert np.all(np.diff(op) < 0), f"OP against mean: {op}"
        # alpha1 ordering holds once the mean is above the threshold; below it the spread wins
        for j, db in enumerate((10.0, 20.0)):
            op = []
            for k, a1 in enumerate((1.0, 1.5, 2.0, 2.5, 3.0)):
                sc = _cascade(alpha1=a1, gamma_bar1=10 ** (db / 10))
                op.append(cascade_outage(sc, gth).value)
                y = _raw_product(sc, 1 + 5 * j + k)
                p_hat = float(np.mean(y <= gth))
                check(op[-1], p_hat, _band(p_hat, y.size))
            assert np.all(np.diff(op) < 0), f"OP against alpha1 at {db} dB: {op}"

        # (b) amount of fading against alpha1 and alpha2
        for which in ("alpha1", "alpha2"):
            af = []
            for k, a in enumerate((1.0, 1.5, 2.0, 2.5, 3.0)):
                sc = _cascade(**{which: a})
                af.append(amount_of_fading(sc))
                est, se = _af_band(_raw_product(sc, 20 + k))
                check(af[-1], est, Z99 * se)
            assert np.all(np.diff(af) < 0), f"AF against {which}: {af}"

        # (c) SOP against the eavesdropper mean, (d) SPSC + SOP(0) = 1
        sd, se = FadingParams(*SECRECY["sd"]), FadingParams(*SECRECY["se"])
        z = np.sort(_raw_ratio(PairStats(sd, se), 30))
        sop = []
        for db in np.linspace(-10, 10, 5):
            g = 10 ** (db / 10)
            sc = SecrecyScenario(sd, FadingParams(*SECRECY["se"], g), 1.0)
            sop.append(secrecy_outage(sc).value)
            p_hat = np.searchsorted(z, 2.0 * g, side="right") / z.size
            check(sop[-1], p_hat, _band(p_hat, z.size))
            s0 = SecrecyScenario(sd, sc.se, 0.0)
            assert spsc(sc).value + secrecy_outage(s0).value == pytest.approx(1.0, abs=1e-15)
        assert np.all(np.diff(sop) > 0), f"SOP: {sop}"

        # (e) IRS OP against the number of elements
        th_db = np.linspace(-10, 0, 5)
        curves = []
        for k, n in enumerate((16, 32, 64)):
            sc = IrsScenario(*(FadingParams(*IRS[key]) for key in ("sd", "sr", "rd")), n_elements=n)
            oc = simulate_irs(sc, McConfig(SEED + 40 + k, MC_TRIALS), th_db)
            curves.append([irs_outage(sc, 10 ** (d / 10)).value for d in th_db])
            for a, p_hat, hw in zip(curves[-1], oc.op, oc.half_width()):
                check(a, p_hat, max(hw, 0.02))
        assert np.all(np.diff(np.array(curves), axis=0) < 0), f"IRS OP: {curves}"
        info["detail"] = f"all trends hold; worst |analytic - MC| / allowed = {worst:.2f}"


def _raw_product(ps, k):
    rng = McConfig(SEED + k, MC_TRIALS).stream(0)
    return sample(ps.p1, rng, MC_TRIALS) * sample(ps.p2, rng, MC_TRIALS)


def _raw_ratio(ps, k):
    rng = McConfig(SEED + k, MC_TRIALS).stream(0)
    return sample(ps.p1, rng, MC_TRIALS) / sample(ps.p2, rng, MC_TRIALS)


def _kappa_mu_log_pdf(alpha, kappa, mu, x):
    """Unshadowed link density in the Bessel form, unit mean."""
    q = 2.0 / alpha
    j = np.arange(400)
    lw = -mu * kappa + j * math.log(mu * kappa) - gammaln(j + 1)
    c = np.sum(np.exp(lw + gammaln(mu + j + q) - gammaln(mu + j))) ** (-alpha / 2)
    w = x ** (alpha / 2) / c
    z = 2 * math.sqrt(mu * kappa * w)
    return (0.5 * (mu - 1) * math.log(w / (mu * kappa)) - w - mu * kappa
            + math.log(ive(mu - 1, z)) + z + math.log(alpha * w / (2 * x)))


def _kappa_mu_product_pdf(l1, l2, y):
    def f(t):
        return math.exp(_kappa_mu_log_pdf(*l1, math.exp(t)) + _kappa_mu_log_pdf(*l2, y * math.exp(-t)))

    pts = np.linspace(-12, 12, 25)
    return sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))


def test_criterion_09_reductions():
    with criterion(9, "Gamma and kappa-mu reductions") as info:
        m1, m2 = 1.7, 3.2
        ps = PairStats(FadingParams(2.0, 0.0, m1, 1.0), FadingParams(2.0, 0.0, m2, 1.0))
        s = m1 * m2
        worst = 0.0

        def bessel(v):
            lv = (math.log(2.0) + 0.5 * (m1 + m2) * math.log(s) - gammaln(m1) - gammaln(m2)
                  + (0.5 * (m1 + m2) - 1) * math.log(v))
            return math.exp(lv) * kv(m1 - m2, 2 * math.sqrt(s * v))

        bp = stats.betaprime(m1, m2, scale=m2 / m1)
        for v in np.logspace(-1.5, 1, 8):
            ref_cdf = integrate.quad(bessel, 0, v, epsabs=0, epsrel=1e-13, limit=200)[0]
            pairs = [
                (product_pdf(ps, v).value, bessel(v)),
                (product_pdf_series(ps, v).value, bessel(v)),
                (product_cdf(ps, v).value, ref_cdf),
                (ratio_pdf(ps, v).value, bp.pdf(v)),
                (ratio_cdf(ps, v).value, bp.cdf(v)),
                (pdf_power(ps.p1, v), stats.gamma(m1, scale=1 / m1).pdf(v)),
                (cdf_power(ps.p1, v), gammainc(m1, m1 * v)),
            ]
            worst = max(worst, max(abs(a / b - 1) for a, b in pairs))
        for n in (0.5, 1.0, 2.0):
            ref = math.exp(gammaln(m1 + n) + gammaln(m2 + n) - gammaln(m1) - gammaln(m2) - n * math.log(s))
            worst = max(worst, abs(product_moment(ps, n) / ref - 1))
        l1, l2 = (1.5, 5.0, 1.2), (2.5, 2.1, 3.0)
        km = PairStats(FadingParams(*l1, 1e6), FadingParams(*l2, 1e6))
        worst_km = max(abs(product_pdf(km, v).value / _kappa_mu_product_pdf(l1, l2, v) - 1)
                       for v in (0.05, 0.3, 1.0, 3.0))
        info["detail"] = f"Gamma paths worst rel {worst:.1e}; kappa-mu product worst rel {worst_km:.1e}"
        assert worst < 1e-8 and worst_km < 1e-4, info["detail"]


CLI_PAIR = """
[link1]
alpha = 1.5
kappa = 5.0
mu = 1.2
m = 2.8
[link2]
alpha = 2.5
kappa = 2.1
mu = 3.0
m = 4.4
[grid]
start = 0.01
stop = 10
points = 30
spacing = log
"""


def test_criterion_10_cli(tmp_path):
    with criterion(10, "CLI reproducibility and exit codes") as info:
        cfg = tmp_path / "run.ini"
        cfg.write_text(CLI_PAIR)
        outputs = []
        for k, (cmd, extra) in enumerate([("cdf-ratio", []), ("cdf-ratio", []),
                                          ("validate", ["--what", "product", "--trials", "1000000", "--seed", "3"]),
                                          ("validate", ["--what", "product", "--trials", "1000000", "--seed", "3"])]):
            out = tmp_path / f"o{k}.csv"
            assert run([cmd, "--config", str(cfg), "--out", str(out), *extra]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] and outputs[2] == outputs[3]
        codes = {}
        bad = tmp_path / "bad.ini"
        bad.write_text(CLI_PAIR.replace("kappa = 5.0", "kappa = -5.0"))
        codes[2] = run(["pdf-product", "--config", str(bad), "--out", str(tmp_path / "b.csv")])
        tight = tmp_path / "tight.ini"
        tight.write_text(CLI_PAIR + "[policy]\naccept = 1e-30\n")
        codes[3] = run(["pdf-product", "--config", str(tight), "--out", str(tmp_path / "t.csv")])
        codes[1] = run(["pdf-product", "--config", str(cfg), "--out", str(tmp_path / "no" / "x.csv")])
        info["detail"] = f"identical bytes on rerun; injected failures gave exit codes {codes}"
        assert codes == {2: 2, 3: 3, 1: 1}, info["detail"]
        assert not any(os.path.exists(tmp_path / f) for f in ("b.csv", "t.csv"))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
