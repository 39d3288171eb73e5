import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import kv

from akms_stats import kernels
from akms_stats._kernels_py import log_hyp1f1_pos as log_hyp1f1_py
from akms_stats.errors import AccuracyError, DegenerateCaseError, DomainError, ParameterError
from akms_stats.specfun import (
    appell_f2,
    fox_h,
    gauss_2f1_unit,
    humbert_phi2,
    hyp2f1_complex_b,
    kratzel_like,
    kummer_1f1,
    log_hyp1f1_pos,
    mellin_barnes_h,
)


class TestKummer:
    def test_zero_argument(self):
        assert kummer_1f1(2.3, 1.7, 0.0).value == 1.0

    def test_exponential_identity(self):
        assert kummer_1f1(1.0, 1.0, 2.0).value == pytest.approx(math.exp(2.0), rel=1e-14)

    def test_oracle(self, goldens):
        assert kummer_1f1(2.8, 1.2, 3.5).value == pytest.approx(goldens["special"]["v1_1f1"], rel=1e-13)

    def test_negative_argument_uses_kummer_transform(self):
        r = kummer_1f1(2.8, 1.2, -30.0)
        assert r.value == pytest.approx(float(mp.hyp1f1(2.8, 1.2, -30.0)), rel=1e-11)

    def test_negative_a(self):
        assert kummer_1f1(-2.5, 1.5, 4.0).value == pytest.approx(float(mp.hyp1f1(-2.5, 1.5, 4.0)), rel=1e-12)

    def test_large_argument_in_log_space(self):
        lv = log_hyp1f1_pos(4.4, 3.0, np.array([5e3]))[0]
        assert lv == pytest.approx(float(mp.log(mp.hyp1f1(4.4, 3.0, 5e3))), rel=1e-13)

    def test_bad_b(self):
        with pytest.raises(ParameterError):
            kummer_1f1(1.0, -1.0, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.1, 20), b=st.floats(0.1, 20), x=st.floats(0.0, 300))
    def test_log_kernel_matches_mpmath(self, a, b, x):
        lv = float(log_hyp1f1_pos(a, b, np.array([x]))[0])
        ref = float(mp.log(mp.hyp1f1(a, b, x)))
        assert lv == pytest.approx(ref, rel=1e-12, abs=1e-12)

    def test_compiled_and_fallback_kernels_agree(self):
        x = np.concatenate([np.linspace(0, 60, 301), np.logspace(2, 5, 50)])
        a, _ = kernels.log_hyp1f1_pos(2.8, 1.2, x, 1e-14, 10_000)
        b, _ = log_hyp1f1_py(2.8, 1.2, x, 1e-14, 10_000)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


class TestGauss2F1:
    def test_zero(self):
        assert gauss_2f1_unit(1.3, 2.2, 0.7, 0.0).value == 1.0

    def test_log_identity(self):
        assert gauss_2f1_unit(1, 1, 2, 0.5).value == pytest.approx(-math.log(0.5) / 0.5, rel=1e-14)

    def test_oracle(self, goldens):
        g = goldens["special"]
        assert gauss_2f1_unit(4.4, 3.0 + 2 / 2.5, 3.0, g["v2_z"]).value == pytest.approx(g["v2_2f1"], rel=1e-12)

    def test_near_one(self):
        assert gauss_2f1_unit(4.4, 3.8, 3.0, 0.97).value == pytest.approx(
            float(mp.hyp2f1(4.4, 3.8, 3.0, 0.97)), rel=1e-11)

    def test_domain(self):
        with pytest.raises(DomainError):
            gauss_2f1_unit(1, 1, 2, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.1, 12), b=st.floats(0.1, 12), c=st.floats(0.2, 12), z=st.floats(0.0, 0.95))
    def test_matches_mpmath(self, a, b, c, z):
        ref = float(mp.hyp2f1(a, b, c, z))
        assert gauss_2f1_unit(a, b, c, z).value == pytest.approx(ref, rel=1e-11)

    def test_complex_b(self):
        b = np.array([2.0 + 3.0j, 0.7 - 11.0j, 5.5 + 0.0j])
        vals, _ = hyp2f1_complex_b(2.8, b, 1.2, 0.6)
        ref = [complex(mp.hyp2f1(2.8, complex(v), 1.2, 0.6)) for v in b]
        np.testing.assert_allclose(vals, ref, rtol=1e-12)


class TestAppellF2:
    def test_origin(self):
        assert appell_f2(4.2, 2.8, 4.4, 1.2, 3.0, 0.0, 0.0).value == 1.0

    def test_reduction(self):
        r = appell_f2(4.2, 2.8, 4.4, 1.2, 3.0, 0.3, 0.0).value
        assert r == pytest.approx(float(mp.hyp2f1(4.2, 2.8, 1.2, 0.3)), rel=1e-13)

    def test_oracle(self, goldens):
        g = goldens["special"]
        assert g["v3_f2"] == pytest.approx(g["v3_f2_mpmath"], rel=1e-12)
        assert appell_f2(4.2, 2.8, 4.4, 1.2, 3.0, 0.25, 0.30).value == pytest.approx(g["v3_f2"], rel=1e-11)

    def test_domain(self):
        with pytest.raises(DomainError):
            appell_f2(1, 1, 1, 1, 1, 0.6, 0.5)


class TestHumbertPhi2:
    def test_origin(self):
        assert humbert_phi2(1.5, 4.0, 2.5, 0.0, 0.0).value == 1.0

    def test_reduction(self):
        assert humbert_phi2(1.5, 4.0, 2.5, 0.0, -0.9).value == pytest.approx(
            float(mp.hyp1f1(4.0, 2.5, -0.9)), rel=1e-13)

    def test_equal_arguments(self):
        assert humbert_phi2(1.5, 4.0, 2.5, -0.7, -0.7).value == pytest.approx(
            float(mp.hyp1f1(5.5, 2.5, -0.7)), rel=1e-12)

    def test_oracle(self, goldens):
        assert humbert_phi2(-2.5, 4.0, 2.5, -1.2, -0.4).value == pytest.approx(
            goldens["special"]["v4_phi2"], rel=1e-10)


class TestKratzel:
    def test_gamma_limit(self):
        assert kratzel_like(2.5, 1.3, 0.0).value == pytest.approx(math.gamma(2.5), rel=1e-15)

    def test_bessel_oracle(self, goldens):
        g = goldens["special"]
        assert g["v5_kratzel"] == pytest.approx(g["v5_quad"], rel=1e-10)
        assert kratzel_like(1.5, 1.0, 2.0).value == pytest.approx(g["v5_kratzel"], rel=1e-10)
        assert 2 * 2.0 ** 0.75 * kv(1.5, 2 * math.sqrt(2.0)) == pytest.approx(g["v5_kratzel"], rel=1e-12)

    def test_quadrature_oracle(self, goldens):
        assert kratzel_like(0.8, 1.6667, 0.9).value == pytest.approx(goldens["special"]["v6_kratzel"], rel=1e-10)

    def test_divergent(self):
        with pytest.raises(DomainError):
            kratzel_like(-0.5, 1.0, 0.0)


class TestMellinBarnes:
    def test_h11_equal_alpha_closed_form(self):
        a1, b1, alpha, x = -1.5, 1.2, 2.0, 0.5
        A = B = 2.0 / alpha
        r = mellin_barnes_h("H11_11", x, dict(a1=a1, b1=b1, A1=A, B1=B))
        # H^{1,1}_{1,1}[x | (a1, A); (b1, A)] = Gamma(1-a1+b1) x^b1 / (A (1+x^(1/A))^(1-a1+b1))
        closed = math.gamma(1 - a1 + b1) * x ** b1 / (1 + x) ** (1 - a1 + b1)
        assert r.value == pytest.approx(closed, rel=1e-9)

    def test_h20_bessel_oracle(self, goldens):
        r = mellin_barnes_h("H20_02", 1.0, dict(b1=1.2, b2=3.0, B1=1.0, B2=1.0))
        assert r.value == pytest.approx(goldens["special"]["v7_h20"], rel=1e-9)

    def test_h21_cdf_layout_vanishes_at_zero(self):
        p = dict(b3=1.2, b4=3.0, B1=1.0, B2=1.0)
        vals = [mellin_barnes_h("H21_13", x, p).value for x in (1e-3, 1e-6, 1e-9)]
        assert abs(vals[-1]) < 1e-9 and abs(vals[0]) > abs(vals[1]) > abs(vals[2])

    def test_unknown_case(self):
        with pytest.raises(ParameterError):
            mellin_barnes_h("H99", 1.0, {})

    def test_no_left_poles(self):
        with pytest.raises(DegenerateCaseError):
            fox_h(1.0, [(0.5, 1.0)], [(1.0, 1.0)], 0, 1)


def test_accuracy_error_carries_partial():
    with pytest.raises(AccuracyError) as exc:
        gauss_2f1_unit(50.0, 50.0, 0.5, 0.999, max_terms=20)
    assert exc.value.partial is None or np.isfinite(exc.value.partial)
