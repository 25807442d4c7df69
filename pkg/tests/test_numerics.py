import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbmkit.numerics import (
    DampingViolation,
    NonConvergence,
    QuadratureSpec,
    QuadResult,
    gauss_laplace_moments,
    gauss_pdf,
    gauss_sf,
    integrate_1d,
    integrate_2d_simplex,
    integrate_semi_infinite,
    laplace_gaussian_integral,
)

mpmath.mp.dps = 40


def mp_laplace(c, beta, t):
    f = lambda l: (l + c) * mpmath.exp(-beta * l - (l + c) ** 2 / (2 * t))
    return float(mpmath.quad(f, [0, mpmath.sqrt(t), mpmath.inf]))


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(abs_tol=0), dict(rel_tol=1.0), dict(max_subdivisions=0),
                                    dict(max_subdivisions=2.5)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            QuadratureSpec(**kw)

    def test_defaults_and_tightening(self):
        s = QuadratureSpec()
        assert (s.abs_tol, s.rel_tol, s.max_subdivisions) == (1e-10, 1e-8, 2000)
        t = s.tightened(10)
        assert t.abs_tol == pytest.approx(1e-11) and t.rel_tol == pytest.approx(1e-9)

    def test_require(self):
        assert QuadResult(1.0, 0.0, True).require() == 1.0
        with pytest.raises(NonConvergence) as info:
            QuadResult(2.0, 1.0, False).require("thing")
        assert info.value.estimate == 2.0


def test_gauss_pdf_and_sf():
    assert gauss_pdf(0.0) == pytest.approx(0.3989422804, rel=1e-10)
    assert gauss_pdf(1.0) == pytest.approx(0.2419707245, rel=1e-10)
    assert gauss_pdf(-2.0) == gauss_pdf(2.0)
    assert gauss_sf(0.0) == 0.5
    assert gauss_sf(40.0) < 1e-300
    assert gauss_sf(1.959964) == pytest.approx(0.025, rel=1e-6)
    np.testing.assert_allclose(gauss_pdf(np.array([0.0, 1.0])), [0.3989422804014327, 0.24197072451914337])


@given(st.floats(0, 30))
def test_gauss_sf_relative_accuracy(z):
    ref = float(mpmath.ncdf(-z))
    assert gauss_sf(z) == pytest.approx(ref, rel=1e-13)


class TestLaplaceGaussian:
    def test_examples(self):
        assert laplace_gaussian_integral(1, 0, 1) == pytest.approx(math.exp(-0.5), rel=1e-14)
        assert laplace_gaussian_integral(0, 0, 2) == pytest.approx(2.0, rel=1e-14)
        ref = integrate_semi_infinite(lambda l: (l + 1) * math.exp(-0.5 * l - (l + 1) ** 2 / 2), 0.0,
                                      QuadratureSpec(1e-13, 1e-12))
        assert laplace_gaussian_integral(1, 0.5, 1) == pytest.approx(ref.value, abs=1e-10)

    def test_rejects(self):
        with pytest.raises(ValueError):
            laplace_gaussian_integral(1, 0, 0)
        with pytest.raises(ValueError):
            laplace_gaussian_integral(-0.1, 0, 1)

    @given(st.floats(0, 5), st.floats(-8, 40), st.floats(0.05, 6))
    def test_against_high_precision(self, c, beta, t):
        assert laplace_gaussian_integral(c, beta, t) == pytest.approx(mp_laplace(c, beta, t), rel=1e-11)

    @given(st.floats(0, 3), st.floats(-3, 3), st.floats(0.01, 2), st.floats(0.1, 4))
    def test_decreasing_in_beta_and_positive(self, c, beta, h, t):
        lo, hi = laplace_gaussian_integral(c, beta + h, t), laplace_gaussian_integral(c, beta, t)
        assert 0.0 < lo < hi

    def test_extreme_arguments_stay_finite(self):
        assert 0 < laplace_gaussian_integral(0.0, 1e4, 1.0) < 1e-7
        assert math.isfinite(laplace_gaussian_integral(3.0, -10.0, 4.0))
        # exp(beta^2 t / 2) = e^800 does not fit in a double
        assert laplace_gaussian_integral(3.0, -20.0, 4.0) == math.inf
        # (c + beta t)/sqrt(t) far below -25
        assert laplace_gaussian_integral(0.0, -30.0, 1.0) == pytest.approx(mp_laplace(0.0, -30.0, 1.0), rel=1e-11)


@given(st.floats(0.01, 50), st.floats(-15, 60))
def test_gauss_laplace_moments(A, B):
    log_scale, *js = gauss_laplace_moments(A, B)
    a, b = mpmath.mpf(A), mpmath.mpf(B)
    j0 = mpmath.sqrt(mpmath.pi / (2 * a)) * mpmath.exp(b * b / (2 * a)) * mpmath.erfc(b / mpmath.sqrt(2 * a))
    j1 = (1 - b * j0) / a
    j2 = (j0 - b * j1) / a
    for j, ref in zip(js, (j0, j1, j2)):
        got = mpmath.exp(log_scale) * j
        assert float(abs(got / ref - 1)) < 1e-11


def test_gauss_laplace_moments_against_quadrature():
    for A, B in ((1.0, 0.0), (2.0, -1.5), (0.3, 4.0), (5.0, 40.0)):
        log_scale, *js = gauss_laplace_moments(A, B)
        for k, j in enumerate(js):
            ref = mpmath.quad(lambda l: l ** k * mpmath.exp(-A * l * l / 2 - B * l), [0, 1, mpmath.inf])
            assert math.exp(log_scale) * j == pytest.approx(float(ref), rel=1e-11)


class TestIntegrate1d:
    def test_examples(self):
        assert integrate_1d(lambda x: x, 0, 1).value == pytest.approx(0.5, abs=1e-14)
        assert integrate_1d(lambda s: s ** -0.5 if s > 0 else 0.0, 0, 1).value == pytest.approx(2.0, rel=1e-9)
        r = integrate_1d(gauss_pdf, -8, 8)
        assert r.converged and r.value == pytest.approx(1.0, abs=1e-10)

    def test_reports_error_within_request(self):
        spec = QuadratureSpec(1e-12, 1e-10)
        r = integrate_1d(math.cos, 0, 3, spec)
        assert r.error <= max(spec.abs_tol, spec.rel_tol * abs(r.value))
        assert abs(r.value - math.sin(3)) <= 10 * r.error + 1e-15

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            integrate_1d(math.cos, 1, 1)

    def test_flags_nonconvergence(self):
        r = integrate_1d(lambda x: math.sin(1.0 / x) / x if x > 0 else 0.0, 0, 1,
                         QuadratureSpec(1e-14, 1e-14, max_subdivisions=5))
        assert not r.converged
        with pytest.raises(NonConvergence):
            r.require()

    @given(st.floats(0.2, 5), st.floats(0.5, 3))
    def test_halving_tolerance_moves_less_than_error(self, a, b):
        f = lambda x: math.exp(-a * x) * math.sqrt(x)
        coarse = integrate_1d(f, 0, b, QuadratureSpec(1e-6, 1e-6))
        fine = integrate_1d(f, 0, b, QuadratureSpec(5e-7, 1e-6))
        assert abs(fine.value - coarse.value) <= coarse.error + 1e-15


def test_semi_infinite_examples():
    assert integrate_semi_infinite(lambda l: math.exp(-l), 0.0).value == pytest.approx(1.0, abs=1e-10)
    assert integrate_semi_infinite(lambda l: l * math.exp(-l * l / 2), 0.0).value == pytest.approx(1.0, abs=1e-10)
    assert integrate_semi_infinite(lambda l: math.exp(-l), 2.0, scale=3.0).value == pytest.approx(math.exp(-2), abs=1e-10)
    with pytest.raises(ValueError):
        integrate_semi_infinite(math.exp, 0.0, scale=0.0)


def test_simplex_examples():
    assert integrate_2d_simplex(lambda v, u: 1.0, 1.0).value == pytest.approx(0.5, abs=1e-12)
    r = integrate_2d_simplex(lambda v, u: (v * (u - v)) ** -0.5, 1.0)
    assert r.value == pytest.approx(math.pi, rel=1e-7)
    # int over 0<v<u<t of v u = t^4/8
    assert integrate_2d_simplex(lambda v, u: v * u, 2.0).value == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        integrate_2d_simplex(lambda v, u: 1.0, 0.0)


def test_damping_violation_is_value_error():
    assert issubclass(DampingViolation, ValueError)
