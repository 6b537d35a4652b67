"""Piecewise polynomials on dyadic breakpoints and their exact inner products."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from splinedict.mra import bspline, bspline_two_scale
from splinedict.poly import (
    Dyadic,
    PiecewisePoly,
    dyadic_range,
    evaluate,
    gauss_nodes,
    gram_matrix,
    inner_product,
    linear_combination,
    quadrature_matrix,
    restrict,
    taylor_shift,
)


class TestDyadic:
    def test_normal_form(self):
        assert Dyadic(6, 2) == Dyadic(3, 1)
        assert str(Dyadic(6, 2)) == "3/2^1"
        assert Dyadic.of(4).exp == 0

    def test_parse_roundtrip(self):
        for text in ["3/2^1", "-5/2^3", "7"]:
            d = Dyadic.parse(text)
            assert Dyadic.parse(str(d)) == d

    def test_of_rejects_non_dyadic(self):
        with pytest.raises(ValueError):
            Dyadic.of(Fraction(1, 3))

    @given(st.integers(-200, 200), st.integers(0, 6), st.integers(-200, 200), st.integers(0, 6))
    def test_arithmetic_matches_fractions(self, a, e, b, f):
        x, y = Dyadic(a, e), Dyadic(b, f)
        assert (x + y).to_fraction() == x.to_fraction() + y.to_fraction()
        assert (x - y).to_fraction() == x.to_fraction() - y.to_fraction()
        assert (x * y).to_fraction() == x.to_fraction() * y.to_fraction()
        assert (x < y) == (x.to_fraction() < y.to_fraction())
        assert x.floor() <= x.to_fraction() <= x.ceil()

    def test_range_is_open(self):
        pts = dyadic_range(0, 2, 1)
        assert [str(p) for p in pts] == ["1/2^1", "1", "3/2^1"]


class TestEvaluate:
    def test_hat_peak(self):
        assert evaluate(bspline(2), 1.0) == pytest.approx(1.0)

    def test_cubic_center(self):
        assert evaluate(bspline(4), 2.0) == pytest.approx(2 / 3, abs=1e-15)

    def test_outside_support_is_zero(self):
        phi = bspline(4)
        assert np.all(phi(np.array([-3.0, -1e-9, 4.0, 7.5])) == 0.0)

    def test_left_limit_at_right_end(self):
        box = bspline(1)
        assert box(1.0) == 0.0
        assert box(1.0, side="left") == 1.0

    def test_rejects_descending_breakpoints(self):
        with pytest.raises(ValueError):
            PiecewisePoly([1, 0], [[1.0]])

    def test_taylor_shift(self):
        # p(t) = 1 + 2t + 3t^2 recentred at 1
        shifted = taylor_shift(np.array([1.0, 2.0, 3.0]), 1.0)
        np.testing.assert_allclose(shifted[0], [6.0, 8.0, 3.0])


class TestInnerProduct:
    def test_hat_norm(self):
        assert inner_product(bspline(2), bspline(2)) == pytest.approx(2 / 3, abs=1e-15)

    def test_disjoint(self):
        phi = bspline(3)
        assert inner_product(phi, phi.dilate(0, 5)) == 0.0

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_translation_symmetry(self, m):
        phi = bspline(m)
        for k in range(1, m):
            assert inner_product(phi, phi.dilate(0, k)) == pytest.approx(inner_product(phi, phi.dilate(0, -k)), abs=1e-15)

    def test_bspline_autocorrelation_is_bspline(self):
        # <N_m, N_m(. - k)> = N_{2m}(m + k)
        m = 4
        phi, big = bspline(m), bspline(2 * m)
        for k in range(-3, 4):
            assert inner_product(phi, phi.dilate(0, k)) == pytest.approx(big(m + k), abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_gauss_exact_for_degree(self, n):
        x, w = gauss_nodes(n)
        for deg in range(2 * n):
            assert w @ x**deg == pytest.approx(1 / (deg + 1), rel=1e-13)

    def test_quadrature_matrix_factors_gram(self):
        polys = [bspline(4).dilate(1, k) for k in range(-2, 6)]
        b = quadrature_matrix(polys)
        g = gram_matrix(polys)
        np.testing.assert_allclose(b.T @ b, g, atol=1e-15)
        for i, p in enumerate(polys):
            assert g[i, i] == pytest.approx(inner_product(p, p), rel=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.integers(-2, 2))
    def test_integral_of_product(self, coeffs, shift):
        p = PiecewisePoly([0, 1], [coeffs])
        q = bspline(3).dilate(1, shift)
        ref, _ = quad(lambda x: p(x) * q(x), 0, 1, points=[0.5], epsabs=1e-13)
        assert inner_product(p, q) == pytest.approx(ref, abs=1e-11)


class TestPartitionOfUnity:
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
    def test_integer_translates_sum_to_one(self, m):
        phi = bspline(m)
        x = np.linspace(0, 3, 301)
        total = sum(phi(x + k) for k in range(-4, m + 1))
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_unit_integral(self, m):
        assert bspline(m).integral() == pytest.approx(1.0, abs=1e-14)


class TestLinearCombination:
    def test_identity(self):
        p = bspline(3)
        q = linear_combination([1.0], [p])
        x = np.linspace(-1, 4, 101)
        np.testing.assert_array_equal(q(x), p(x))

    def test_cancel(self):
        p = bspline(3)
        assert linear_combination([1.0, -1.0], [p, p]).is_zero()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            linear_combination([1.0, 2.0], [bspline(2)])

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
    def test_two_scale_identity(self, m):
        phi = bspline(m)
        rhs = linear_combination(list(bspline_two_scale(m)), [phi.dilate(1, n) for n in range(m + 1)])
        x = np.linspace(-0.5, m + 0.5, 1000)
        np.testing.assert_allclose(rhs(x), phi(x), atol=1e-12)


class TestRestrict:
    def test_own_support(self):
        p = bspline(4).dilate(0, 2)
        q = restrict(p, p.support)
        assert q.support == p.support
        x = np.linspace(0, 8, 513)
        np.testing.assert_array_equal(q(x), p(x))

    def test_boundary_bspline(self):
        p = bspline(4).dilate(0, -3)
        q = restrict(p, (0, 8))
        assert q.support == (Dyadic.of(0), Dyadic.of(1))

    def test_disjoint(self):
        assert restrict(bspline(2), (5, 6)).is_zero()

    def test_degenerate_interval(self):
        with pytest.raises(ValueError):
            restrict(bspline(2), (1, 1))


class TestDilate:
    def test_dilate_shift(self):
        phi = bspline(4)
        p = phi.dilate(3, Dyadic(5, 2))
        x = np.linspace(-1, 2, 77)
        np.testing.assert_allclose(p(x), phi(8 * x - 1.25), atol=1e-13)

    def test_derivative_matches_difference(self):
        # N_m' = N_{m-1} - N_{m-1}(. - 1)
        d = bspline(4).derivative()
        x = np.linspace(0, 4, 97)
        np.testing.assert_allclose(d(x), bspline(3)(x) - bspline(3)(x - 1), atol=1e-13)
