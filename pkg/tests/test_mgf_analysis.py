"""Moment intervals, mgf minimization and tilt-parameter classification.

The minimizer oracles are closed forms (Brownian, atomic, a one-sided
``x^{-3/2}`` subordinator whose root is exactly ``-pi/4``) or a
pure-python bisection of an independently derived derivative formula.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from levy_emm import (
    CGMY,
    EsscherCase,
    FiniteAtomic,
    GenericDensity,
    LevyTriplet,
    MinimumCase,
    TailDecay,
    classify_esscher_parameter,
    cumulant,
    cumulant_derivative,
    exp_moment_interval,
    minimize_mgf,
)
from levy_emm.errors import ArbitrageMarketError


def _one_sided(power_right, power_left, scale_right=0.5, scale_left=1.0):
    """Two-sided polynomial density with independent tail powers."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        ax = np.where(x != 0.0, np.abs(x), 1.0)
        return np.where(x > 0, scale_right * ax ** power_right,
                        scale_left * ax ** power_left)

    return GenericDensity(dens, right=TailDecay.polynomial(power_right),
                          left=TailDecay.polynomial(power_left),
                          symmetric=False)


@pytest.fixture
def pi4_subordinator():
    """Density ``x^{-3/2}/2`` on (0, inf), no drift: the tilted-drift root
    is exactly ``-pi/4`` and the cumulant there is ``-pi/4`` as well."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        ax = np.where(x != 0.0, np.abs(x), 1.0)
        return np.where(x > 0, 0.5 * ax ** -1.5, 0.0)

    nu = GenericDensity(dens, right=TailDecay.polynomial(-1.5),
                        left=TailDecay.bounded(1.0), symmetric=False,
                        positive_jumps=True, negative_jumps=False)
    return LevyTriplet(0.0, 0.0, nu)


def _asymmetric_exponential(flip=False):
    """Exponential rate 5 on both sides, but tail power -2.5 on one side
    and -1 on the other: the derivative set E is closed on one end only."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        ax = np.where(x != 0.0, np.abs(x), 1.0)
        heavy = np.exp(-5.0 * ax) * ax ** -2.5
        light = np.exp(-5.0 * ax) * ax ** -1.0
        if flip:
            heavy, light = light, heavy
        return np.where(x > 0, heavy, light)

    right_power, left_power = (-1.0, -2.5) if flip else (-2.5, -1.0)
    return GenericDensity(dens, right=TailDecay.exponential(5.0, power=right_power),
                          left=TailDecay.exponential(5.0, power=left_power),
                          symmetric=False)


class TestExpMomentInterval:
    def test_light_tails_are_unbounded(self, brownian, two_atom):
        for t in (brownian, two_atom):
            iv = exp_moment_interval(t)
            assert iv.a.is_neg_inf and iv.b.is_pos_inf
            assert not (iv.a_in_I or iv.b_in_I or iv.a_in_E or iv.b_in_E)
            assert iv.contains(1e9) and iv.contains(-1e9)
            assert not iv.is_degenerate

    def test_exponential_tails_are_open(self, kou, vg):
        for t, (lo, hi) in ((kou, (-6.0, 8.0)), (vg, (-6.0, 9.0))):
            iv = exp_moment_interval(t)
            assert iv.a.value == lo and iv.b.value == hi
            assert not (iv.a_in_I or iv.b_in_I or iv.a_in_E or iv.b_in_E)
            assert iv.contains(hi - 1e-9) and not iv.contains(hi)
            assert iv.contains(lo + 1e-9) and not iv.contains(lo)
            assert not iv.contains_interior(lo)

    def test_cgmy_endpoint_membership(self, cgmy_y05, cgmy_y15):
        iv = exp_moment_interval(cgmy_y05)
        assert (iv.a.value, iv.b.value) == (-4.0, 7.0)
        assert iv.a_in_I and iv.b_in_I
        assert not (iv.a_in_E or iv.b_in_E)
        assert iv.contains(7.0) and iv.contains(-4.0)

        iv = exp_moment_interval(cgmy_y15)
        assert (iv.a.value, iv.b.value) == (-5.0, 5.0)
        assert iv.a_in_I and iv.b_in_I and iv.a_in_E and iv.b_in_E

    def test_degenerate_stables(self, stable08, stable15):
        iv8 = exp_moment_interval(stable08)
        iv15 = exp_moment_interval(stable15)
        for iv in (iv8, iv15):
            assert iv.is_degenerate
            assert iv.a.value == 0.0 and iv.b.value == 0.0
            assert iv.a_in_I and iv.b_in_I
            d = iv.describe()
            # the left endpoint must serialize as a plain zero, not -0.0
            assert d["a"] == 0.0 and math.copysign(1.0, d["a"]) == 1.0
        assert not (iv8.a_in_E or iv8.b_in_E)
        assert iv15.a_in_E and iv15.b_in_E

    def test_half_line_interval(self, pi4_subordinator):
        iv = exp_moment_interval(pi4_subordinator)
        assert iv.a.is_neg_inf
        assert iv.b.value == 0.0
        assert iv.b_in_I and not iv.b_in_E
        assert iv.contains(0.0) and iv.contains(-50.0) and not iv.contains(0.1)
        assert not iv.is_degenerate

    def test_one_sided_membership(self):
        iv = exp_moment_interval(LevyTriplet(0.0, 0.0, _asymmetric_exponential()))
        assert (iv.a.value, iv.b.value) == (-5.0, 5.0)
        assert (iv.a_in_I, iv.b_in_I, iv.a_in_E, iv.b_in_E) \
            == (False, True, False, True)


def _kou_derivative(k):
    """Independent derivative formula for the shared Kou model."""
    tm, _ = integrate.quad(
        lambda x: x * (0.4 * 8 * math.exp(-8 * x) if x > 0
                       else 0.6 * 6 * math.exp(6 * x)), -1.0, 1.0,
        points=[0.0], limit=200)
    return 0.03 + 0.02 * k + 1.5 * (0.4 * 8.0 / (8.0 - k) ** 2
                                    - 0.6 * 6.0 / (6.0 + k) ** 2 - tm)


def _bisect(f, lo, hi, tol=1e-13):
    f_lo = f(lo)
    assert f_lo < 0 < f(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestMinimizeMgf:
    def test_brownian_root(self, brownian):
        got = minimize_mgf(brownian, 1.0)
        assert got.case is MinimumCase.INTERIOR_ROOT
        assert abs(got.kappa0 - (-5.0 / 9.0)) <= 1e-11
        c_min = 0.05 * got.kappa0 + 0.045 * got.kappa0 ** 2
        assert math.isclose(got.phi_at_min, math.exp(c_min), rel_tol=1e-12)
        longer = minimize_mgf(brownian, 3.0)
        assert abs(longer.kappa0 - got.kappa0) <= 1e-11
        assert math.isclose(longer.phi_at_min, math.exp(3 * c_min), rel_tol=1e-12)

    def test_two_atom_root(self, two_atom):
        got = minimize_mgf(two_atom, 1.0)
        want = 2.0 * math.asinh(-0.1)
        assert abs(got.kappa0 - want) <= 1e-10
        c_min = 0.1 * want + 2.0 * (math.cosh(0.5 * want) - 1.0)
        assert math.isclose(got.phi_at_min, math.exp(c_min), rel_tol=1e-10)

    def test_kou_root_against_bisection(self, kou):
        want = _bisect(_kou_derivative, -5.9, 7.9)
        got = minimize_mgf(kou, 1.0)
        assert got.case is MinimumCase.INTERIOR_ROOT
        assert abs(got.kappa0 - want) <= 1e-9

    def test_symmetric_root_is_exactly_zero(self, cgmy_y15):
        got = minimize_mgf(cgmy_y15, 1.0)
        assert got.case is MinimumCase.INTERIOR_ROOT
        assert got.kappa0 == 0.0
        assert got.phi_at_min == 1.0

    def test_right_endpoint_minimum(self, cgmy_y15):
        shift = cumulant_derivative(cgmy_y15, 5.0).value
        t = LevyTriplet(-shift - 1.0, 0.0, cgmy_y15.nu)
        got = minimize_mgf(t, 1.0)
        assert got.case is MinimumCase.RIGHT_ENDPOINT
        assert got.kappa0 == 5.0
        c_end = cumulant(t, 5.0).value
        assert math.isclose(got.phi_at_min, math.exp(min(c_end, 0.0)), rel_tol=1e-10)

    def test_left_endpoint_minimum(self, cgmy_y15):
        shift = cumulant_derivative(cgmy_y15, -5.0).value
        t = LevyTriplet(-shift + 1.0, 0.0, cgmy_y15.nu)
        got = minimize_mgf(t, 1.0)
        assert got.case is MinimumCase.LEFT_ENDPOINT
        assert got.kappa0 == -5.0

    def test_degenerate_interval(self, stable08, stable15):
        for t in (stable08, stable15):
            got = minimize_mgf(t, 1.0)
            assert got.case is MinimumCase.DEGENERATE_ZERO
            assert got.kappa0 == 0.0 and got.phi_at_min == 1.0

    def test_subordinator_root_is_quarter_pi(self, pi4_subordinator):
        got = minimize_mgf(pi4_subordinator, 1.0)
        assert got.case is MinimumCase.INTERIOR_ROOT
        assert abs(got.kappa0 - (-math.pi / 4.0)) <= 1e-10
        assert math.isclose(got.phi_at_min, math.exp(-math.pi / 4.0), rel_tol=1e-10)
        two = minimize_mgf(pi4_subordinator, 2.0)
        assert math.isclose(two.phi_at_min, math.exp(-math.pi / 2.0), rel_tol=1e-10)

    def test_monotone_market_refused(self):
        up = LevyTriplet(1.0, 0.0, FiniteAtomic(((2.0, 3.0),)))
        down = LevyTriplet(-0.7, 0.0, FiniteAtomic(((-0.5, 1.0),)))
        for t in (up, down):
            with pytest.raises(ArbitrageMarketError):
                minimize_mgf(t, 1.0)

    def test_horizon_validated(self, brownian):
        with pytest.raises(ValueError):
            minimize_mgf(brownian, 0.0)


class TestClassifyEsscherParameter:
    def test_interior_zoo(self, brownian, two_atom, kou):
        for t in (brownian, two_atom, kou):
            st = classify_esscher_parameter(t, 1.0)
            assert st.exists
            assert st.case is EsscherCase.INTERVAL_INTERIOR
            assert math.isclose(st.kappa0, minimize_mgf(t, 1.0).kappa0,
                                rel_tol=1e-12, abs_tol=1e-12)

    def test_symmetric_interior_zero_with_closed_shape(self, cgmy_y15):
        st = classify_esscher_parameter(cgmy_y15, 1.0)
        assert st.exists and st.kappa0 == 0.0
        # the case labels the shape of E, not where the zero landed
        assert st.case is EsscherCase.BOTH_ENDPOINTS

    def test_endpoint_minimum_without_zero(self, cgmy_y15):
        shift = cumulant_derivative(cgmy_y15, 5.0).value
        st = classify_esscher_parameter(
            LevyTriplet(-shift - 1.0, 0.0, cgmy_y15.nu), 1.0)
        assert not st.exists and st.kappa0 is None
        assert "negative" in st.diagnostic
        st = classify_esscher_parameter(
            LevyTriplet(shift + 1.0, 0.0, cgmy_y15.nu), 1.0)
        assert not st.exists
        assert "positive" in st.diagnostic

    def test_exact_zero_at_endpoint(self, cgmy_y15):
        shift = cumulant_derivative(cgmy_y15, 5.0).value
        st = classify_esscher_parameter(
            LevyTriplet(-shift, 0.0, cgmy_y15.nu), 1.0)
        assert st.exists and st.kappa0 == 5.0
        assert st.case is EsscherCase.BOTH_ENDPOINTS
        assert "vanishes" in st.diagnostic

    def test_one_end_closed_shapes(self):
        right = _asymmetric_exponential()
        shift = cumulant_derivative(LevyTriplet(0.0, 0.0, right), 5.0).value
        st = classify_esscher_parameter(LevyTriplet(-shift, 0.0, right), 1.0)
        assert st.exists and st.kappa0 == 5.0
        assert st.case is EsscherCase.RIGHT_ENDPOINT_CLOSED

        left = _asymmetric_exponential(flip=True)
        shift = cumulant_derivative(LevyTriplet(0.0, 0.0, left), -5.0).value
        st = classify_esscher_parameter(LevyTriplet(-shift, 0.0, left), 1.0)
        assert st.exists and st.kappa0 == -5.0
        assert st.case is EsscherCase.LEFT_ENDPOINT_CLOSED

    def test_degenerate_driftless(self, stable15):
        st = classify_esscher_parameter(stable15, 1.0)
        assert st.exists and st.kappa0 == 0.0
        assert st.case is EsscherCase.DEGENERATE_ZERO_MEAN

    def test_degenerate_with_drift(self, stable15):
        st = classify_esscher_parameter(
            LevyTriplet(0.3, 0.0, stable15.nu), 1.0)
        assert not st.exists
        assert "nonzero mean" in st.diagnostic

    def test_degenerate_mean_undefined(self, stable08):
        st = classify_esscher_parameter(stable08, 1.0)
        assert not st.exists
        assert "undefined" in st.diagnostic

    def test_degenerate_mean_infinite(self):
        heavy_right = LevyTriplet(0.0, 0.0, _one_sided(-1.5, -2.5))
        st = classify_esscher_parameter(heavy_right, 1.0)
        assert not st.exists and "+inf" in st.diagnostic
        heavy_left = LevyTriplet(0.0, 0.0, _one_sided(-2.5, -1.5))
        st = classify_esscher_parameter(heavy_left, 1.0)
        assert not st.exists and "-inf" in st.diagnostic

    def test_monotone_market_reported(self):
        st = classify_esscher_parameter(
            LevyTriplet(1.0, 0.0, FiniteAtomic(((2.0, 3.0),))), 1.0)
        assert not st.exists
        assert "monotone" in st.diagnostic
