import math

import mpmath
import numpy as np
import pytest
from scipy.special import ive

from besselhardy import bessel_i_scaled, bessel_i_scaled_ratio
from besselhardy.bessel import SERIES_ASYM_SEAM, asymptotic_branch, series_branch


def half_integer_oracle(order: float, zs: np.ndarray) -> np.ndarray:
    """Elementary closed forms evaluated in 30-digit arithmetic."""
    mpmath.mp.dps = 30
    out = np.empty_like(zs)
    for i, z in enumerate(zs):
        zm = mpmath.mpf(float(z))
        pref = mpmath.sqrt(2.0 / (mpmath.pi * zm))
        if order == 0.5:
            val = pref * mpmath.sinh(zm)
        elif order == 1.5:
            val = pref * (mpmath.cosh(zm) - mpmath.sinh(zm) / zm)
        else:
            raise ValueError(order)
        out[i] = float(val * mpmath.exp(-zm))
    return out


class TestHalfIntegerOracle:
    @pytest.mark.parametrize("order", [0.5, 1.5])
    def test_matches_closed_form_over_full_range(self, order):
        zs = np.geomspace(1e-6, 700.0, 400)
        got = bessel_i_scaled(order, zs)
        want = half_integer_oracle(order, zs)
        rel = np.abs(got - want) / want
        assert rel.max() < 1e-12

    def test_point_example_z1(self):
        want = math.sqrt(2.0 / math.pi) * math.sinh(1.0) * math.exp(-1.0)
        assert bessel_i_scaled(0.5, 1.0) == pytest.approx(want, rel=1e-13)
        assert bessel_i_scaled(0.5, 1.0) == pytest.approx(0.34498, abs=5e-5)

    def test_point_example_z100(self):
        want = (2.0 * math.pi * 100.0) ** -0.5 * -math.expm1(-200.0)
        assert bessel_i_scaled(0.5, 100.0) == pytest.approx(want, rel=1e-13)
        assert bessel_i_scaled(0.5, 100.0) == pytest.approx(0.039894, abs=1e-6)


class TestSeam:
    @pytest.mark.parametrize("order", [-0.45, -0.25, 0.0, 0.35, 0.5, 1.5, 2.0, 4.5])
    def test_branches_agree_at_crossover(self, order):
        for z in (SERIES_ASYM_SEAM, SERIES_ASYM_SEAM - 1e-9, SERIES_ASYM_SEAM + 1e-9):
            s = series_branch(order, z)
            a = asymptotic_branch(order, z)
            assert abs(s - a) / a < 1e-12

    @pytest.mark.parametrize("order", [-0.25, 0.5, 2.0])
    def test_no_jump_across_seam(self, order):
        below = bessel_i_scaled(order, np.nextafter(SERIES_ASYM_SEAM, 0.0))
        above = bessel_i_scaled(order, SERIES_ASYM_SEAM)
        assert abs(below - above) / above < 1e-12


class TestEdgeCases:
    def test_zero_argument_positive_order(self):
        assert bessel_i_scaled(0.75, 0.0) == 0.0

    def test_zero_argument_zero_order(self):
        assert bessel_i_scaled(0.0, 0.0) == 1.0

    def test_ratio_form_regular_at_zero(self):
        nu = -0.25
        want = 2.0**-nu / math.gamma(nu + 1.0)
        assert bessel_i_scaled_ratio(nu, 0.0) == pytest.approx(want, rel=1e-14)
        assert bessel_i_scaled_ratio(nu, 1e-12) == pytest.approx(want, rel=1e-10)

    def test_order_at_most_minus_one_rejected(self):
        with pytest.raises(ValueError):
            bessel_i_scaled(-1.0, 1.0)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            bessel_i_scaled(0.5, -1.0)

    def test_array_shape_preserved(self):
        z = np.linspace(0.1, 50.0, 12).reshape(3, 4)
        out = bessel_i_scaled(0.5, z)
        assert out.shape == (3, 4)


class TestAgainstScipy:
    @pytest.mark.parametrize("order", [-0.35, -0.25, 0.4, 0.75, 2.0, 4.5])
    def test_scaled_value(self, order):
        zs = np.geomspace(1e-5, 1e5, 300)
        got = bessel_i_scaled(order, zs)
        want = ive(order, zs)
        assert np.max(np.abs(got - want) / want) < 1e-11

    @pytest.mark.parametrize("order", [-0.35, 0.75, 4.5])
    def test_ratio_form(self, order):
        zs = np.geomspace(1e-5, 1e5, 200)
        got = bessel_i_scaled_ratio(order, zs)
        want = ive(order, zs) * zs ** (-order)
        assert np.max(np.abs(got - want) / want) < 1e-11

    def test_monotone_decay_of_order_zero(self):
        # e^{-z} I_0(z) decreases from 1; positive orders first rise from 0
        zs = np.linspace(0.0, 200.0, 4000)
        vals = bessel_i_scaled(0.0, zs)
        assert vals[0] == 1.0
        assert np.all(np.diff(vals) < 1e-15)
