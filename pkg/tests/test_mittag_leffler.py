"""Mittag-Leffler evaluation against high-precision oracles."""

import math

import mpmath
import numpy as np
import pytest
from scipy.special import gamma as sgamma

from fracdyn.errors import FracDomainError
from fracdyn.mittag_leffler import (
    SERIES_SWITCH,
    MLParams,
    ml,
    ml_decomp_f,
    ml_decomp_g,
)


def ml_oracle(alpha, beta, z, dps=220):
    """Direct series summation in arbitrary precision (independent path).

    Working precision grows with |z|^(1/alpha): near-cancelling terms reach
    roughly exp(|z|^(1/alpha)) before the tail takes over.
    """
    x_peak = abs(z) ** (1.0 / alpha)
    dps = max(dps, 60 + int(0.5 * x_peak))
    with mpmath.workdps(dps):
        am, bm, zm = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        total = mpmath.mpf(0)
        zk = mpmath.mpf(1)
        k = 0
        while True:
            term = zk / mpmath.gamma(am * k + bm)
            total += term
            k += 1
            zk *= zm
            if alpha * k > x_peak and abs(term) < mpmath.mpf(10) ** (-30) * max(
                1, abs(total)
            ):
                return float(total)


class TestIdentities:
    def test_exponential(self):
        for z in np.linspace(-5, 5, 21):
            assert abs(ml(MLParams(1.0, 1.0), z) - math.exp(z)) < 1e-10

    def test_cosine(self):
        for t in np.linspace(0, 10, 21):
            assert abs(ml(MLParams(2.0, 1.0), -t * t) - math.cos(t)) < 1e-10

    def test_expm1_over_z(self):
        for z in np.linspace(-5, 5, 21):
            if z == 0.0:
                continue
            assert abs(ml(MLParams(1.0, 2.0), z) - math.expm1(z) / z) < 1e-10

    def test_value_at_zero(self):
        assert ml(MLParams(0.7, 1.3), 0.0) == pytest.approx(1.0 / sgamma(1.3))


class TestOracleAgreement:
    @pytest.mark.parametrize(
        "alpha,beta", [(0.3, 1.0), (0.8, 0.8), (1.5, 1.0), (1.5, 1.5), (2.7, 1.2)]
    )
    def test_200_digit_series(self, alpha, beta):
        # absolute tolerance where it is attainable; relative once the value
        # itself exceeds float absolute resolution (E can reach exp(z^(1/a)))
        for z in (-10.0, -5.0, -1.0, -0.1, 0.5, 3.0, 10.0):
            ref = ml_oracle(alpha, beta, z)
            val = ml(MLParams(alpha, beta), z)
            if math.isinf(ref):
                # value overflows float range; both sides must agree on that
                assert math.isinf(val) and val > 0
            else:
                assert abs(val - ref) < 1e-10 + 1e-12 * abs(ref)

    def test_spec_point(self):
        assert abs(ml(MLParams(1.5, 1.0), -5.0) - ml_oracle(1.5, 1.0, -5.0)) < 1e-10

    def test_deep_negative_tail(self):
        # large |z| exercises the asymptotic branch
        for alpha in (1.25, 1.5, 1.75):
            for z in (-50.0, -200.0, -1000.0):
                ref = ml_oracle(alpha, 1.0, z, dps=400)
                assert abs(ml(MLParams(alpha, 1.0), z) - ref) < 1e-10 + 1e-8 * abs(ref)


class TestSwitchContinuity:
    def test_values_straddling_switch(self):
        for alpha, beta in ((0.6, 1.0), (1.5, 1.0)):
            for sign in (-1.0, 1.0):
                z0 = sign * (SERIES_SWITCH - 1e-11)
                z1 = sign * (SERIES_SWITCH + 1e-11)
                a = ml(MLParams(alpha, beta), z0)
                b = ml(MLParams(alpha, beta), z1)
                assert abs(a - b) < 1e-9 * max(1.0, abs(a))


class TestGammaPlatform:
    def test_reference_table(self):
        # 20 reference points on [0.1, 10] from arbitrary-precision Gamma
        xs = np.linspace(0.1, 10.0, 20)
        with mpmath.workdps(60):
            refs = [float(mpmath.gamma(mpmath.mpf(float(x)))) for x in xs]
        for x, ref in zip(xs, refs):
            assert abs(sgamma(x) - ref) <= 1e-14 * abs(ref)


class TestDecomposition:
    def test_sum_reproduces_ml(self):
        for alpha in (1.25, 1.5, 1.75):
            for t in (0.5, 1.0, 2.0, 5.0, 10.0):
                lhs = ml(MLParams(alpha, 1.0), -(t**alpha))
                rhs = ml_decomp_f(alpha, 0, t) + ml_decomp_g(alpha, 0, t)
                assert abs(lhs - rhs) < 1e-6

    def test_f_asymptotic_amplitude(self):
        # f_{1.5,0}(t) ~ t^{-1.5}/Gamma(-0.5) for large t; |.| = t^{-1.5}/(2 sqrt(pi))
        ref = 100.0**-1.5 / (2.0 * math.sqrt(math.pi))
        val = ml_decomp_f(1.5, 0, 100.0)
        assert abs(abs(val) - ref) < 0.02 * ref
        assert val < 0.0  # 1/Gamma(-0.5) is negative

    def test_prefactor_vanishes_near_two(self):
        assert abs(ml_decomp_f(1.999, 0, 1.0)) < 1e-3

    def test_g_closed_form(self):
        alpha, t, k = 1.5, 2.0, 1
        r = t * math.cos(math.pi / alpha)
        expected = (
            (2.0 / alpha)
            * math.exp(r)
            * math.cos(t * math.sin(math.pi / alpha) - math.pi * k / alpha)
        )
        assert ml_decomp_g(alpha, k, t) == pytest.approx(expected)

    def test_oscillatory_part_bounded(self):
        for t in (0.5, 1.0, 5.0, 50.0):
            bound = (2.0 / 1.5) * math.exp(t * math.cos(math.pi / 1.5))
            assert abs(ml_decomp_g(1.5, 0, t)) <= bound * (1.0 + 1e-12)

    def test_domain(self):
        with pytest.raises(FracDomainError):
            ml_decomp_f(2.5, 0, 1.0)
        with pytest.raises(FracDomainError):
            ml_decomp_f(1.5, 0, -1.0)


class TestParams:
    def test_invalid(self):
        with pytest.raises(FracDomainError):
            MLParams(-1.0, 1.0)
        with pytest.raises(FracDomainError):
            MLParams(1.0, 0.0)
