"""Closed-form kernels: frozen values, invariances, independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import levy

from poissonline.kernels import (
    DegenerateCharacteristicError,
    EvaluationPoint,
    KernelValue,
    OscillatorParam,
    dirac_kernel,
    euler_kernel,
    halfplane_poisson_kernel,
    mehler_heat_kernel,
    oscillator_poisson_kernel,
)
from poissonline.quadrature import integrate_semi_infinite

finite = st.floats(allow_nan=False, allow_infinity=False)


class TestEvaluationPoint:
    def test_rejects_nonpositive_y(self):
        with pytest.raises(ValueError):
            EvaluationPoint(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            EvaluationPoint(-1.0, 0.0, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            EvaluationPoint(math.nan, 0.0, 0.0)
        with pytest.raises(ValueError):
            EvaluationPoint(1.0, math.inf, 0.0)

    def test_rejects_bool(self):
        with pytest.raises(ValueError):
            EvaluationPoint(True, 0.0, 0.0)


class TestDirac:
    def test_frozen_value(self):
        kv = dirac_kernel(EvaluationPoint(1.0, 0.0, 1.0))
        assert kv.value == pytest.approx(0.21969564473386122, rel=1e-15)
        assert kv.error_estimate == 0.0
        assert kv.converged

    def test_vanishes_off_support(self):
        assert dirac_kernel(EvaluationPoint(1.0, 0.0, 0.0)).value == 0.0
        assert dirac_kernel(EvaluationPoint(1.0, 0.0, -2.0)).value == 0.0

    @settings(max_examples=100, deadline=None)
    @given(y=st.floats(0.05, 20.0), s=st.floats(1e-3, 50.0))
    def test_matches_levy_density(self, y, s):
        # the gap density is the one-sided stable-1/2 law; scipy's levy
        # distribution with scale y^2/2 is an independent implementation
        ours = dirac_kernel(EvaluationPoint(y, 0.0, s)).value
        ref = float(levy.pdf(s, scale=0.5 * y * y))
        assert ours == pytest.approx(ref, rel=1e-13, abs=1e-300)

    @settings(max_examples=60, deadline=None)
    @given(y=st.floats(0.1, 10.0), s=st.floats(1e-2, 20.0),
           k=st.integers(-3, 3))
    def test_parabolic_scaling(self, y, s, k):
        # P(c y, X, X + c^2 s) = c^{-2} P(y, X, X + s) with dyadic c; the
        # two sides only differ by a few ulp of the log-domain exponent
        c = 2.0 ** k
        lhs = dirac_kernel(EvaluationPoint(c * y, 0.0, c * c * s)).value
        rhs = dirac_kernel(EvaluationPoint(y, 0.0, s)).value / (c * c)
        assert lhs == pytest.approx(rhs, rel=5e-15, abs=1e-300)

    @pytest.mark.parametrize("y", [0.3, 1.0, 3.0])
    def test_unit_mass(self, y):
        def integrand(s):
            kv = np.array([dirac_kernel(EvaluationPoint(y, 0.0, si)).value
                           for si in np.atleast_1d(s)])
            with np.errstate(divide="ignore"):
                return np.sign(kv), np.log(np.abs(kv))

        res = integrate_semi_infinite(integrand)
        assert res.converged
        assert res.value == pytest.approx(1.0, abs=1e-10)


class TestEuler:
    def test_frozen_value(self):
        kv = euler_kernel(EvaluationPoint(1.0, 2.0, 1.0), OscillatorParam(1.0))
        assert kv.value == pytest.approx(0.3360428246662678, rel=1e-15)

    def test_degenerate_on_invariant_line(self):
        with pytest.raises(DegenerateCharacteristicError):
            euler_kernel(EvaluationPoint(1.0, 0.0, 1.0), OscillatorParam(1.0))
        with pytest.raises(DegenerateCharacteristicError):
            euler_kernel(EvaluationPoint(1.0, 1.0, 0.0), OscillatorParam(1.0))

    def test_vanishes_across_branches_and_outward(self):
        a = OscillatorParam(1.0)
        assert euler_kernel(EvaluationPoint(1.0, 2.0, -1.0), a).value == 0.0
        assert euler_kernel(EvaluationPoint(1.0, 1.0, 2.0), a).value == 0.0
        assert euler_kernel(EvaluationPoint(1.0, 1.0, 1.0), a).value == 0.0

    @settings(max_examples=100, deadline=None)
    @given(y=st.floats(0.1, 5.0), a=st.floats(0.1, 5.0),
           r=st.floats(0.05, 20.0), frac=st.floats(0.01, 0.99),
           sign=st.sampled_from([-1.0, 1.0]))
    def test_conjugate_to_dirac(self, y, a, r, frac, sign):
        # euler = dirac after X = log|xi| / (-2a), divided by the
        # change-of-variables factor 2 a |xi'|
        xi, xip = sign * r, sign * r * frac
        ours = euler_kernel(EvaluationPoint(y, xi, xip),
                            OscillatorParam(a)).value
        X = math.log(abs(xi)) / (-2.0 * a)
        Xp = math.log(abs(xip)) / (-2.0 * a)
        ref = dirac_kernel(EvaluationPoint(y, X, Xp)).value / (2.0 * a * abs(xip))
        assert ours == pytest.approx(ref, rel=1e-10, abs=1e-300)

    def test_mirror_symmetry(self):
        a = OscillatorParam(0.7)
        plus = euler_kernel(EvaluationPoint(0.9, 3.0, 1.2), a).value
        minus = euler_kernel(EvaluationPoint(0.9, -3.0, -1.2), a).value
        assert plus == minus


class TestMehler:
    def test_frozen_value(self):
        kv = mehler_heat_kernel(0.5, 0.0, 0.0, OscillatorParam(1.0))
        assert kv.value == pytest.approx(0.3680051987075608, rel=1e-14)

    def test_requires_positive_time(self):
        with pytest.raises(ValueError):
            mehler_heat_kernel(0.0, 0.0, 0.0, OscillatorParam(1.0))

    def test_argument_symmetry_is_exact(self):
        a = OscillatorParam(1.3)
        assert (mehler_heat_kernel(0.4, 0.8, -0.3, a).value
                == mehler_heat_kernel(0.4, -0.3, 0.8, a).value)

    def test_flat_frequency_limit_is_gaussian(self):
        t, x, xp = 0.7, 0.3, -0.4
        K = mehler_heat_kernel(t, x, xp, OscillatorParam(1e-6)).value
        G = math.exp(-(x - xp) ** 2 / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        assert K == pytest.approx(G, rel=1e-9)

    @settings(max_examples=80, deadline=None)
    @given(t=st.floats(1e-6, 50.0), x=st.floats(-8.0, 8.0),
           xp=st.floats(-8.0, 8.0), a=st.floats(0.05, 10.0))
    def test_positive_and_finite(self, t, x, xp, a):
        v = mehler_heat_kernel(t, x, xp, OscillatorParam(a)).value
        assert v >= 0.0
        assert math.isfinite(v)

    def test_long_time_ground_state_decay(self):
        # K(t,0,0) ~ sqrt(a/pi) e^{-a t} for large t
        a, t = 1.0, 30.0
        K = mehler_heat_kernel(t, 0.0, 0.0, OscillatorParam(a)).value
        assert K == pytest.approx(math.sqrt(a / math.pi) * math.exp(-a * t),
                                  rel=1e-12)


class TestOscillatorPoisson:
    def test_frozen_origin_value(self):
        kv = oscillator_poisson_kernel(EvaluationPoint(1.0, 0.0, 0.0),
                                       OscillatorParam(1.0))
        assert kv.converged
        assert kv.value == pytest.approx(0.25955327199433076, rel=1e-10)
        assert kv.error_estimate <= 1e-10 * kv.value

    def test_argument_symmetry_within_error(self):
        a = OscillatorParam(2.0)
        k1 = oscillator_poisson_kernel(EvaluationPoint(0.8, 1.1, -0.4), a)
        k2 = oscillator_poisson_kernel(EvaluationPoint(0.8, -0.4, 1.1), a)
        assert abs(k1.value - k2.value) <= k1.error_estimate + k2.error_estimate

    def test_prefactor_scale_is_exactly_linear(self):
        p = EvaluationPoint(1.0, 0.3, -0.2)
        a = OscillatorParam(1.0)
        base = oscillator_poisson_kernel(p, a).value
        scaled = oscillator_poisson_kernel(p, a, prefactor_scale=math.sqrt(2.0)).value
        assert scaled == pytest.approx(math.sqrt(2.0) * base, rel=1e-15)

    def test_prefactor_scale_validation(self):
        p = EvaluationPoint(1.0, 0.0, 0.0)
        a = OscillatorParam(1.0)
        for bad in (0.0, -1.0, math.nan):
            with pytest.raises(ValueError):
                oscillator_poisson_kernel(p, a, prefactor_scale=bad)

    @pytest.mark.parametrize("y,x,xp,a", [
        (0.5, 0.0, 0.0, 1.0),
        (1.0, 1.0, -1.0, 0.5),
        (2.0, 0.7, 0.3, 2.0),
    ])
    def test_positive_and_converged(self, y, x, xp, a):
        kv = oscillator_poisson_kernel(EvaluationPoint(y, x, xp),
                                       OscillatorParam(a))
        assert kv.converged
        assert kv.value > 0.0


class TestHalfplane:
    def test_on_diagonal(self):
        kv = halfplane_poisson_kernel(EvaluationPoint(1.0, 0.0, 0.0))
        assert kv.value == pytest.approx(1.0 / math.pi, rel=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(y=st.floats(0.05, 10.0), x=st.floats(-20.0, 20.0),
           xp=st.floats(-20.0, 20.0))
    def test_formula(self, y, x, xp):
        kv = halfplane_poisson_kernel(EvaluationPoint(y, x, xp))
        expected = y / (math.pi * (y * y + (x - xp) ** 2))
        assert kv.value == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("y", [0.2, 1.0, 5.0])
    def test_unit_mass(self, y):
        from scipy.integrate import quad

        total, _ = quad(
            lambda xp: halfplane_poisson_kernel(EvaluationPoint(y, 0.0, xp)).value,
            -math.inf, math.inf)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_kernel_value_defaults():
    kv = KernelValue(2.5)
    assert kv.error_estimate == 0.0
    assert kv.converged
