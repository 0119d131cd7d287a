"""Generating-function terms: trivial limits, family differences, parity,
averages, and the defining equation of the perigee arbitrary function."""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from j2lab import lie
from j2lab.elements import DelaunayState, ModelParams, _geom, delaunay_to_polar_nodal
from j2lab.flows import average_over_mean_anomaly
from j2lab.generators import (
    A1Mode,
    GeneratorChoice,
    eval_A1_long_period_free,
    eval_A1_perigee,
    eval_A2_perigee,
    eval_W1,
    eval_W2,
    eval_W_polar,
    perigee_a1_equation_residual,
)
from j2lab.model import CriticalInclinationError, FamilyTag, UnsupportedFamilyError

F = FamilyTag
SHORT_PERIOD_FAMILIES = (F.BROUWER, F.PARALLAX, F.QUARTIC, F.NEUTRAL)


def _state(a=1.5, e=0.2, i_deg=50.0, ell=0.9, g=0.7, h=0.3, params=None):
    params = params or ModelParams()
    L = np.sqrt(params.mu * a)
    G = L * np.sqrt(1.0 - e * e)
    return DelaunayState(ell, g, h, L, G, G * np.cos(np.radians(i_deg)))


class TestGeneratorChoice:
    def test_perigee_forces_its_mode(self):
        with pytest.raises(ValueError):
            GeneratorChoice(F.PERIGEE, 1, A1Mode.ZERO)
        GeneratorChoice(F.PERIGEE, 1, A1Mode.PERIGEE_DETERMINED)

    def test_perigee_mode_only_for_perigee(self):
        with pytest.raises(ValueError):
            GeneratorChoice(F.BROUWER, 1, A1Mode.PERIGEE_DETERMINED)

    def test_long_period_free_neutral_only(self):
        with pytest.raises(ValueError):
            GeneratorChoice(F.BROUWER, 1, A1Mode.LONG_PERIOD_FREE)
        GeneratorChoice(F.NEUTRAL, 1, A1Mode.LONG_PERIOD_FREE)

    def test_w2_availability(self):
        with pytest.raises(ValueError):
            GeneratorChoice(F.PARALLAX, 2)
        GeneratorChoice(F.NEUTRAL, 2)


class TestW1:
    def test_circular_limit_common_value(self, params):
        """At e = 0 every short-period family keeps only the sin(2 theta)
        harmonic with coefficient (3/8) G c20 (re/p)^2 s^2."""
        d = _state(e=0.0, i_deg=55.0)
        gm = _geom(d, params)
        expected = d.G * 0.375 * params.c20 * (params.re / gm.p) ** 2 \
            * gm.s2 * np.sin(2.0 * gm.theta)
        for family in SHORT_PERIOD_FAMILIES:
            value = eval_W1(GeneratorChoice(family), d, params)
            assert value == pytest.approx(expected, rel=1e-13), family

    def test_neutral_vanishes_equatorial(self, params):
        assert eval_W1(GeneratorChoice(F.NEUTRAL), _state(i_deg=0.0),
                       params) == pytest.approx(0.0, abs=1e-30)

    def test_brouwer_minus_parallax_is_center_term(self, params, random_states):
        """The only difference is the equation-of-the-center block."""
        states = random_states(500)
        gm = _geom(states, params)
        diff = (eval_W1(GeneratorChoice(F.BROUWER), states, params)
                - eval_W1(GeneratorChoice(F.PARALLAX), states, params))
        expected = (np.asarray(states.G) * 0.125 * params.c20
                    * (params.re / gm.p) ** 2 * (4.0 - 6.0 * gm.s2) * gm.phi)
        scale = np.abs(np.asarray(states.G) * params.c20 * (params.re / gm.p) ** 2)
        assert np.max(np.abs(diff - expected) / scale) < 1e-13

    def test_periodic_in_mean_anomaly(self, params):
        """Every family's W1 is 2 pi periodic in ell, the BROUWER one
        through the equation of the center."""
        for family in SHORT_PERIOD_FAMILIES:
            choice = GeneratorChoice(family)
            for ell in (0.4, 2.2, 5.9):
                a = eval_W1(choice, _state(ell=ell), params)
                b = eval_W1(choice, _state(ell=ell + 2.0 * np.pi), params)
                assert a == pytest.approx(b, abs=1e-15), family

    def test_perigee_w1_is_a1(self, params):
        d = _state()
        choice = GeneratorChoice(F.PERIGEE, 1, A1Mode.PERIGEE_DETERMINED)
        assert eval_W1(choice, d, params) == eval_A1_perigee(d, params)

    def test_oddness_under_angle_reflection(self, params):
        """W(-angles) = -W(angles) at fixed actions, all families, A1 = 0."""
        for family in SHORT_PERIOD_FAMILIES:
            choice = GeneratorChoice(family)
            plus = eval_W1(choice, _state(ell=0.9, g=0.7, h=0.3), params)
            minus = eval_W1(choice, _state(ell=-0.9, g=-0.7, h=-0.3), params)
            assert minus == pytest.approx(-plus, rel=1e-12), family
        for family in (F.NEUTRAL, F.PERIGEE):
            plus = eval_W2(family, _state(ell=0.9, g=0.7, h=0.3), params)
            minus = eval_W2(family, _state(ell=-0.9, g=-0.7, h=-0.3), params)
            assert minus == pytest.approx(-plus, rel=1e-12), family

    @given(a=st.floats(1.1, 3.0), e=st.floats(0.02, 0.6),
           i_deg=st.floats(10.0, 170.0), ell=st.floats(0.0, 6.28),
           g=st.floats(0.0, 6.28), h=st.floats(0.0, 6.28))
    @settings(max_examples=100, deadline=None)
    def test_oddness_property(self, a, e, i_deg, ell, g, h):
        """Parity holds across the whole sampled orbit domain."""
        params = ModelParams()
        s2 = np.sin(np.radians(i_deg)) ** 2
        assume(abs(4.0 - 5.0 * s2) > 0.05)
        plus = _state(a, e, i_deg, ell, g, h, params)
        minus = _state(a, e, i_deg, -ell, -g, -h, params)
        gm = _geom(plus, params)
        scale = abs(np.asarray(plus.G) * params.c20 * (params.re / gm.p) ** 2)
        for family in SHORT_PERIOD_FAMILIES:
            choice = GeneratorChoice(family)
            total = eval_W1(choice, plus, params) + eval_W1(choice, minus, params)
            assert abs(total) < 1e-11 * scale, family
        for family in (F.NEUTRAL, F.PERIGEE):
            total = eval_W2(family, plus, params) + eval_W2(family, minus, params)
            assert abs(total) < 1e-11 * scale, family

    @given(a=st.floats(1.1, 3.0), e=st.floats(0.02, 0.65),
           i_deg=st.floats(8.0, 172.0), ell=st.floats(0.0, 6.28),
           g=st.floats(0.0, 6.28))
    @settings(max_examples=100, deadline=None)
    def test_first_order_residual_property(self, a, e, i_deg, ell, g):
        """The first-order homological equation holds across the domain."""
        from j2lab import lie
        params = ModelParams()
        d = _state(a, e, i_deg, ell, g, 0.3, params)
        scale = float(lie.homological_scale(1, d, params))
        for family in SHORT_PERIOD_FAMILIES:
            resid = lie.homological_residual(family, 1, d, params)
            assert abs(resid) < 1e-7 * scale, family


class TestW2:
    def test_equatorial_zero(self, params):
        for family in (F.NEUTRAL, F.PERIGEE):
            assert eval_W2(family, _state(i_deg=0.0), params) == pytest.approx(
                0.0, abs=1e-30)

    def test_unsupported_families(self, params):
        for family in (F.BROUWER, F.PARALLAX, F.QUARTIC):
            with pytest.raises(UnsupportedFamilyError):
                eval_W2(family, _state(), params)

    def test_neutral_circular_rows(self, params):
        """e = 0 keeps only the sin(2f+2w) and sin(4f+4w) rows."""
        d = _state(e=0.0, i_deg=55.0)
        gm = _geom(d, params)
        s2, f, w = gm.s2, gm.f, gm.g
        terms = (-48.0 * s2 * (9.0 * s2 - 8.0) * np.sin(2.0 * f + 2.0 * w)
                 + 12.0 * s2 * s2 * np.sin(4.0 * f + 4.0 * w))
        expected = d.G / 256.0 * params.c20**2 * (params.re / gm.p) ** 4 * terms
        assert eval_W2(F.NEUTRAL, d, params) == pytest.approx(expected, rel=1e-12)

    def test_periodic_in_mean_anomaly(self, params):
        for family in (F.NEUTRAL, F.PERIGEE):
            a = eval_W2(family, _state(ell=1.1), params)
            b = eval_W2(family, _state(ell=1.1 + 2.0 * np.pi), params)
            assert a == pytest.approx(b, abs=1e-18), family

    def test_perigee_guard(self, params):
        critical = np.degrees(np.arcsin(np.sqrt(0.8)))
        with pytest.raises(CriticalInclinationError):
            eval_W2(F.PERIGEE, _state(i_deg=critical), params)


class TestPolarForms:
    def test_circular_polar_w1(self, params):
        """kappa = sigma = 0 keeps G (3/8) c20 (re/p)^2 s^2 sin(2 theta)."""
        from j2lab.elements import PolarNodalState
        big_theta = 1.05
        p = big_theta**2 / params.mu
        pn = PolarNodalState(r=p, theta=1.3, nu=0.2, Rdot=0.0,
                             Theta=big_theta, N=0.6)
        s2 = 1.0 - (0.6 / big_theta) ** 2
        expected = big_theta * 0.375 * params.c20 * (params.re / p) ** 2 \
            * s2 * np.sin(2.0 * 1.3)
        assert eval_W_polar(1, pn, params) == pytest.approx(expected, rel=1e-13)

    def test_equatorial_zero(self, params):
        from j2lab.elements import PolarNodalState
        pn = PolarNodalState(r=1.1, theta=0.4, nu=0.0, Rdot=0.02,
                             Theta=1.05, N=1.05)
        assert eval_W_polar(1, pn, params) == pytest.approx(0.0, abs=1e-30)
        assert eval_W_polar(2, pn, params) == pytest.approx(0.0, abs=1e-30)

    def test_cross_chart_agreement(self, params, random_states):
        """Polar forms equal the Delaunay forms on the Delaunay image."""
        states = random_states(300)
        pn = delaunay_to_polar_nodal(states, params)
        w1_d = eval_W1(GeneratorChoice(F.NEUTRAL), states, params)
        w2_d = eval_W2(F.NEUTRAL, states, params)
        scale1 = np.abs(np.asarray(states.G) * params.c20)
        assert np.max(np.abs(eval_W_polar(1, pn, params) - w1_d) / scale1) < 1e-11
        scale2 = scale1 * np.abs(params.c20)
        assert np.max(np.abs(eval_W_polar(2, pn, params) - w2_d) / scale2) < 1e-11

    def test_bad_order(self, params):
        pn = delaunay_to_polar_nodal(_state(), params)
        with pytest.raises(ValueError):
            eval_W_polar(3, pn, params)


class TestArbitraryFunctions:
    def test_vanish_at_circular(self, params):
        d = _state(e=0.0)
        assert eval_A1_long_period_free(d, params) == pytest.approx(0.0, abs=1e-25)
        assert eval_A1_perigee(d, params) == pytest.approx(0.0, abs=1e-25)
        assert eval_A2_perigee(d, params) == pytest.approx(0.0, abs=1e-25)

    def test_vanish_equatorial(self, params):
        d = _state(i_deg=0.0)
        assert eval_A1_long_period_free(d, params) == pytest.approx(0.0, abs=1e-30)
        assert eval_A1_perigee(d, params) == pytest.approx(0.0, abs=1e-30)
        assert eval_A2_perigee(d, params) == pytest.approx(0.0, abs=1e-30)

    def test_mean_anomaly_free(self, params, random_states):
        """dA/d(ell) = 0 by construction (complex step is exact)."""
        states = random_states(100, critical_exclusion=0.05)
        cfg = lie.BracketConfig(fd_scheme="complex_step")
        for func in (eval_A1_long_period_free, eval_A1_perigee, eval_A2_perigee):
            grads = lie.gradient(func, states, params, cfg)
            assert np.max(np.abs(grads[..., 0])) == 0.0

    def test_long_period_free_kills_the_average(self, params, random_states):
        """Mean-anomaly average of W1(NEUTRAL, LONG_PERIOD_FREE) vanishes."""
        states = random_states(10)
        choice = GeneratorChoice(F.NEUTRAL, 1, A1Mode.LONG_PERIOD_FREE)
        for i in range(10):
            d = DelaunayState.from_array(np.asarray(states.as_array())[i])
            gm = _geom(d, params)
            avg = average_over_mean_anomaly(
                lambda s, p: eval_W1(choice, s, p), d, params, nodes=128,
                check_convergence=False)
            scale = abs(d.G * params.c20 * (params.re / gm.p) ** 2)
            assert abs(avg) <= 1e-10 * scale

    def test_brouwer_average_is_not_short_period_only(self, params):
        """The plain BROUWER W1 keeps a long-period average (the classical
        observation that it mixes short- and long-period content)."""
        s2 = 0.5
        d = _state(e=0.3, i_deg=np.degrees(np.arcsin(np.sqrt(s2))), g=0.7)
        gm = _geom(d, params)
        avg = average_over_mean_anomaly(
            lambda s, p: eval_W1(GeneratorChoice(F.BROUWER), s, p), d, params,
            nodes=256, check_convergence=False)
        assert abs(avg) > 1e-6 * abs(d.G * params.c20 * (params.re / gm.p) ** 2)

    def test_a1_defining_equation(self, params, random_states):
        """Substituting A1 into its defining equation leaves ~0 residual."""
        states = random_states(300, critical_exclusion=1e-3)
        gm = _geom(states, params)
        scale = np.abs(params.c20 * np.asarray(states.G)) * (params.re / gm.p) ** 2
        resid = perigee_a1_equation_residual(states, params)
        assert np.max(np.abs(resid) / scale) < 1e-9

    def test_guard_errors(self, params):
        critical = np.degrees(np.arcsin(np.sqrt(0.8)))
        for func in (eval_A1_perigee, eval_A2_perigee,
                     perigee_a1_equation_residual):
            with pytest.raises(CriticalInclinationError):
                func(_state(i_deg=critical), params)
