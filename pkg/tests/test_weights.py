import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszmorrey.errors import PreconditionError
from rieszmorrey.grids import BallGrid
from rieszmorrey.weights import (
    Ball,
    ExponentSet,
    Weight,
    apq_characteristic,
    ball_mass,
    ball_masses,
    derived_exponents,
    holder_lower_bound_check,
    reverse_doubling_check,
)


class TestWeight:
    def test_power_needs_local_integrability(self):
        with pytest.raises(PreconditionError, match="beta > -n"):
            Weight.power(-2.0, 1)

    def test_unknown_family(self):
        with pytest.raises(PreconditionError):
            Weight("spline", 1)

    def test_array_center(self):
        assert Weight.power(0.5, 2, center=np.array([1.0, 2.0])).center == (1.0, 2.0)

    def test_evaluation_positive_off_center(self):
        w = Weight.power(0.5, 2, center=(1.0, 0.0))
        x = np.array([[0.0, 0.0], [3.0, 4.0]])
        np.testing.assert_allclose(w(x), [1.0, math.sqrt(math.hypot(2.0, 4.0))])


class TestBallMass:
    def test_unit_disk(self):
        assert ball_mass(Weight.constant(2), 1.0, Ball((0.0, 0.0), 1.0)) == pytest.approx(math.pi, rel=1e-12)

    def test_sqrt_weight_squared(self):
        assert ball_mass(Weight.power(0.5, 1), 2.0, Ball((0.0,), 1.0)) == pytest.approx(1.0, rel=1e-10)

    def test_non_integrable(self):
        with pytest.raises(PreconditionError):
            ball_mass(Weight.power(-0.75, 1), 2.0, Ball((0.0,), 1.0))

    def test_off_center_power_matches_closed_form(self):
        # int_{-1}^{3} |x|^{1/2} dx = (2/3)(1 + 3^{3/2})
        got = ball_mass(Weight.power(0.5, 1), 1.0, Ball((1.0,), 2.0))
        assert got == pytest.approx(2 / 3 * (1 + 3**1.5), rel=1e-10)

    def test_product_weight_by_quadrature(self):
        # |x| |x-1|^{1/2} on (-1, 2) against a direct one-dimensional rule
        w = Weight.product([((0.0,), 1.0), ((1.0,), 0.5)], 1)
        from scipy.integrate import quad

        ref = sum(quad(lambda x: abs(x) * abs(x - 1) ** 0.5, a, b)[0] for a, b in ((-1, 0), (0, 1), (1, 2)))
        assert ball_mass(w, 1.0, Ball((0.5,), 1.5)) == pytest.approx(ref, rel=1e-8)

    @given(st.floats(-0.9, 2.0), st.floats(-2.0, 2.0), st.floats(0.01, 10.0), st.floats(1.01, 3.0))
    def test_monotone_in_radius(self, beta, c, r, k):
        w = Weight.power(beta, 1)
        m = ball_masses(w, 1.0, (c,), [r, k * r])
        assert m[0] <= m[1] * (1 + 1e-12)

    @given(st.floats(-1.9, 1.0), st.sampled_from([0.0, 0.3, 2.0]), st.floats(0.1, 5.0))
    def test_n2_power_radial_closed_form(self, beta, d, r):
        # centered case only has the closed form 2 pi r^{2+beta}/(2+beta)
        w = Weight.power(beta, 2)
        if d == 0.0:
            assert ball_mass(w, 1.0, Ball((0.0, 0.0), r)) == pytest.approx(2 * math.pi * r ** (2 + beta) / (2 + beta),
                                                                           rel=1e-10)
        else:
            inner = ball_mass(w, 1.0, Ball((d, 0.0), r))
            outer = ball_mass(w, 1.0, Ball((0.0, 0.0), d + r))
            assert 0 < inner <= outer * (1 + 1e-10)


class TestExponents:
    def test_derived(self):
        d = derived_exponents(ExponentSet(2.0, 4.0))
        assert d.r == 3.0
        assert d.s == pytest.approx(2.5, rel=1e-15)

    def test_p_equal_q_rejected(self):
        with pytest.raises(PreconditionError):
            ExponentSet(2.0, 2.0)

    def test_p_one_rejected(self):
        with pytest.raises(PreconditionError):
            derived_exponents(ExponentSet(1.0, 2.0))

    @given(st.floats(1.01, 10.0), st.floats(0.01, 10.0))
    def test_conjugate_identities(self, p, dq):
        e = ExponentSet(p, p + dq)
        assert 1 / e.p + 1 / e.p_conj == pytest.approx(1.0, abs=1e-12)
        d = derived_exponents(e)
        assert d.r_conj == pytest.approx(d.r / (d.r - 1), rel=1e-12)
        assert d.s_conj == pytest.approx(d.s / (d.s - 1), rel=1e-12)


class TestApq:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("pq", [(1.0, 2.0), (2.0, 4.0), (1.5, 2.5)])
    def test_constant_weight_is_one(self, n, pq):
        rep = apq_characteristic(Weight.constant(n), ExponentSet(*pq))
        assert rep.empirical_C == pytest.approx(1.0, abs=1e-6)
        assert rep.holds and rep.stable

    def test_power_weight_stable(self):
        rep = apq_characteristic(Weight.power(0.125, 1), ExponentSet(2.0, 2.0, allow_equal=True))
        assert rep.holds and rep.stable and math.isfinite(rep.empirical_C)
        assert rep.empirical_C > 1.0

    def test_dual_factor_not_integrable(self):
        with pytest.raises(PreconditionError):
            apq_characteristic(Weight.power(3.0, 1), ExponentSet(2.0, 4.0))

    def test_empty_grid(self):
        with pytest.raises(PreconditionError, match="empty grid"):
            apq_characteristic(Weight.constant(1), ExponentSet(2.0, 4.0), BallGrid(np.zeros((0, 1)), [1.0]))

    def test_extremal_ball_serialized(self):
        rep = apq_characteristic(Weight.power(0.125, 1), ExponentSet(2.0, 4.0))
        assert set(rep.extremal) == {"center", "radius"}


class TestHolder:
    def test_constant_equality(self):
        assert holder_lower_bound_check(Weight.constant(1), ExponentSet(2.0, 4.0)).empirical_C == pytest.approx(1.0,
                                                                                                                 abs=1e-12)

    def test_power_weight(self):
        rep = holder_lower_bound_check(Weight.power(0.125, 1), ExponentSet(2.0, 4.0))
        assert rep.holds and rep.empirical_C >= 1.0 - 1e-12

    def test_empty_grid(self):
        with pytest.raises(PreconditionError, match="empty grid"):
            holder_lower_bound_check(Weight.constant(1), ExponentSet(2.0, 4.0), BallGrid(np.zeros((0, 1)), []))

    @given(st.floats(1.0, 4.0), st.floats(0.1, 4.0), st.floats(0.0, 1.0), st.integers(1, 2))
    def test_sampled_admissible_powers(self, p, dq, frac, n):
        e = ExponentSet(p, p + dq)
        # admissible: q*beta > -n and -p'*beta > -n
        lo = -n / e.q
        hi = n / e.p_conj if p > 1 else 0.0
        beta = lo + (hi - lo) * (0.02 + 0.96 * frac)
        grid = BallGrid.default(n, centers_per_axis=(0.0, 0.5, -3.0), radii=np.geomspace(1e-2, 1e2, 5))
        rep = holder_lower_bound_check(Weight.power(beta, n), e, grid)
        assert rep.empirical_C >= 1 - 1e-4


class TestReverseDoubling:
    def test_constant_holds(self):
        rep = reverse_doubling_check(Weight.constant(1), 1.0, 2.0, 0.6)
        assert rep.holds and rep.empirical_C == pytest.approx(0.5, rel=1e-12)

    def test_constant_fails(self):
        assert not reverse_doubling_check(Weight.constant(1), 1.0, 2.0, 0.4).holds

    def test_linear_weight(self):
        grid = BallGrid([[0.0]], np.geomspace(1e-2, 1e2, 9))
        rep = reverse_doubling_check(Weight.power(1.0, 1), 1.0, 2.0, 0.25, grid)
        assert rep.empirical_C == pytest.approx(0.25, rel=1e-12)
        assert rep.holds

    @pytest.mark.parametrize("a1,a2", [(1.0, 0.5), (2.0, 1.0), (2.0, 0.0)])
    def test_parameter_preconditions(self, a1, a2):
        with pytest.raises(PreconditionError):
            reverse_doubling_check(Weight.constant(1), 1.0, a1, a2)
