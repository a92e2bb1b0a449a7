import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszmorrey.errors import PreconditionError
from rieszmorrey.hardy import (
    HalfLineFunction,
    best_constant_B,
    hardy_inequality_check,
    hardy_sides,
    identity_embedding_check,
    infimal_transform,
    supremal_transform,
    weighted_hardy,
)

ONE = HalfLineFunction.constant(1.0)
LINEAR = HalfLineFunction.power(1.0)
INV = HalfLineFunction.power(-1.0)
INV_SQ = HalfLineFunction.power(-2.0)


def _wiggly(num):
    s = np.geomspace(1e-3, 1e6, num)
    return HalfLineFunction.from_table(s, s**-0.5 * (1 + np.sin(np.log(s)) ** 2))


class TestSupremal:
    def test_decreasing(self):
        assert supremal_transform(INV, 2.0) == 0.5

    def test_increasing_diverges(self):
        assert supremal_transform(LINEAR, 3.0) == math.inf

    def test_oscillating_table_refines(self):
        coarse = supremal_transform(_wiggly(361), 1.0)
        fine = supremal_transform(_wiggly(1441), 1.0)
        assert abs(coarse - fine) <= 0.02 * fine

    def test_short_tail_grid_rejected(self):
        with pytest.raises(PreconditionError):
            supremal_transform(INV, 1.0, tail_grid=np.geomspace(1.0, 10.0, 5))

    def test_explicit_tail_grid(self):
        g = HalfLineFunction.power_log(-1.0, 2.0)
        got = supremal_transform(g, 1.0, tail_grid=np.geomspace(1.0, 1e4, 401))
        assert got == pytest.approx(float(g(np.array([1.0]))[0]), rel=1e-12)

    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(0.01, 100.0), st.floats(1.0, 100.0))
    def test_non_increasing_in_t(self, gamma, beta, t, k):
        g = HalfLineFunction.power_log(gamma, beta)
        a, b = supremal_transform(g, t), supremal_transform(g, k * t)
        assert b <= a * (1 + 1e-12) or a == math.inf

    def test_infimal(self):
        assert infimal_transform(LINEAR, 2.0) == 2.0
        assert infimal_transform(INV, 2.0) == 0.0


class TestWeightedHardy:
    def test_inverse_square(self):
        assert weighted_hardy(ONE, INV_SQ, 2.0).value == pytest.approx(0.5, rel=1e-10)

    def test_zero(self):
        assert weighted_hardy(HalfLineFunction.constant(0.0), INV_SQ, 2.0).value == 0.0

    def test_harmonic_diverges(self):
        assert weighted_hardy(ONE, INV, 1.0).divergent

    def test_t_positive(self):
        with pytest.raises(PreconditionError):
            weighted_hardy(ONE, INV_SQ, 0.0)


class TestBestConstant:
    def test_closed_form(self):
        res = best_constant_B(ONE, LINEAR, INV_SQ)
        assert res.value == pytest.approx(1.0, abs=1e-6)
        assert res.stable and not res.divergent

    def test_zero_weight(self):
        assert float(best_constant_B(ONE, LINEAR, HalfLineFunction.constant(0.0))) == 0.0

    def test_unbounded_at_origin(self):
        res = best_constant_B(ONE, ONE, INV_SQ)
        assert res.divergent and float(res) == math.inf

    def test_w1_hypothesis(self):
        with pytest.raises(PreconditionError):
            best_constant_B(LINEAR, ONE, INV_SQ)

    def test_report_fields(self):
        assert set(best_constant_B(ONE, LINEAR, INV_SQ).to_dict()) == {"B_estimate", "divergent", "t_star", "stable"}

    def test_power_triple(self):
        # w1 = 1, w2 = t^2, w = s^-3: B = sup_t t^2 / (2 t^2) = 1/2
        res = best_constant_B(ONE, HalfLineFunction.power(2.0), HalfLineFunction.power(-3.0))
        assert res.value == pytest.approx(0.5, rel=1e-8)


class TestHardyInequality:
    SAMPLES = [
        HalfLineFunction.constant(1.0),
        HalfLineFunction.from_table([0.1, 1.0, 10.0], [0.0, 1.0, 1.0]),
        HalfLineFunction.from_table([1e-3, 0.5, 2.0, 50.0], [0.2, 0.3, 0.9, 1.0]),
    ]

    def test_closed_form_triple(self):
        rep = hardy_inequality_check(ONE, LINEAR, INV_SQ, self.SAMPLES)
        assert rep.holds
        assert rep.detail["C"] == pytest.approx(1 + 1e-6, rel=1e-6)

    def test_constant_g_is_extremal(self):
        lhs, rhs = hardy_sides(ONE, LINEAR, INV_SQ, HalfLineFunction.constant(2.0))
        assert lhs == pytest.approx(2.0, rel=1e-10) and rhs == 2.0

    def test_rejects_decreasing_sample(self):
        with pytest.raises(PreconditionError):
            hardy_inequality_check(ONE, LINEAR, INV_SQ, [INV], C=2.0)

    def test_small_C_fails(self):
        assert not hardy_inequality_check(ONE, LINEAR, INV_SQ, self.SAMPLES, C=0.5).holds

    @given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8), st.floats(0.1, 10.0))
    def test_random_non_decreasing(self, steps, scale):
        t = np.geomspace(1e-3, 1e3, len(steps))
        g = HalfLineFunction.from_table(t, scale * np.cumsum(steps) + 1e-3)
        lhs, rhs = hardy_sides(ONE, LINEAR, INV_SQ, g)
        assert lhs <= (1 + 1e-6) * rhs


class TestIdentityEmbedding:
    def test_equal_powers(self):
        rep = identity_embedding_check(INV, INV)
        assert rep.holds and rep.empirical_C == pytest.approx(1.0, rel=1e-12)

    def test_zero_w2(self):
        assert identity_embedding_check(INV, HalfLineFunction.constant(0.0)).empirical_C == 0.0

    def test_divergent(self):
        rep = identity_embedding_check(INV, ONE)
        assert rep.divergent and not rep.holds

    def test_hypothesis_violation(self):
        with pytest.raises(PreconditionError):
            identity_embedding_check(LINEAR, ONE)
