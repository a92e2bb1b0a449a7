import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszmorrey.errors import PreconditionError
from rieszmorrey.spaces import (
    BallIndicator,
    ComplementPower,
    Gaussian,
    PhiFunction,
    RadialPowerBump,
    Zero,
    lp_norm,
    morrey_norm_global,
    morrey_norm_local,
    weak_lq_norm,
    weak_morrey_norm_local,
)
from rieszmorrey.weights import Ball, Weight

ONE = Weight.constant(1)
R_GRID = np.geomspace(1e-2, 1e2, 33)  # contains r = 1


def _family(n):
    return [
        BallIndicator(n, radius=0.5),
        BallIndicator(n, radius=2.0, center=np.full(n, 0.3)),
        Gaussian(n, width=1.0),
        RadialPowerBump(n, gamma=0.125 * n, radius=1.0),
        ComplementPower(n, radius=1.0),
    ]


class TestLp:
    def test_disk_indicator(self):
        got = lp_norm(BallIndicator(2, radius=1.0), Weight.constant(2), 1.0, Ball((0.0, 0.0), 2.0), 2.0)
        assert got == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_zero(self):
        assert lp_norm(Zero(1), ONE, 1.0, Ball((0.0,), 1.0), 2.0) == 0.0

    def test_power_bump(self):
        got = lp_norm(RadialPowerBump(1, gamma=0.25, radius=1.0), ONE, 1.0, Ball((0.0,), 1.0), 2.0)
        assert got == pytest.approx(2.0, rel=1e-8)

    def test_non_integrable_bump(self):
        with pytest.raises(PreconditionError):
            lp_norm(RadialPowerBump(1, gamma=0.5, radius=1.0), ONE, 1.0, Ball((0.0,), 1.0), 2.0)

    def test_gaussian_n1(self):
        # ||exp(-x^2)||_{L_2(R)} = (pi/2)^{1/4}; the ball of radius 20 holds all of it
        got = lp_norm(Gaussian(1, width=1.0), ONE, 1.0, Ball((0.0,), 20.0), 2.0)
        assert got == pytest.approx((math.pi / 2) ** 0.25, rel=1e-8)


class TestWeak:
    def test_indicator(self):
        got = weak_lq_norm(BallIndicator(1, radius=1.0), ONE, 1.0, Ball((0.0,), 2.0), 2.0)
        assert got == pytest.approx(math.sqrt(2.0), rel=1e-8)

    def test_zero(self):
        assert weak_lq_norm(Zero(1), ONE, 1.0, Ball((0.0,), 2.0), 2.0) == 0.0

    def test_inverse_sqrt(self):
        got = weak_lq_norm(RadialPowerBump(1, gamma=0.5, radius=1.0), ONE, 1.0, Ball((0.0,), 1.0), 2.0)
        assert got == pytest.approx(math.sqrt(2.0), rel=1e-6)

    def test_empty_threshold_grid(self):
        with pytest.raises(PreconditionError):
            weak_lq_norm(BallIndicator(1), ONE, 1.0, Ball((0.0,), 2.0), 2.0, lam_grid=[])

    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
    def test_weak_below_strong(self, n, q):
        w = Weight.constant(n)
        for f in _family(n):
            for r in (0.3, 1.0, 5.0):
                ball = Ball(np.full(n, 0.1), r)
                weak = weak_lq_norm(f, w, 1.0, ball, q)
                strong = lp_norm(f, w, 1.0, ball, q)
                assert weak <= strong * (1 + 1e-9)


class TestMorreyLocal:
    def test_indicator_classical(self):
        res = morrey_norm_local(BallIndicator(1, radius=1.0), 2.0, PhiFunction.morrey(0.5, 1, 2.0), ONE, 1.0, 0.0,
                                R_GRID)
        assert res.value == pytest.approx(1.0, abs=1e-3)
        assert res.r_star == pytest.approx(1.0, rel=1e-12)
        assert res.stable

    def test_zero(self):
        res = morrey_norm_local(Zero(1), 2.0, PhiFunction.morrey(0.5, 1, 2.0), ONE, 1.0, 0.0, R_GRID)
        assert res.value == 0.0

    def test_off_center_brute_force(self):
        # phi^{-1} |B|^{-1/2} ||chi chi_B||_2 with |B| = 2r and the overlap length of [5-r, 5+r] and [-1, 1]
        res = morrey_norm_local(BallIndicator(1, radius=1.0), 2.0, PhiFunction.morrey(0.5, 1, 2.0), ONE, 1.0, 5.0,
                                R_GRID, refine=1)
        overlap = np.clip(np.minimum(5 + R_GRID, 1.0) - np.maximum(5 - R_GRID, -1.0), 0.0, None)
        oracle = R_GRID**0.25 * (2 * R_GRID) ** -0.5 * overlap**0.5
        assert res.value == pytest.approx(oracle.max(), rel=1e-10)

    @given(st.floats(0.05, 0.95), st.sampled_from([1.0, 2.0, 3.0]))
    def test_classical_normalization(self, frac, p):
        # sup_r |B(0,1)|^{-1/p} r^{-lam/p} ||f chi_B||_p against a directly coded oracle
        lam = frac
        f = Gaussian(1, width=1.0)
        res = morrey_norm_local(f, p, PhiFunction.morrey(lam, 1, p), ONE, 1.0, 0.0, R_GRID, refine=1)
        direct = np.array([lp_norm(f, ONE, 1.0, Ball((0.0,), r), p) for r in R_GRID])
        oracle = (2.0 ** (-1 / p) * R_GRID ** (-lam / p) * direct).max()
        assert res.value == pytest.approx(oracle, rel=1e-8)

    def test_weak_indicator_matches_strong(self):
        phi = PhiFunction.morrey(0.5, 1, 2.0)
        f = BallIndicator(1, radius=1.0)
        weak = weak_morrey_norm_local(f, 2.0, phi, ONE, 1.0, 0.0, R_GRID)
        strong = morrey_norm_local(f, 2.0, phi, ONE, 1.0, 0.0, R_GRID)
        assert weak.value == pytest.approx(strong.value, abs=1e-3)
        assert weak.value == pytest.approx(1.0, abs=1e-3)

    def test_weak_zero(self):
        assert weak_morrey_norm_local(Zero(1), 2.0, PhiFunction.morrey(0.5, 1, 2.0), ONE, 1.0, 0.0).value == 0.0

    @pytest.mark.parametrize("n", [1, 2])
    def test_weak_below_strong(self, n):
        w = Weight.constant(n)
        phi = PhiFunction.morrey(0.5 * n, n, 2.0)
        grid = np.geomspace(1e-2, 1e2, 9)
        for f in _family(n):
            weak = weak_morrey_norm_local(f, 2.0, phi, w, 1.0, np.zeros(n), grid, refine=1)
            strong = morrey_norm_local(f, 2.0, phi, w, 1.0, np.zeros(n), grid, refine=1)
            assert weak.value <= strong.value * (1 + 1e-9)


class TestMorreyGlobal:
    PHI = PhiFunction.adams(0.5, 1).power_of(0.5)

    def test_symmetric_centers(self):
        f = BallIndicator(1, radius=1.0)
        a = morrey_norm_global(f, 2.0, self.PHI, ONE, 1.0, [0.7], R_GRID)
        b = morrey_norm_global(f, 2.0, self.PHI, ONE, 1.0, [-0.7], R_GRID)
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_single_center_is_local(self):
        f = Gaussian(1)
        g = morrey_norm_global(f, 2.0, self.PHI, ONE, 1.0, [0.0], R_GRID)
        loc = morrey_norm_local(f, 2.0, self.PHI, ONE, 1.0, 0.0, R_GRID)
        assert g.value == loc.value

    def test_zero(self):
        assert morrey_norm_global(Zero(1), 2.0, self.PHI, ONE, 1.0, [-1.0, 0.0, 1.0], R_GRID).value == 0.0

    def test_maximizing_center_reported(self):
        f = BallIndicator(1, radius=0.1, center=[2.0])
        res = morrey_norm_global(f, 2.0, self.PHI, ONE, 1.0, [-1.0, 0.0, 2.0], R_GRID)
        assert res.center_star == (2.0,)


class TestHomogeneity:
    @given(st.floats(1e-3, 1e3), st.sampled_from([0, 1, 2, 3, 4]))
    def test_all_norms(self, c, which):
        f = _family(1)[which]
        g = f * c
        ball = Ball((0.2,), 1.5)
        phi = PhiFunction.morrey(0.5, 1, 2.0)
        grid = np.geomspace(1e-2, 1e2, 9)
        pairs = [
            (lp_norm(g, ONE, 1.0, ball, 2.0), lp_norm(f, ONE, 1.0, ball, 2.0)),
            (weak_lq_norm(g, ONE, 1.0, ball, 2.0), weak_lq_norm(f, ONE, 1.0, ball, 2.0)),
            (morrey_norm_local(g, 2.0, phi, ONE, 1.0, 0.2, grid, refine=1).value,
             morrey_norm_local(f, 2.0, phi, ONE, 1.0, 0.2, grid, refine=1).value),
            (weak_morrey_norm_local(g, 2.0, phi, ONE, 1.0, 0.2, grid, refine=1).value,
             weak_morrey_norm_local(f, 2.0, phi, ONE, 1.0, 0.2, grid, refine=1).value),
            (morrey_norm_global(g, 2.0, phi, ONE, 1.0, [-1.0, 1.0], grid, refine=1).value,
             morrey_norm_global(f, 2.0, phi, ONE, 1.0, [-1.0, 1.0], grid, refine=1).value),
        ]
        for scaled, base in pairs:
            assert scaled == pytest.approx(c * base, rel=1e-10)

    def test_negative_scale_uses_modulus(self):
        f = Gaussian(1)
        ball = Ball((0.0,), 2.0)
        assert lp_norm(f * -3.0, ONE, 1.0, ball, 2.0) == pytest.approx(3 * lp_norm(f, ONE, 1.0, ball, 2.0), rel=1e-12)


class TestMonotonicity:
    def test_nested_indicators(self):
        phi = PhiFunction.morrey(0.5, 1, 2.0)
        small = morrey_norm_local(BallIndicator(1, radius=0.5), 2.0, phi, ONE, 1.0, 0.0, R_GRID, refine=1)
        big = morrey_norm_local(BallIndicator(1, radius=1.0), 2.0, phi, ONE, 1.0, 0.0, R_GRID, refine=1)
        assert small.value <= big.value
