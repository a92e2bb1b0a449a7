import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszmorrey.errors import EvaluationError
from rieszmorrey.quadrature import (
    BallProfile,
    Special,
    ball_volume,
    dyadic_tail,
    integrate,
    integrate_with_error,
    ray_breaks,
    sphere_area,
    sphere_rule,
    suffix_integrals,
)


class TestIntegrate:
    def test_polynomial_exact(self):
        assert integrate(lambda t: 3 * t**2, 0.0, 2.0) == pytest.approx(8.0, rel=1e-14)

    @pytest.mark.parametrize("a", [-0.5, -0.9, -0.99])
    def test_endpoint_singularity(self, a):
        val = integrate(lambda t: t**a, 0.0, 1.0, singular=[0.0])
        assert val == pytest.approx(1.0 / (a + 1.0), rel=1e-9)

    def test_interior_singularity(self):
        val = integrate(lambda t: np.abs(t - 0.3) ** -0.5, 0.0, 1.0, singular=[0.3])
        assert val == pytest.approx(2 * (math.sqrt(0.3) + math.sqrt(0.7)), rel=1e-9)

    def test_jump_break(self):
        val = integrate(lambda t: np.where(t < 0.7, 1.0, 3.0), 0.0, 1.0, breaks=[0.7])
        assert val == pytest.approx(0.7 + 0.9, rel=1e-14)

    def test_non_finite_reports_node(self):
        with pytest.raises(EvaluationError) as info:
            integrate(lambda t: np.where(t > 0.5, np.nan, 1.0), 0.0, 1.0)
        assert info.value.where is not None

    def test_error_estimate_is_small_for_smooth(self):
        val, err = integrate_with_error(np.cos, 0.0, 1.0)
        assert val == pytest.approx(math.sin(1.0), rel=1e-14)
        assert err < 1e-12

    @given(st.floats(-0.95, 3.0), st.floats(0.1, 10.0))
    def test_power_property(self, a, b):
        val = integrate(lambda t: t**a, 0.0, b, singular=[0.0])
        assert val == pytest.approx(b ** (a + 1) / (a + 1), rel=1e-8)

    def test_singular_point_beside_dyadic_break(self):
        # a singular point 1.2e-14 past a dyadic break keeps its exact position
        x = -1.0000000000000124
        u = -x
        val = integrate(lambda t: np.abs(x + t) ** -0.5, 0.0, 2 * u, singular=[u], dyadic=True)
        assert val == pytest.approx(4 * math.sqrt(u), rel=1e-9)


class TestTail:
    def test_convergent(self):
        res = dyadic_tail(lambda t: t**-1.5, 1.0)
        assert not res.divergent
        assert res.value == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("a", [-1.0, -0.5, 0.0])
    def test_divergent(self, a):
        assert dyadic_tail(lambda t: t**a, 1.0).divergent

    def test_suffix_integrals_match_individual(self):
        starts = np.array([0.5, 1.0, 4.0])
        vals, tail = suffix_integrals(lambda t: t**-2.0, starts)
        assert not tail.divergent
        np.testing.assert_allclose(vals, 1.0 / starts, rtol=1e-9)

    def test_suffix_rejects_descending(self):
        with pytest.raises(ValueError):
            suffix_integrals(lambda t: t**-2.0, [2.0, 1.0])


class TestSphere:
    @pytest.mark.parametrize("n, area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
    def test_area(self, n, area):
        assert sphere_area(n) == pytest.approx(area, rel=1e-14)
        _, w = sphere_rule(n)
        assert w.sum() == pytest.approx(area, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_second_moments(self, n):
        dirs, w = sphere_rule(n)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, rtol=1e-14)
        for i in range(n):
            assert (w * dirs[:, i] ** 2).sum() == pytest.approx(sphere_area(n) / n, rel=1e-12)

    @pytest.mark.parametrize("n, vol", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
    def test_ball_volume(self, n, vol):
        assert ball_volume(n, 1.0) == pytest.approx(vol, rel=1e-14)
        assert ball_volume(n, 2.0) == pytest.approx(vol * 2**n, rel=1e-14)


class TestRays:
    def test_sphere_crossings(self):
        brk, sing, soft = ray_breaks([0.0, 0.0], np.array([1.0, 0.0]), [Special((0.5, 0.0), radii=(1.0,))])
        assert sorted(brk) == pytest.approx([1.5])
        assert sing == [] and soft == []

    def test_singular_on_ray(self):
        _, sing, _ = ray_breaks([0.0], np.array([1.0]), [Special((2.0,), singular=True, exponent=-0.5)])
        assert sing == [2.0]


class TestBallProfile:
    def test_indicator_disk(self):
        prof = BallProfile(lambda y: (np.linalg.norm(y, axis=1) < 1).astype(float), (0.0, 0.0), 2,
                           specials=[Special((0.0, 0.0), radii=(1.0,))])
        np.testing.assert_allclose(prof(np.array([0.5, 1.0, 3.0])), [math.pi / 4, math.pi, math.pi], rtol=1e-10)

    def test_off_center_interval(self):
        prof = BallProfile(lambda y: (np.abs(y[:, 0]) < 1).astype(float), (3.0,), 1,
                           specials=[Special((0.0,), radii=(1.0,))])
        np.testing.assert_allclose(prof(np.array([1.0, 2.5, 4.0, 10.0])), [0.0, 0.5, 2.0, 2.0], atol=1e-12)
