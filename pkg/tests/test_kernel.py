import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszmorrey.errors import DivergenceError, EvaluationError, PreconditionError
from rieszmorrey.kernel import (
    GrowthSpec,
    Kernel,
    check_doubling,
    check_growth,
    tail_integral,
    tilde_rho,
    tilde_rho_grid,
)


class TestKernelType:
    @pytest.mark.parametrize("alpha, n", [(0.0, 1), (1.0, 1), (3.0, 3), (-0.5, 2)])
    def test_power_range(self, alpha, n):
        with pytest.raises(PreconditionError):
            Kernel.power(alpha, n)

    @pytest.mark.parametrize("n", [0, 4])
    def test_dimension_range(self, n):
        with pytest.raises(PreconditionError):
            Kernel.power(0.5, n)

    def test_table_validation(self):
        with pytest.raises(PreconditionError):
            Kernel.from_table([1.0, 1.0], [1.0, 2.0])
        with pytest.raises(PreconditionError):
            Kernel.from_table([1.0, 2.0], [1.0, -2.0])

    def test_table_interpolates_and_vanishes_outside(self):
        k = Kernel.from_table([1.0, 2.0], [1.0, 3.0])
        np.testing.assert_allclose(k(np.array([0.5, 1.5, 2.5])), [0.0, 2.0, 0.0])

    def test_from_file(self, tmp_path):
        path = tmp_path / "rho.txt"
        path.write_text("0.5 1.0\n1.0 2.0\n2.0 2.5\n")
        k = Kernel.from_file(path)
        assert float(k(np.array([1.0]))[0]) == pytest.approx(2.0)

    def test_power_positive(self):
        t = np.geomspace(1e-6, 1e6, 50)
        assert np.all(Kernel.power_log(0.5, 1.0, 2)(t) > 0)


class _Growing(Kernel):
    """rho(t) = t^2 in R^2: rho(t)/t^(n+1) = 1/t, a log-divergent tail."""

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** 2


class TestTail:
    def test_sqrt_kernel(self):
        res = tail_integral(Kernel.power(0.5, 1), tol=1e-10)
        assert res.value == pytest.approx(2.0, rel=1e-8)

    def test_divergent(self):
        assert tail_integral(_Growing("power", 2, alpha=0.5)).divergent

    def test_n2_alpha1(self):
        assert tail_integral(Kernel.power(1.0, 2)).value == pytest.approx(1.0, rel=1e-8)

    def test_tilde_rho(self):
        assert tilde_rho(Kernel.power(1.0, 2), 3.0) == pytest.approx(3.0, rel=1e-8)
        assert tilde_rho(Kernel.power(0.5, 1), 1.0) == pytest.approx(2.0, rel=1e-8)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_tilde_rho_rejects(self, r):
        with pytest.raises(PreconditionError):
            tilde_rho(Kernel.power(0.5, 1), r)

    def test_tilde_rho_divergent(self):
        with pytest.raises(DivergenceError):
            tilde_rho(_Growing("power", 2, alpha=0.5), 1.0)

    @given(st.floats(0.05, 0.95), st.integers(1, 3))
    def test_tilde_rho_closed_form(self, frac, n):
        alpha = frac * n
        r = np.array([0.1, 1.0, 7.0])
        np.testing.assert_allclose(tilde_rho_grid(Kernel.power(alpha, n), r), r**alpha / (n - alpha), rtol=1e-8)

    def test_non_finite_value_reported(self):
        class Bad(Kernel):
            def __call__(self, t):
                return np.where(np.asarray(t) > 3.0, np.nan, 1.0)

        with pytest.raises(EvaluationError):
            tail_integral(Bad("power", 1, alpha=0.5))


class TestGrowthAndDoubling:
    def test_growth_constant_ratio(self):
        rep = check_growth(Kernel.power(0.5, 1), GrowthSpec(0.25, 4.0, 10.0), np.geomspace(1e-2, 1e2, 9))
        assert rep.holds
        assert rep.detail["relative_spread"] < 1e-10

    def test_growth_fails_small_C(self):
        rep = check_growth(Kernel.power(0.5, 1), GrowthSpec(0.25, 4.0, 1e-6))
        assert not rep.holds and math.isfinite(rep.empirical_C)

    def test_growth_n2(self):
        rep = check_growth(Kernel.power(1.0, 2), GrowthSpec(0.25, 4.0, 10.0))
        assert rep.holds and rep.detail["relative_spread"] < 1e-10

    def test_growth_spec_invariant(self):
        with pytest.raises(PreconditionError):
            GrowthSpec(1.0, 2.0, 1.0)

    @given(st.floats(0.05, 0.95), st.integers(1, 3))
    def test_doubling_power(self, frac, n):
        alpha = frac * n
        rep = check_doubling(Kernel.power(alpha, n), np.geomspace(2.0**-7, 2.0**7, 15))
        assert rep.empirical_C == pytest.approx(2 ** (n - alpha), rel=1e-12)

    def test_doubling_single_point(self):
        assert check_doubling(Kernel.power(0.5, 1), [1.0]).empirical_C == 1.0

    def test_doubling_table_jump(self):
        k = Kernel.from_table([1.0, 2.0 - 1e-9, 2.0, 8.0], [1.0, 1.0, 100.0, 100.0])
        rep = check_doubling(k, [1.0, 2.0, 4.0])
        assert rep.empirical_C >= 100 / 2
