"""
测试核目录与磨光
"""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from src.besov.models import BesovIndex
from src.grid.models import Field
from src.grid.operations import make_grid
from src.kernels.catalog import realize_kernel, refinement_ratio
from src.kernels.models import KernelSpec
from src.kernels.mollifier import (
    mollified_pairings, mollifier_convergence, mollifier_uniform_bound, mollify,
    mollify_modulation, time_mollifier,
)
from src.utils.exceptions import DataValidationError, ResolutionError


class TestKernelSpec:
    """测试核规格校验"""

    def test_singular_family_beta_range(self):
        with pytest.raises(ValidationError):
            KernelSpec(family="power", beta=0.5)
        with pytest.raises(ValidationError):
            KernelSpec(family="grad_holder", beta=-1.0)

    def test_claimed_class_defaults(self, power_kernel):
        assert power_kernel.claimed_class.beta == -0.5
        assert power_kernel.claimed_class.p == "inf"
        assert KernelSpec(family="smooth_bump", beta=-0.3).claimed_class.beta == 0.0

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError):
            KernelSpec(family="zero", colour="red")

    def test_json_round_trip(self):
        spec = KernelSpec(family="power", beta=-0.25, time_profile="power", theta=0.3,
                          claimed_class={"beta": -0.25, "r": 2})
        assert KernelSpec.model_validate_json(spec.model_dump_json()) == spec

    def test_time_modulation_integrability(self):
        with pytest.raises(ValidationError):
            KernelSpec(family="power", beta=-0.5, time_profile="power", theta=0.5)
        spec = KernelSpec(family="power", beta=-0.5, time_profile="power", theta=0.5,
                          claimed_class={"beta": -0.5, "r": 1.5})
        assert spec.modulation(1.0) == pytest.approx(1.0)
        assert spec.modulation(0.25) == pytest.approx(2.0)
        with pytest.raises(DataValidationError):
            spec.modulation(0.0)


class TestCatalog:
    """测试核在网格上的实现"""

    def test_power_kernel_is_odd(self, grid_1d, power_kernel):
        b = realize_kernel(power_kernel, grid_1d).components[0]
        origin = grid_1d.origin_index[0]
        assert b.values[origin] == 0.0
        assert b.values[origin + 16] == pytest.approx(1.0)  # x = 1
        assert np.allclose(b.reflect().values[1:], -b.values[1:])

    def test_power_kernel_only_in_one_dimension(self, grid_2d, power_kernel):
        with pytest.raises(DataValidationError):
            realize_kernel(power_kernel, grid_2d)

    def test_power_kernel_norm_stable_below_its_class(self, grid_1d, power_kernel, brownian):
        ratio = refinement_ratio(power_kernel, grid_1d, BesovIndex(-0.6, "inf", "inf"), brownian)
        assert 0.5 <= ratio <= 2.0

    def test_power_kernel_norm_grows_above_its_class(self, grid_1d, power_kernel, brownian):
        # v_min 缩小 16 倍，热型部分按 4^{γ-β} 增长
        above = refinement_ratio(power_kernel, grid_1d, BesovIndex(-0.3, "inf", "inf"), brownian,
                                 thermic_only=True)
        below = refinement_ratio(power_kernel, grid_1d, BesovIndex(-0.6, "inf", "inf"), brownian,
                                 thermic_only=True)
        assert above == pytest.approx(4.0 ** 0.2, rel=0.15)
        assert above > below * 1.1

    def test_refinement_factor_validation(self, grid_1d, power_kernel, brownian):
        with pytest.raises(DataValidationError):
            refinement_ratio(power_kernel, grid_1d, BesovIndex(-0.6, "inf", "inf"), brownian, factor=1)

    def test_constant_and_zero(self, grid_2d):
        const = realize_kernel(KernelSpec(family="constant", vector=[1.0, -2.0]), grid_2d)
        assert const.sup_norm() == pytest.approx(np.sqrt(5.0))
        assert realize_kernel(KernelSpec(family="zero"), grid_2d).is_zero
        with pytest.raises(DataValidationError):
            realize_kernel(KernelSpec(family="constant", vector=[1.0]), grid_2d)

    def test_grad_holder_is_reproducible(self, grid_2d):
        spec = KernelSpec(family="grad_holder", beta=-0.4, seed=3)
        a = realize_kernel(spec, grid_2d)
        b = realize_kernel(spec, grid_2d)
        assert len(a.components) == 2
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a.components, b.components))

    def test_smooth_bump_points_inward(self, grid_1d):
        b = realize_kernel(KernelSpec(family="smooth_bump"), grid_1d).components[0]
        x = grid_1d.axis
        assert np.all(b.values[x > 0] <= 0.0)
        assert np.all(b.values[x < 0] >= 0.0)

    def test_time_dependent_realization(self, small_grid):
        spec = KernelSpec(family="constant", amplitude=2.0, time_profile="power", theta=0.5,
                          claimed_class={"r": 1.5})
        kernel = realize_kernel(spec, small_grid)
        assert kernel.time_dependent
        assert kernel.sup_norm(0.25) == pytest.approx(4.0)


class TestMollifier:
    """测试空间与时间磨光"""

    def test_time_mollifier_has_unit_mass(self):
        assert quad(lambda u: time_mollifier(u, 0.1), -0.1, 0.1)[0] == pytest.approx(1.0, abs=1e-10)
        assert time_mollifier(0.2, 0.1) == 0.0

    def test_epsilon_below_floor(self, grid_1d, power_kernel, brownian):
        with pytest.raises(ResolutionError):
            mollify(power_kernel, grid_1d, 1e-4, brownian)

    def test_mollified_kernel_is_bounded_and_smooth(self, grid_1d, power_kernel, brownian):
        kernel = mollify(power_kernel, grid_1d, 0.1, brownian)
        assert kernel.epsilon == 0.1
        assert 0.0 < kernel.sup_norm() < realize_kernel(power_kernel, grid_1d).sup_norm()
        assert np.isfinite(kernel.gradient_sup_norm) and kernel.gradient_sup_norm > 0

    def test_modulation_smoothing(self):
        spec = KernelSpec(family="constant", time_profile="power", theta=0.3, claimed_class={"r": 2})
        smoothed = mollify_modulation(spec, 0.01)
        assert smoothed(1.0) == pytest.approx(spec.modulation(1.0), rel=1e-3)
        assert smoothed(-0.02) == 0.0
        assert np.isfinite(smoothed(0.005))

    def test_constant_profile_skips_time_convolution(self, power_kernel):
        assert mollify_modulation(power_kernel, 0.1)(3.0) == 1.0

    def test_distance_decreases_with_epsilon(self, grid_1d, power_kernel, brownian):
        table = mollifier_convergence(power_kernel, grid_1d, -0.7, [0.2, 0.1, 0.05, 0.025], brownian)
        assert list(table.columns) == ["epsilon", "distance", "thermic_distance"]
        assert table.attrs["trend_ok"]
        assert table.attrs["expected_rate"] == pytest.approx(0.1)
        assert np.all(table["thermic_distance"] <= table["distance"])

    @pytest.mark.slow
    def test_thermic_rate_matches_index_gap(self, power_kernel, brownian):
        # v_min = (2·dx)² 远小于 0.025，热型剖面的峰不被截断
        grid = make_grid(1, 4096, 8.0)
        table = mollifier_convergence(power_kernel, grid, -0.7, [0.2, 0.1, 0.05, 0.025], brownian)
        assert table.attrs["trend_ok"]
        assert abs(table.attrs["fitted_rate"] - table.attrs["expected_rate"]) <= 0.1
        assert table.attrs["rate_ok"]
        thermic = table["thermic_distance"].to_numpy()
        assert np.all(thermic[1:] <= thermic[:-1] * 1.05)

    def test_single_epsilon_gives_one_row(self, grid_1d, power_kernel, brownian):
        table = mollifier_convergence(power_kernel, grid_1d, -0.7, [0.1], brownian)
        assert len(table) == 1
        assert table.attrs["trend_ok"] is None
        assert table.attrs["rate_ok"] is None

    def test_convergence_requires_lower_index(self, grid_1d, power_kernel, brownian):
        with pytest.raises(DataValidationError):
            mollifier_convergence(power_kernel, grid_1d, -0.5, [0.1], brownian)

    def test_uniform_bound(self, grid_1d, power_kernel, brownian):
        report = mollifier_uniform_bound(power_kernel, grid_1d, [0.2, 0.1, 0.05], brownian)
        assert report.family_size == 3
        assert report.fitted_constant <= 1.0 + 1e-8

    def test_pairings_are_cauchy(self, grid_1d, power_kernel, brownian):
        g = Field.gaussian(grid_1d, 0.3, mean=1.0)
        values = mollified_pairings(power_kernel, grid_1d, g, [0.2, 0.1, 0.05, 0.025], brownian)
        gaps = np.abs(np.diff(values))
        assert np.all(gaps[1:] < gaps[:-1])

    def test_product_law_mollification(self):
        from src.semigroup.models import StableLaw
        grid = make_grid(2, 64, 4.0)  # (2·dx)^1.5 ≈ 0.125
        kernel = mollify(KernelSpec(family="smooth_bump"), grid, 0.2, StableLaw(1.5, "product"))
        assert len(kernel.components) == 2
        raw = realize_kernel(KernelSpec(family="smooth_bump"), grid)
        assert 0.0 < kernel.sup_norm() < raw.sup_norm()

    def test_constant_kernel_is_fixed_exactly(self, grid_2d, stable_15):
        spec = KernelSpec(family="constant", vector=[0.75, -1.25])
        kernel = mollify(spec, grid_2d, 0.5, stable_15)
        assert np.all(kernel.components[0].values == 0.75)
        assert np.all(kernel.components[1].values == -1.25)
        assert kernel.gradient_sup_norm < 1e-10
