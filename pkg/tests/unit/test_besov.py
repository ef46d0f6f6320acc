"""
测试热型Besov范数、加权时间范数与不等式验证器
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.besov.inequalities import (
    FGHIndices, YoungSplit, check_duality, check_embedding, check_fgh, check_young,
    dequadrification_family, fit_loglog_slope, heat_kernel_scaling,
)
from src.besov.models import BesovIndex, InequalityReport, ThermicSettings
from src.besov.norms import (
    besov_norm, thermic_part, thermic_profile, time_lebesgue_norm, weighted_bochner_norm,
    weighted_time_norm,
)
from src.grid.models import Field
from src.grid.operations import make_grid
from src.kernels.mollifier import mollify
from src.semigroup.kernels import grad_heat_kernel
from src.semigroup.models import StableLaw
from src.solver.duhamel import nl_drift
from src.utils.exceptions import DataValidationError, ExponentBookkeepingError, ResolutionError


def _smooth_family(grid, count, seed=5):
    """随机位置与宽度的高斯混合"""
    rng = np.random.default_rng(seed)
    family = []
    for _ in range(count):
        f = Field.zeros(grid)
        for _ in range(3):
            f = f + rng.uniform(-1, 1) * Field.gaussian(grid, rng.uniform(0.1, 0.6),
                                                        mean=rng.uniform(-2, 2))
        family.append(f)
    return family


def _probability_family(grid):
    """收窄16倍的高斯族，加上均匀盒与两原子涂抹混合"""
    family = [Field.gaussian(grid, sd ** 2) for sd in (0.8, 0.4, 0.2, 0.1, 0.05)]
    for width in (0.25, 1.0, 4.0):
        box = Field(grid, (np.abs(grid.axis) <= width / 2).astype(float))
        family.append(box * (1.0 / box.mass()))
    for sep in (0.5, 2.0):
        atoms = Field.gaussian(grid, 0.01, mean=-sep / 2) + Field.gaussian(grid, 0.01, mean=sep / 2)
        family.append(0.5 * atoms)
    return family


class TestThermicSettings:
    """测试热型求积设置"""

    def test_auto_derivative_order(self, brownian):
        ts = ThermicSettings()
        assert ts.resolve_n(BesovIndex(-0.5), brownian) == 0
        assert ts.resolve_n(BesovIndex(0.0), brownian) == 1
        assert ts.resolve_n(BesovIndex(2.5), brownian) == 2

    def test_rejects_too_small_order(self, brownian):
        with pytest.raises(DataValidationError):
            ThermicSettings(n=0).resolve_n(BesovIndex(0.5), brownian)

    def test_rejects_coarse_grid(self, grid_1d, brownian):
        with pytest.raises(ResolutionError):
            ThermicSettings(v_min=1.0).v_grid(grid_1d, brownian)

    def test_index_validation(self):
        with pytest.raises(DataValidationError):
            BesovIndex(0.0, 0.5, 1)
        assert BesovIndex(0.3, 2, "inf").dual() == BesovIndex(-0.3, 2.0, 1.0)


class TestBesovNorm:
    """测试范数的基本性质"""

    def test_zero_field(self, grid_1d, brownian):
        assert besov_norm(Field.zeros(grid_1d), BesovIndex(0.5, 2, 2), brownian) == 0.0

    def test_absolute_homogeneity(self, grid_1d, stable_15):
        f = Field.gaussian(grid_1d, 0.3, mean=0.5)
        idx = BesovIndex(-0.3, 1, 2)
        assert besov_norm(-3.0 * f, idx, stable_15) == pytest.approx(3.0 * besov_norm(f, idx, stable_15),
                                                                      rel=1e-10)

    def test_triangle_inequality(self, grid_1d, brownian):
        idx = BesovIndex(0.2, 2, 1)
        family = _smooth_family(grid_1d, 9)
        for f, g in zip(family[::2], family[1::2]):
            lhs = besov_norm(f + g, idx, brownian)
            assert lhs <= besov_norm(f, idx, brownian) + besov_norm(g, idx, brownian) + 1e-10

    def test_delta_profile_is_flat_at_critical_index(self, grid_1d, brownian):
        _, values = thermic_profile(Field.delta(grid_1d), BesovIndex(-1.0, "inf", "inf"), brownian)
        assert values.max() / values.min() < 1.05

    @pytest.mark.parametrize("ell", [1, 2, "inf"])
    def test_probability_densities_are_uniformly_bounded(self, grid_1d, brownian, ell):
        gamma = -grid_1d.d * (1.0 - (0.0 if ell == "inf" else 1.0 / ell))
        idx = BesovIndex(gamma, ell, "inf")
        wide = besov_norm(Field.gaussian(grid_1d, 0.4), idx, brownian)
        narrow = besov_norm(Field.gaussian(grid_1d, 0.1), idx, brownian)
        assert 0.5 <= narrow / wide <= 2.0

    @pytest.mark.parametrize("ell", [1, 2, "inf"])
    def test_probability_family_within_factor_four(self, brownian, ell):
        grid = make_grid(1, 1024, 8.0)
        idx = BesovIndex(-(1.0 - (0.0 if ell == "inf" else 1.0 / ell)), ell, "inf")
        family = _probability_family(grid)
        norms = np.array([besov_norm(f, idx, brownian) for f in family])
        assert len(family) == 10
        assert np.all(np.isfinite(norms)) and norms.min() > 0
        assert norms.max() / norms.min() <= 4.0

    def test_quadrature_refinement(self, grid_1d, brownian):
        f = Field.gaussian(grid_1d, 0.3)
        idx = BesovIndex(0.5, 2, 2)
        ts = ThermicSettings(v_nodes=200)
        coarse = thermic_part(f, idx, brownian, ts)
        fine = thermic_part(f, idx, brownian, ts.refined())
        assert abs(fine - coarse) / fine < 5e-3


class TestHeatKernelScaling:
    """热核范数在 t 上的幂律"""

    # 每组的 t 阶梯使热型剖面的峰 v* = t·(nα-γ)/(γ + d(1-1/ℓ) + |a|) 落在 [(2·dx)^α, 1] 内
    @pytest.mark.parametrize("gamma, ell, order, alpha, times", [
        (0.5, 1, 0, 2.0, (0.05, 0.1, 0.2)),
        (0.0, 2, 0, 2.0, (0.05, 0.1, 0.2)),
        (-0.5, "inf", 0, 2.0, (0.05, 0.1, 0.2, 0.4)),
        (0.0, "inf", 0, 2.0, (0.05, 0.1, 0.2, 0.4)),
        (0.5, 2, 1, 2.0, (0.05, 0.1, 0.2, 0.4)),
        (-0.5, 1, 1, 2.0, (0.05, 0.1, 0.2, 0.4)),
        (-0.5, "inf", 0, 1.5, (0.15, 0.25, 0.4, 0.6)),
        (0.0, "inf", 1, 1.5, (0.15, 0.25, 0.4, 0.6)),
        (0.5, "inf", 0, 1.5, (0.15, 0.25, 0.4, 0.6)),
        (-0.5, 2, 1, 1.5, (0.15, 0.25, 0.4, 0.6)),
        (0.5, 2, 0, 1.5, (0.15, 0.25, 0.4, 0.6)),
        (0.0, 1, 1, 1.5, (0.1, 0.2, 0.3, 0.45)),
    ])
    def test_slope_matches_scaling(self, grid_1d, gamma, ell, order, alpha, times):
        idx = BesovIndex(gamma, ell, "inf")
        slope, expected, table = heat_kernel_scaling(grid_1d, StableLaw(alpha), idx, times,
                                                     order=order, thermic_only=True)
        assert list(table.columns) == ["t", "norm"]
        assert abs(slope - expected) < 0.05

    @pytest.mark.parametrize("gamma, ell, order, times", [
        (-0.5, "inf", 0, (0.1, 0.2, 0.4, 0.8)),
        (0.5, 2, 1, (0.05, 0.1, 0.2, 0.4)),
    ])
    def test_slope_matches_scaling_in_2d(self, brownian, gamma, ell, order, times):
        grid = make_grid(2, 128, 4.0)
        slope, expected, _ = heat_kernel_scaling(grid, brownian, BesovIndex(gamma, ell, "inf"), times,
                                                 order=order, thermic_only=True)
        assert expected == pytest.approx(-(gamma + 2 * (1 - (0.0 if ell == "inf" else 1 / ell)) + order) / 2)
        assert abs(slope - expected) < 0.05

    def test_rejects_higher_order(self, grid_1d, brownian):
        with pytest.raises(DataValidationError):
            heat_kernel_scaling(grid_1d, brownian, BesovIndex(0.0), (0.1, 0.2), order=2)

    def test_fit_needs_two_points(self):
        assert fit_loglog_slope([1, 2, 4], [1, 0.5, 0.25]) == pytest.approx(-1.0)
        with pytest.raises(DataValidationError):
            fit_loglog_slope([1.0], [1.0])


class TestWeightedTimeNorm:
    """测试加权时间范数"""

    def test_closed_form_weight_integral(self):
        times = np.linspace(0.0, 1.0, 257)
        value = weighted_time_norm(times, np.ones_like(times), 1, 2.0, 1.0)
        assert abs(value - 2.0) / 2.0 < 0.05
        refined = np.linspace(0.0, 1.0, 513)
        doubled = weighted_time_norm(refined, np.ones_like(refined), 1, 2.0, 1.0)
        assert abs(doubled - value) / value < 0.02

    def test_zero_trajectory(self, small_grid, brownian):
        times = np.linspace(0.0, 0.5, 9)
        traj = SimpleNamespace(times=times, slices=[Field.zeros(small_grid)] * len(times))
        assert weighted_bochner_norm(traj, 2, BesovIndex(-0.5, 1, 1), 0.5, brownian) == 0.0

    def test_precomputed_norms(self):
        times = np.linspace(0.0, 1.0, 65)
        traj = SimpleNamespace(times=times, slices=[])
        direct = weighted_time_norm(times, np.ones(65), 2, 1.5, 0.5)
        via = weighted_bochner_norm(traj, 2, BesovIndex(0.0), 0.5, StableLaw(1.5), norms=np.ones(65))
        assert via == pytest.approx(direct)

    def test_right_endpoint_outside_range(self):
        times = np.linspace(0.0, 1.0, 9)
        with pytest.raises(DataValidationError):
            weighted_time_norm(times, np.ones(9), 1, 2.0, 1.5)
        with pytest.raises(DataValidationError):
            weighted_time_norm(times, np.ones(9), 1, 2.0, 0.0)

    def test_plain_lebesgue_norm(self):
        times = np.linspace(0.0, 1.0, 33)
        assert time_lebesgue_norm(times, np.ones(33), 2) == pytest.approx(1.0)
        assert time_lebesgue_norm(times, np.arange(33.0), "inf") == 31.0


class TestInequalityVerifiers:
    """测试Young、对偶与卷积引理验证器"""

    def test_young_admissible_split(self, grid_1d, brownian):
        f, g = Field.gaussian(grid_1d, 0.3), Field.gaussian(grid_1d, 0.5, mean=1.0)
        report = check_young(f, g, BesovIndex(0.0, 1, 1), YoungSplit(0.0, 1, 1, 1, 1), brownian)
        assert report.family_size == 1
        assert 0.0 < report.ratio < np.inf

    def test_young_inadmissible_split(self, grid_1d, brownian):
        f = Field.gaussian(grid_1d, 0.3)
        with pytest.raises(ExponentBookkeepingError) as exc:
            check_young(f, f, BesovIndex(0.0, 1, 1), YoungSplit(0.0, 2, 2, 1, 1), brownian)
        assert "1/ℓ₁ + 1/ℓ₂" in str(exc.value)

    def test_duality_orthogonal_pair(self, grid_1d, brownian):
        even = Field.gaussian(grid_1d, 0.4)
        odd = Field(grid_1d, grid_1d.axis * even.values)
        report = check_duality(odd, even, BesovIndex(0.3, 2, 2), brownian)
        assert report.ratio < 1e-12

    def test_duality_zero_denominator(self, grid_1d, brownian):
        zero = Field.zeros(grid_1d)
        with pytest.raises(DataValidationError):
            check_duality(zero, zero, BesovIndex(0.0), brownian)

    def test_duality_family_constant(self, grid_1d, brownian):
        idx = BesovIndex(-0.25, 2, 2)
        report = InequalityReport("duality")
        family = _smooth_family(grid_1d, 10)
        for k, (f, g) in enumerate(zip(family[::2], family[1::2])):
            check_duality(f, g, idx, brownian, report=report, family_id=k)
        assert report.family_size == 5
        assert np.all(report.ratios <= report.fitted_constant)
        assert report.witnesses[0].ratio == report.fitted_constant

    def test_duality_pairing_is_the_drift(self, grid_1d, brownian, power_kernel):
        b = mollify(power_kernel, grid_1d, 0.2, brownian).components[0]
        nu = Field.gaussian(grid_1d, 0.3, mean=0.4)
        drift = nl_drift(b, nu)[0]
        origin = grid_1d.origin_index[0]
        idx = BesovIndex(-0.5, "inf", "inf")
        for m in (-20, 0, 12, 37):
            report = check_duality(b, nu.reflect().shift_cells(m), idx, brownian)
            assert report.records[0].lhs == pytest.approx(abs(drift.values[origin + m]), abs=1e-8)

    @pytest.mark.parametrize("kind", ["young", "duality"])
    def test_family_constant_stable_under_doubling(self, grid_1d, brownian, kind):
        rng = np.random.default_rng(17)
        family = [Field.gaussian(grid_1d, rng.uniform(0.1, 0.6), mean=rng.uniform(-0.5, 0.5))
                  for _ in range(200)]
        report = InequalityReport(kind)
        constants = {}
        for k, (f, g) in enumerate(zip(family[::2], family[1::2])):
            if kind == "young":
                check_young(f, g, BesovIndex(0.0, 1, 1), YoungSplit(0.0, 1, 1, 1, 1), brownian,
                            report=report, family_id=k)
            else:
                check_duality(f, g, BesovIndex(-0.25, 2, 2), brownian, report=report, family_id=k)
            if k + 1 in (50, 100):
                constants[k + 1] = report.fitted_constant
        assert constants[50] <= constants[100] <= 1.2 * constants[50]

    def test_fgh_drift_instantiation_is_admissible(self):
        FGHIndices.drift_instantiation(-0.5, "inf", "inf").validate()
        bad = FGHIndices.drift_instantiation(-0.5, "inf", "inf")
        with pytest.raises(ExponentBookkeepingError):
            FGHIndices(**{**bad.__dict__, "ell_g2": 2.0}).validate()

    def test_fgh_with_point_mass_reduces_to_duality(self, grid_1d, brownian, power_kernel):
        # g₂ = δ₀: ((f⋆g₁)·δ₀)⋆h = (f⋆g₁)(0)·h，且 h 两侧的指标相同
        f = mollify(power_kernel, grid_1d, 0.2, brownian).components[0]
        g1 = Field.gaussian(grid_1d, 0.3, mean=0.7)
        h = grad_heat_kernel(grid_1d, 0.5, brownian)
        indices = FGHIndices.drift_instantiation(-0.5, "inf", "inf")
        fgh = check_fgh(f, g1, Field.delta(grid_1d), h, indices, brownian)
        duality = check_duality(f.reflect(), g1, BesovIndex(-0.5, "inf", "inf"), brownian)
        assert fgh.ratio > 0.0
        assert fgh.ratio == pytest.approx(duality.ratio, rel=1e-6)

    def test_fgh_drift_instantiation_ratio_is_finite(self, grid_1d, brownian, power_kernel):
        b = mollify(power_kernel, grid_1d, 0.2, brownian).components[0]
        rho = Field.gaussian(grid_1d, 0.25, mean=0.3)
        h = grad_heat_kernel(grid_1d, 0.5, brownian)
        report = check_fgh(b, rho, rho, h, FGHIndices.drift_instantiation(-0.5, "inf", "inf"), brownian)
        assert 0.0 < report.ratio < np.inf

    def test_fgh_zero_factor(self, grid_1d, brownian):
        g = Field.gaussian(grid_1d, 0.3)
        indices = FGHIndices.drift_instantiation(-0.5, "inf", "inf")
        report = check_fgh(g, g, Field.zeros(grid_1d), g, indices, brownian)
        assert report.ratio == 0.0

    @pytest.mark.parametrize("ell", [1, 2, "inf"])
    def test_embedding_constants_are_finite(self, grid_1d, brownian, ell):
        lower, upper = check_embedding(_smooth_family(grid_1d, 30), ell, brownian)
        for report in (lower, upper):
            assert report.family_size == 30
            assert 0.0 < report.fitted_constant < 50.0

    def test_dequadrification_slope_not_worse_than_bound(self, grid_1d, brownian):
        beta = -0.5
        b = [Field(grid_1d, np.sin(np.pi * grid_1d.axis / 8.0))]
        rho = Field.gaussian(grid_1d, 0.3)
        report = dequadrification_family(b, rho, beta, brownian, lags=(0.05, 0.1, 0.2, 0.4))
        assert report.family_size == 4
        assert report.fitted_slope >= -(1 - beta) / brownian.alpha - 0.1

    def test_report_csv_columns(self, tmp_path):
        report = InequalityReport("demo")
        report.record(1.0, 2.0, "a", ell=math.inf)
        path = report.to_csv(tmp_path / "demo.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "family_id,ratio,parameters"
        assert report.summary()["fitted_constant"] == 0.5
