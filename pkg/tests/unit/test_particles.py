"""
测试稳定增量采样与粒子模拟
"""

import dataclasses

import numpy as np
import pytest

from src.grid.models import Field
from src.kernels.catalog import realize_kernel
from src.kernels.models import KernelSpec
from src.kernels.mollifier import mollify
from src.particles.models import ParticleEnsemble, SimConfig, cfl_step
from src.particles.sampling import (
    positive_stable, sample_stable_increment, sample_step_increments, symmetric_stable,
)
from src.particles.simulator import (
    check_run_compatibility, compare_to_pde, empirical_density, interpolate_kernel, pairwise_drift,
    simulate, wrap_periodic,
)
from src.semigroup.models import StableLaw
from src.solver.duhamel import free_evolution, picard_solve
from src.solver.models import InitialLaw, SolverConfig
from src.utils.exceptions import DataValidationError, ParticleEscapeError

SAMPLES = 200_000


def _empirical_cf(samples, xi):
    return float(np.mean(np.cos(xi * samples)))


@pytest.fixture
def zero_kernel(grid_1d):
    return realize_kernel(KernelSpec(family="zero"), grid_1d)


@pytest.fixture
def constant_kernel(grid_1d):
    return realize_kernel(KernelSpec(family="constant", vector=[0.5]), grid_1d)


class TestSampling:
    """测试稳定增量的分布"""

    def test_brownian_increments_have_variance_2dt(self):
        x = sample_step_increments(StableLaw(2.0), 0.1, SAMPLES, 1, seed=1, step=1)
        assert x.shape == (SAMPLES, 1)
        assert np.var(x) == pytest.approx(0.2, rel=0.02)

    def test_positive_stable_laplace_transform(self, rng):
        u = rng.random(SAMPLES)
        e = rng.standard_exponential(SAMPLES)
        a = positive_stable(0.5, u, e)
        assert np.all(a > 0)
        for lam in (0.5, 1.0, 2.0):
            assert np.mean(np.exp(-lam * a)) == pytest.approx(np.exp(-lam ** 0.5), abs=0.01)

    @pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0])
    def test_symmetric_stable_characteristic_function(self, rng, alpha):
        x = symmetric_stable(alpha, rng.random(SAMPLES), rng.standard_exponential(SAMPLES))
        for xi in (0.5, 1.0, 2.0):
            assert _empirical_cf(x, xi) == pytest.approx(np.exp(-xi ** alpha), abs=0.01)

    @pytest.mark.parametrize("mode", ["isotropic", "product"])
    def test_increment_characteristic_function(self, mode):
        law = StableLaw(1.5, mode)
        x = sample_step_increments(law, 0.5, SAMPLES, 2, seed=3, step=1)
        for xi in (0.5, 1.0):
            # 沿第一坐标轴两种模式的符号都是 dt·|ξ|^α
            assert _empirical_cf(x[:, 0], xi) == pytest.approx(np.exp(-0.5 * xi ** 1.5), abs=0.01)

    def test_reproducible_and_prefix_stable(self):
        law = StableLaw(1.5)
        a = sample_step_increments(law, 0.01, 100, 2, seed=7, step=4)
        b = sample_step_increments(law, 0.01, 100, 2, seed=7, step=4)
        c = sample_step_increments(law, 0.01, 10, 2, seed=7, step=4)
        assert np.array_equal(a, b)
        assert np.array_equal(a[:10], c)
        assert not np.array_equal(a, sample_step_increments(law, 0.01, 100, 2, seed=7, step=5))

    def test_rejects_bad_arguments(self, rng):
        with pytest.raises(DataValidationError):
            sample_stable_increment(StableLaw(1.5), 0.0, 1, rng)
        with pytest.raises(DataValidationError):
            sample_stable_increment(StableLaw(1.5), 0.1, 0, rng)
        assert sample_stable_increment(StableLaw(1.5), 0.1, 3, rng).shape == (3,)


class TestGeometry:
    """测试回绕、插值与成对漂移"""

    def test_wrap_periodic(self):
        positions = np.array([[8.5], [-8.1], [0.0]])
        wrapped, count = wrap_periodic(positions, 8.0)
        assert count == 2
        assert np.allclose(wrapped[:, 0], [-7.5, 7.9, 0.0])

    def test_interpolation_is_exact_for_linear_data(self, grid_1d):
        line = Field(grid_1d, grid_1d.axis)
        points = np.array([[0.03], [-1.234], [2.5]])
        assert np.allclose(interpolate_kernel((line,), points)[:, 0], points[:, 0])

    def test_interpolation_matches_nodes_in_two_dimensions(self, grid_2d):
        f = Field.gaussian(grid_2d, 0.5)
        i, j = 20, 13
        point = np.array([[grid_2d.axis[i], grid_2d.axis[j]]])
        assert interpolate_kernel((f,), point)[0, 0] == pytest.approx(f.values[i, j])

    def test_pairwise_drift_blocks_agree(self, grid_1d, rng):
        b = realize_kernel(KernelSpec(family="smooth_bump"), grid_1d).components
        positions = rng.normal(size=(50, 1))
        whole = pairwise_drift(positions, b)
        blocked = pairwise_drift(positions, b, chunk_elements=40, workers=3)
        assert np.allclose(whole, blocked, atol=1e-14)

    def test_constant_kernel_drift(self, constant_kernel, rng):
        drift = pairwise_drift(rng.normal(size=(20, 1)), constant_kernel.components)
        assert np.allclose(drift, 0.5)


class TestSimConfig:
    """测试模拟配置"""

    def test_rejects_unmollified_singular_kernel(self, grid_1d, power_kernel, brownian):
        raw = realize_kernel(power_kernel, grid_1d)
        with pytest.raises(DataValidationError):
            SimConfig(N=10, dt=0.01, horizon=0.1, law=brownian, kernel=raw)
        mollified = mollify(power_kernel, grid_1d, 0.1, brownian)
        assert SimConfig(N=10, dt=0.01, horizon=0.1, law=brownian, kernel=mollified).n_steps == 10

    @pytest.mark.parametrize("kwargs", [dict(N=1), dict(dt=0.0), dict(horizon=0.105), dict(seed=-1)])
    def test_rejects_bad_settings(self, zero_kernel, brownian, kwargs):
        base = dict(N=10, dt=0.01, horizon=0.1, law=brownian, kernel=zero_kernel)
        with pytest.raises(DataValidationError):
            SimConfig(**{**base, **kwargs})

    def test_step_of(self, zero_kernel, brownian):
        cfg = SimConfig(N=10, dt=0.01, horizon=0.1, law=brownian, kernel=zero_kernel)
        assert cfg.step_of(0.05) == 5
        with pytest.raises(DataValidationError):
            cfg.step_of(0.055)
        with pytest.raises(DataValidationError):
            cfg.step_of(0.2)

    def test_cfl_step(self, zero_kernel, constant_kernel):
        assert cfl_step(zero_kernel) == np.inf
        assert cfl_step(constant_kernel) == pytest.approx(0.1 * constant_kernel.grid.dx / 0.5)


class TestSimulate:
    """测试模拟循环"""

    def test_bitwise_reproducible(self, constant_kernel, stable_15):
        cfg = SimConfig(N=200, dt=0.01, horizon=0.1, law=stable_15, kernel=constant_kernel, seed=11)
        first, second = simulate(cfg), simulate(cfg)
        assert np.array_equal(first.final.positions, second.final.positions)
        assert first.final.step_index == 10

    def test_records_requested_times(self, zero_kernel, brownian):
        cfg = SimConfig(N=50, dt=0.01, horizon=0.1, law=brownian, kernel=zero_kernel)
        traj = simulate(cfg, record_times=[0.0, 0.05, 0.1])
        assert np.allclose(traj.times, [0.0, 0.05, 0.1])
        assert traj.at(0.05).step_index == 5
        with pytest.raises(DataValidationError):
            traj.at(0.07)

    def test_constant_drift_moves_the_mean(self, constant_kernel, brownian):
        cfg = SimConfig(N=2000, dt=0.01, horizon=0.5, law=brownian, kernel=constant_kernel, seed=2)
        traj = simulate(cfg)
        shift = traj.final.positions.mean() - traj.snapshots[0].positions.mean()
        assert shift == pytest.approx(0.25, abs=0.1)
        assert traj.final.max_drift == pytest.approx(0.5)

    def test_summary_and_wrap_flag(self, zero_kernel, brownian):
        traj = simulate(SimConfig(N=100, dt=0.01, horizon=0.05, law=brownian, kernel=zero_kernel))
        summary = traj.summary()
        assert summary["N"] == 100 and summary["steps"] == 5
        assert summary["wraps"] == 0 and not summary["flagged"]

    def test_initial_law_is_used(self, zero_kernel, brownian):
        cfg = SimConfig(N=500, dt=0.01, horizon=0.01, law=brownian, kernel=zero_kernel,
                        initial=InitialLaw(kind="point_mass", mean=1.0))
        assert np.all(cfg.initial_ensemble().positions == 1.0)


class TestEmpiricalDensity:
    """测试经验密度与PDE对比"""

    def test_unit_mass(self, grid_1d, rng):
        ens = ParticleEnsemble(rng.normal(size=(1000, 1)), 0.0, 0)
        assert empirical_density(ens, grid_1d).integral() == pytest.approx(1.0)

    def test_escape_is_reported(self, grid_1d, rng):
        positions = rng.normal(size=(100, 1))
        positions[:5] += 20.0
        with pytest.raises(ParticleEscapeError) as exc:
            empirical_density(ParticleEnsemble(positions, 0.0, 0), grid_1d)
        assert exc.value.fraction == pytest.approx(0.05)

    def test_dimension_mismatch(self, grid_2d, rng):
        with pytest.raises(DataValidationError):
            empirical_density(ParticleEnsemble(rng.normal(size=(10, 1)), 0.0, 0), grid_2d)

    def test_ensemble_validation(self):
        with pytest.raises(DataValidationError):
            ParticleEnsemble(np.array([[np.nan], [0.0]]), 0.0, 0)
        with pytest.raises(DataValidationError):
            ParticleEnsemble(np.zeros((1, 1)), 0.0, 0)

    def test_pde_against_itself(self, zero_solver_config):
        fp = free_evolution(zero_solver_config)
        frame = compare_to_pde(fp, fp)
        assert list(frame.columns) == ["time", "l1_distance", "N"]
        assert frame["l1_distance"].max() == 0.0

    def test_grid_mismatch(self, zero_solver_config, zero_kernel, brownian):
        traj = simulate(SimConfig(N=20, dt=0.01, horizon=0.02, law=brownian, kernel=zero_kernel))
        with pytest.raises(DataValidationError):
            compare_to_pde(traj, free_evolution(zero_solver_config))


class TestRunCompatibility:
    """粒子模拟与PDE解须描述同一个问题"""

    @pytest.fixture
    def solver_cfg(self, small_grid, brownian, gaussian_initial):
        return SolverConfig(grid=small_grid, law=brownian, kernel=KernelSpec(family="zero"),
                            initial=gaussian_initial, t=0.0, T=0.04, time_nodes=4)

    @pytest.fixture
    def matched(self, solver_cfg):
        return SimConfig(N=50, dt=0.01, horizon=0.04, law=solver_cfg.law,
                         kernel=solver_cfg.drift_kernel, initial=solver_cfg.initial)

    def test_configs_are_recorded(self, solver_cfg, matched):
        fp = picard_solve(solver_cfg).trajectory
        assert fp.config is solver_cfg
        traj = simulate(matched)
        assert traj.config is matched
        frame = compare_to_pde(traj, fp)
        assert list(frame["time"]) == pytest.approx([0.0, 0.04])
        assert frame["N"].iloc[-1] == 50

    def test_shorter_horizon_is_allowed(self, solver_cfg, matched):
        check_run_compatibility(dataclasses.replace(matched, horizon=0.02), solver_cfg)

    @pytest.mark.parametrize("change", ["law", "kernel", "horizon", "initial", "t0"])
    def test_mismatch_raises(self, solver_cfg, matched, small_grid, change):
        changes = {
            "law": {"law": StableLaw(1.5)},
            "kernel": {"kernel": realize_kernel(KernelSpec(family="constant", vector=[0.5]), small_grid)},
            "horizon": {"horizon": 0.08},
            "initial": {"initial": InitialLaw(kind="gaussian", variance=0.5)},
            "t0": {"t0": 0.01},
        }[change]
        with pytest.raises(DataValidationError):
            check_run_compatibility(dataclasses.replace(matched, **changes), solver_cfg)

    def test_mismatch_is_checked_by_compare(self, solver_cfg, matched):
        fp = picard_solve(solver_cfg).trajectory
        traj = simulate(dataclasses.replace(matched, law=StableLaw(1.5)))
        with pytest.raises(DataValidationError):
            compare_to_pde(traj, fp)

    def test_epsilon_mismatch_raises(self, small_grid, brownian, gaussian_initial):
        bump = KernelSpec(family="smooth_bump")
        solver_cfg = SolverConfig(grid=small_grid, law=brownian, kernel=bump, epsilon=0.2,
                                  initial=gaussian_initial, t=0.0, T=0.04, time_nodes=4)
        sim_cfg = SimConfig(N=50, dt=0.01, horizon=0.04, law=brownian,
                            kernel=mollify(bump, small_grid, 0.1, brownian), initial=gaussian_initial)
        with pytest.raises(DataValidationError):
            check_run_compatibility(sim_cfg, solver_cfg)
        check_run_compatibility(dataclasses.replace(sim_cfg, kernel=solver_cfg.drift_kernel), solver_cfg)
