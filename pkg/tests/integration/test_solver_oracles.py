"""
求解器在参考配置上的端到端性质: 精确解、压缩、唯一性与 ε 稳定性
"""

import numpy as np
import pytest

from src.grid.operations import make_grid
from src.kernels.models import KernelSpec
from src.semigroup.kernels import derivative_multiplier
from src.semigroup.models import StableLaw
from src.solver.diagnostics import (
    apriori_sweep, contraction_ratio, contraction_vs_horizon, epsilon_stability_study, uniqueness_probe,
)
from src.solver.duhamel import free_evolution, picard_solve
from src.solver.models import DensityTrajectory, InitialLaw, SolverConfig


@pytest.fixture(scope="module")
def reference_config():
    """α=2, β=-1/2 的幂核，ε=0.1, T-t=0.25"""
    return SolverConfig(grid=make_grid(1, 256, 8.0), law=StableLaw(2.0),
                        kernel=KernelSpec(family="power", beta=-0.5),
                        initial=InitialLaw(kind="gaussian", variance=0.25),
                        epsilon=0.1, t=0.0, T=0.25, time_nodes=64)


@pytest.fixture(scope="module")
def reference_result(reference_config):
    return picard_solve(reference_config)


class TestExactSolutions:
    """M = 256 时的精确解检验"""

    def test_constant_drift_at_full_resolution(self):
        cfg = SolverConfig(grid=make_grid(1, 128, 8.0), law=StableLaw(1.5),
                           kernel=KernelSpec(family="constant", vector=[0.5]),
                           initial=InitialLaw(kind="gaussian", variance=0.25), T=0.25, time_nodes=256)
        result = picard_solve(cfg)
        deriv = derivative_multiplier(cfg.grid, 1)
        free = free_evolution(cfg)
        exact = DensityTrajectory(cfg.times, [
            f.to_spectral().multiply(np.exp(-0.5 * s * deriv)).to_physical()
            for s, f in zip(cfg.times, free.slices)])
        assert result.converged
        assert result.trajectory.sup_l1_distance(exact) < 1e-4
        assert result.trajectory.check_invariants()["max_mass_error"] < 1e-6


class TestReferenceSingularConfig:
    """磨光幂核上的Picard行为"""

    def test_converges_with_geometric_increments(self, reference_result):
        assert reference_result.converged
        assert contraction_ratio(reference_result) < 0.8

    def test_mass_and_positivity(self, reference_result):
        invariants = reference_result.trajectory.check_invariants()
        assert invariants["mass_ok"]
        assert invariants["negativity_ok"]

    def test_uniqueness_probe(self, reference_config):
        assert uniqueness_probe(reference_config) < 10 * reference_config.picard_tol

    def test_apriori_norms_grow_with_horizon(self, reference_config):
        frame = apriori_sweep(reference_config.evolve(time_nodes=32), horizons=(0.05, 0.1, 0.2))
        assert frame["converged"].all()
        assert frame.attrs["theta_ok"]
        assert np.all(np.isfinite(frame["weighted_norm"]))

    @pytest.mark.slow
    def test_horizon_halving(self, reference_config):
        frame = contraction_vs_horizon(reference_config.evolve(time_nodes=32), halvings=3)
        assert len(frame) == 4
        assert frame["converged"].all()
        assert frame.attrs["monotone"]
        assert np.all(frame["worst_ratio"] >= frame["ratio"])

    @pytest.mark.slow
    def test_epsilon_cauchy_trend(self, reference_config):
        frame = epsilon_stability_study(reference_config.evolve(time_nodes=32), [0.2, 0.1, 0.05, 0.025])
        assert list(frame.columns) == ["eps_a", "eps_b", "sup_l1", "besov_time", "kernel_distance", "ratio"]
        assert frame.attrs["decreasing"]
        assert frame.attrs["expected_rate"] == pytest.approx(0.125)
        assert frame.attrs["fitted_rate"] >= frame.attrs["expected_rate"]
        # 末/首比与拟合速率一致: 两倍 ε 阶梯上为 4^{-rate}
        assert frame.attrs["decay_ratio"] == pytest.approx(4.0 ** -frame.attrs["fitted_rate"], rel=0.25)
        assert frame.attrs["ratio_spread"] < 10
        assert np.all(frame["kernel_distance"] > 0)
