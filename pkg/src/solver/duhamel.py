"""
温和(Duhamel)形式的非线性Fokker-Planck方程的Picard求解器

ρ(s) = P^α_{s-t} μ - ∫_t^s (ρ ℬ_ρ)(v) ⋆ ∇p^α_{s-v} dv,   ℬ_ρ(v) = b(v) ⋆ ρ(v)

谱形式: ρ̂(s) = e^{-(s-t)σ} μ̂ - ∫_t^s e^{-(s-v)σ} Σ_i iξ_i F̂_i(v) dv，其中 F = ρℬ_ρ。
梯度与半群因子合成一个乘子，时间奇异性完全落在精确乘子内。
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Union

import numpy as np

from src.grid.models import Field, SpectralField
from src.grid.operations import VectorField, convolve_vector, ensure_same_grid
from src.semigroup.kernels import derivative_multiplier, semigroup_apply
from src.solver.models import DensityTrajectory, PicardResult, SolverConfig
from src.utils.exceptions import DataValidationError, NonFiniteFieldError, NumericalDivergenceError

logger = logging.getLogger(__name__)


def nl_drift(b_slice: Union[Field, Sequence[Field]], rho_slice: Field) -> VectorField:
    """ℬ_ρ = b ⋆ ρ（矢量核逐分量）"""
    components = (b_slice,) if isinstance(b_slice, Field) else tuple(b_slice)
    ensure_same_grid(*components, rho_slice)
    return convolve_vector(components, rho_slice)


def free_evolution(cfg: SolverConfig) -> DensityTrajectory:
    """s ↦ P^α_{s-t} μ"""
    mu = cfg.initial.as_field(cfg.grid)
    slices = [semigroup_apply(mu, s - cfg.t, cfg.law).with_tag(f"s={s:.6g}") for s in cfg.times]
    return DensityTrajectory(cfg.times, slices)


class DuhamelOperator:
    """
    Duhamel映射的离散化

    时间网格均匀，第 j 个时间格 [v_j, v_{j+1}] 的源项取两端通量的平均（left 规则取左端），
    时间调制的核在格中点求值。权重只依赖于格的滞后 m = k - j:
      midpoint: h·e^{-(m-1/2)hσ}
      left:     h·e^{-m h σ}
      product:  (e^{-(m-1)hσ} - e^{-m h σ})/σ（σ=0 时为 h）
    """

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.times = cfg.times
        self.h = cfg.step
        self.kernel = cfg.drift_kernel
        self.sigma = cfg.law.symbol(self.grid)
        self.derivatives = [derivative_multiplier(self.grid, axis) for axis in range(1, self.grid.d + 1)]
        self.mu = cfg.initial.as_field(self.grid)
        self.mu_hat = self.mu.to_spectral().coefficients
        self.weights = self._lag_weights(cfg.quadrature)
        self._cell_drift = [self.kernel.at(0.5 * (a + b)) for a, b in zip(self.times[:-1], self.times[1:])]

    def _lag_weights(self, quadrature: str) -> np.ndarray:
        M, h, sigma = self.cfg.time_nodes, self.h, self.sigma
        lags = np.arange(1, M + 1).reshape((M,) + (1,) * self.grid.d)
        if quadrature == "midpoint":
            return h * np.exp(-(lags - 0.5) * h * sigma)
        if quadrature == "left":
            return h * np.exp(-lags * h * sigma)
        near, far = np.exp(-(lags - 1) * h * sigma), np.exp(-lags * h * sigma)
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = np.where(sigma > 0, (near - far) / sigma, h)
        return weights

    def _divergence_spectrum(self, rho: Field, drift_measure: Field, b: VectorField) -> np.ndarray:
        """Σ_i iξ_i F(ρ·(b_i⋆ν))"""
        drift = convolve_vector(b, drift_measure)
        total = np.zeros(self.grid.shape, dtype=complex)
        for deriv, component in zip(self.derivatives, drift):
            if not np.any(component.values):
                continue
            total += deriv * (rho * component).to_spectral().coefficients
        return total

    def cell_sources(self, traj: DensityTrajectory,
                     drift_from: Optional[DensityTrajectory] = None) -> np.ndarray:
        """
        每个时间格的散度源项谱 Ĝ_j，形状 (M, *grid.shape)

        Args:
            drift_from: 形成漂移 ℬ 所用的测度轨迹（默认为 traj 自身；冻结漂移时为参考解）
        """
        measure = traj if drift_from is None else drift_from
        M = self.cfg.time_nodes
        sources = np.zeros((M,) + self.grid.shape, dtype=complex)
        if self.kernel.is_zero:
            return sources
        endpoint = {}

        def flux(j: int, b: VectorField) -> np.ndarray:
            return self._divergence_spectrum(traj.slices[j], measure.slices[j], b)

        for j in range(M):
            b = self._cell_drift[j]
            if self.cfg.quadrature == "left":
                sources[j] = flux(j, b)
                continue
            if self.kernel.time_dependent:
                left, right = flux(j, b), flux(j + 1, b)
            else:
                left = endpoint.pop(j, None)
                left = flux(j, b) if left is None else left
                right = flux(j + 1, b)
                endpoint[j + 1] = right
            sources[j] = 0.5 * (left + right)
        return sources

    def evaluate(self, sources: np.ndarray, k: int, active: bool = True) -> Field:
        """ρ(s_k) 的Duhamel右端"""
        s = self.times[k]
        if k == 0:
            return self.mu.with_tag(f"s={s:.6g}")
        spectrum = np.exp(-(s - self.cfg.t) * self.sigma) * self.mu_hat
        if active:
            spectrum = spectrum - np.einsum("j...,j...->...", self.weights[k - 1::-1], sources[:k])
        values = SpectralField(self.grid, spectrum).to_physical().values
        if not np.all(np.isfinite(values)):
            raise NumericalDivergenceError(f"Duhamel右端在 s={s:.6g} 处出现NaN/Inf", time=float(s))
        return Field(self.grid, values, tag=f"s={s:.6g}")

    def sweep(self, traj: DensityTrajectory,
              drift_from: Optional[DensityTrajectory] = None) -> DensityTrajectory:
        """一次Jacobi型Picard扫描: 所有切片只依赖上一迭代"""
        sources = self.cell_sources(traj, drift_from)
        active = bool(np.any(sources))
        indices = range(len(self.times))
        if self.cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as executor:
                slices = list(executor.map(lambda k: self.evaluate(sources, k, active), indices))
        else:
            slices = [self.evaluate(sources, k, active) for k in indices]
        return DensityTrajectory(self.times, slices)


def duhamel_rhs(traj: DensityTrajectory, s: float, cfg: SolverConfig) -> Field:
    """
    在时间节点 s ∈ (t, T] 处计算Duhamel右端

    Raises:
        DataValidationError: s 不在 (t, T] 内或不是时间节点
    """
    if not cfg.t < s <= cfg.T:
        raise DataValidationError(f"s={s} 不在 (t, T] = ({cfg.t}, {cfg.T}] 内",
                                  field_name="s", expected_format="(t, T]")
    if len(traj) != cfg.time_nodes + 1 or not np.allclose(traj.times, cfg.times):
        raise DataValidationError("轨迹时间网格与求解配置不一致", field_name="traj")
    operator = DuhamelOperator(cfg)
    k = traj.index_of(s)
    return operator.evaluate(operator.cell_sources(traj), k)


def _iterate(cfg: SolverConfig, operator: DuhamelOperator, current: DensityTrajectory,
             drift_from: Optional[DensityTrajectory] = None, label: str = "Picard") -> PicardResult:
    increments: List[float] = []
    best, best_increment = current, np.inf
    for iteration in range(1, cfg.picard_max + 1):
        try:
            updated = operator.sweep(current, drift_from)
        except NumericalDivergenceError as e:
            raise NumericalDivergenceError(f"{label} 第 {iteration} 次迭代发散: {e}",
                                           iteration=iteration, time=e.time) from e
        except NonFiniteFieldError as e:
            raise NumericalDivergenceError(f"{label} 第 {iteration} 次迭代出现非有限值: {e}",
                                           iteration=iteration) from e
        increment = float(np.max(updated.l1_increments(current)))
        increments.append(increment)
        logger.debug(f"{label} 迭代 {iteration}: sup-L¹ 增量 {increment:.3e}")
        if increment < best_increment:
            best, best_increment = updated, increment
        current = updated
        if increment < cfg.picard_tol:
            logger.info(f"{label} 在 {iteration} 次迭代后收敛 (增量 {increment:.3e})")
            return PicardResult(updated, increments, converged=True)
    logger.warning(f"{label} 在 {cfg.picard_max} 次迭代内未收敛 (最佳增量 {best_increment:.3e})")
    return PicardResult(best, increments, converged=False)


def picard_solve(cfg: SolverConfig, init_guess: Optional[DensityTrajectory] = None) -> PicardResult:
    """
    ρ^{(k+1)}(s) = Duhamel(ρ^{(k)})(s)，直到 sup_s L¹ 增量 < picard_tol

    未收敛不抛异常: 返回增量最小的迭代并标记 converged=False。
    """
    operator = DuhamelOperator(cfg)
    current = init_guess if init_guess is not None else free_evolution(cfg)
    if len(current) != cfg.time_nodes + 1:
        raise DataValidationError("初始猜测的时间网格与配置不一致", field_name="init_guess")
    result = _iterate(cfg, operator, current)
    result.trajectory.config = cfg
    return result


def solve_frozen_drift(cfg: SolverConfig, reference: DensityTrajectory,
                       init_guess: Optional[DensityTrajectory] = None) -> PicardResult:
    """
    冻结漂移 ℬ_{ρ*} 下的线性方程（解耦流的温和形式）；
    对初始分布是线性的，reference 为 ρ*
    """
    operator = DuhamelOperator(cfg)
    current = init_guess if init_guess is not None else free_evolution(cfg)
    return _iterate(cfg, operator, current, drift_from=reference, label="冻结漂移")
