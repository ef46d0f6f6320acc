"""
求解结果的诊断: 弱形式残差、先验范数、ε稳定性、唯一性探针、混合一致性与压缩率
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import simpson

from src.besov.inequalities import fit_loglog_slope
from src.besov.models import BesovIndex, ThermicSettings
from src.besov.norms import besov_norm, slice_norms, time_lebesgue_norm, weighted_bochner_norm
from src.grid.models import Field, Grid
from src.grid.operations import convolve_vector, pairing
from src.kernels.mollifier import kernel_distance
from src.kernels.models import KernelSpec
from src.semigroup.kernels import derivative_multiplier, semigroup_apply
from src.solver.duhamel import picard_solve, solve_frozen_drift
from src.solver.models import DensityTrajectory, PicardResult, SolverConfig
from src.thresholds.calculator import adjusted_rbar_interval, check_weak, delta_exponent, gap
from src.thresholds.models import INF, as_float, conjugate, format_exact, to_exact
from src.utils.exceptions import DataValidationError, NumericalDivergenceError, ThresholdGateError

logger = logging.getLogger(__name__)

# 测试函数在外层壳层中允许的最大质量
_SUPPORT_TOL = 1e-6

# 压缩率的汇总方式
RATIO_STATISTICS = {"max": np.max, "median": np.median}


@dataclass(frozen=True)
class TestFunction:
    """
    φ(s,x) = χ(s)·ψ(x)，ψ 为以 center 为中心、半径 radius 的紧支撑光滑鼓包，
    χ(s) = ((T-s)/(T-t))² 在 s = T 处为零
    """
    __test__ = False

    center: Sequence[float]
    radius: float

    def space_part(self, grid: Grid) -> Field:
        center = np.broadcast_to(np.asarray(self.center, dtype=float), (grid.d,))
        r2 = sum((x - c) ** 2 for x, c in zip(grid.coordinates, center)) / self.radius ** 2
        values = np.zeros(grid.shape)
        inside = r2 < 1.0
        values[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        psi = Field(grid, values, tag=f"psi@{tuple(np.round(center, 3))}")
        if psi.boundary_mass() > _SUPPORT_TOL:
            raise DataValidationError(
                f"测试函数 (center={tuple(center)}, radius={self.radius}) 未在网格内部紧支撑",
                field_name="test_fns", expected_format="边界质量 <= 1e-6")
        return psi

    @staticmethod
    def time_weight(times: np.ndarray, t: float, T: float) -> np.ndarray:
        return ((T - times) / (T - t)) ** 2

    @staticmethod
    def time_derivative(times: np.ndarray, t: float, T: float) -> np.ndarray:
        return -2.0 * (T - times) / (T - t) ** 2


def default_test_battery(grid: Grid) -> List[TestFunction]:
    """沿第一坐标轴排列的5个鼓包"""
    radius = min(1.5, 0.3 * grid.extent)
    if radius < 4 * grid.dx:
        raise DataValidationError("网格过粗，无法分辨测试函数", field_name="grid")
    battery = []
    for offset in (0.0, -0.5, 0.5, -1.0, 1.0):
        center = np.zeros(grid.d)
        center[0] = offset * radius
        battery.append(TestFunction(tuple(center), radius))
    return battery


def _generator_spectrum(psi: Field, cfg: SolverConfig) -> Field:
    """L^α ψ，符号 -σ(ξ)"""
    return psi.to_spectral().multiply(-cfg.law.symbol(cfg.grid)).to_physical()


def _gradient(psi: Field) -> List[Field]:
    spectrum = psi.to_spectral()
    return [spectrum.multiply(derivative_multiplier(psi.grid, axis)).to_physical()
            for axis in range(1, psi.grid.d + 1)]


def _drift_pairings(traj: DensityTrajectory, cfg: SolverConfig, grad_psi: List[Field]) -> np.ndarray:
    """每个节点上的 ∫ ρ ℬ_ρ·∇ψ"""
    kernel = cfg.drift_kernel
    values = np.zeros(len(traj))
    if kernel.is_zero:
        return values
    for i, (s, rho) in enumerate(zip(traj.times, traj.slices)):
        drift = convolve_vector(kernel.at(s), rho)
        values[i] = sum(pairing(rho * component, g) for component, g in zip(drift, grad_psi))
    return values


def _drift_integral_midpoint(traj: DensityTrajectory, cfg: SolverConfig,
                             grad_psi: List[Field]) -> float:
    """时间调制核: 格中点求值核，两端密度取平均"""
    kernel = cfg.drift_kernel
    times = traj.times
    total = 0.0
    for j in range(len(times) - 1):
        mid = 0.5 * (times[j] + times[j + 1])
        b = kernel.at(mid)
        flux = 0.0
        for rho in (traj.slices[j], traj.slices[j + 1]):
            drift = convolve_vector(b, rho)
            flux += 0.5 * sum(pairing(rho * component, g) for component, g in zip(drift, grad_psi))
        weight = TestFunction.time_weight(np.array([mid]), cfg.t, cfg.T)[0]
        total += (times[j + 1] - times[j]) * weight * flux
    return total


def _single_residual(traj: DensityTrajectory, cfg: SolverConfig, fn: TestFunction) -> float:
    psi = fn.space_part(cfg.grid)
    grad_psi = _gradient(psi)
    l_psi = _generator_spectrum(psi, cfg)
    times = traj.times
    chi = TestFunction.time_weight(times, cfg.t, cfg.T)
    dchi = TestFunction.time_derivative(times, cfg.t, cfg.T)

    initial = pairing(cfg.initial.as_field(cfg.grid), psi) * chi[0]
    masses = np.array([pairing(rho, psi) for rho in traj.slices])
    time_term = simpson(dchi * masses, x=times)
    if cfg.drift_kernel.time_dependent and not cfg.drift_kernel.is_zero:
        drift_term = _drift_integral_midpoint(traj, cfg, grad_psi)
    else:
        drift_term = simpson(chi * _drift_pairings(traj, cfg, grad_psi), x=times)
    generator_term = simpson(chi * np.array([pairing(rho, l_psi) for rho in traj.slices]), x=times)

    terms = (initial, time_term, drift_term, generator_term)
    residual = -initial - time_term - drift_term - generator_term
    scale = sum(abs(x) for x in terms)
    return 0.0 if scale == 0.0 else abs(residual) / scale


def weak_form_residual(traj: DensityTrajectory, cfg: SolverConfig,
                       test_fns: Optional[Sequence[TestFunction]] = None) -> float:
    """
    分布意义下的非线性Fokker-Planck残差

    -∫φ(t)μ - ∬ρ∂_sφ - ∬ρℬ_ρ·∇φ - ∬ρ L^α φ，按各项绝对值之和归一，取测试函数族上的最大值。
    时间积分用Simpson公式，L^α φ 与 ∇φ 在谱空间计算。

    Raises:
        DataValidationError: 测试函数在网格边界附近不为零
    """
    if len(traj) != cfg.time_nodes + 1 or not np.allclose(traj.times, cfg.times):
        raise DataValidationError("轨迹时间网格与求解配置不一致", field_name="traj")
    battery = list(test_fns) if test_fns is not None else default_test_battery(cfg.grid)
    if not battery:
        raise DataValidationError("测试函数族为空", field_name="test_fns")
    worst = max(_single_residual(traj, cfg, fn) for fn in battery)
    logger.debug(f"弱形式残差 {worst:.3e}（{len(battery)} 个测试函数）")
    return float(worst)


@dataclass
class AprioriReport:
    """先验估计的两种时间范数"""
    vartheta: float
    rbar: float
    index: BesovIndex
    horizon: float
    plain_integral: float
    weighted_norm: float
    delta: Optional[float] = None

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.plain_integral) and np.isfinite(self.weighted_norm))

    def to_row(self) -> Dict[str, object]:
        return {
            "horizon": self.horizon,
            "vartheta": self.vartheta,
            "rbar": self.rbar,
            "index": self.index.label(),
            "plain_integral": self.plain_integral,
            "weighted_norm": self.weighted_norm,
            "delta": self.delta,
        }


def _solution_index(cfg: SolverConfig, vartheta) -> BesovIndex:
    """B^{-β+ϑΓ}_{p',q'}"""
    ps = cfg.params
    gamma = -ps.beta + to_exact(vartheta) * gap(ps)
    return BesovIndex(float(gamma), as_float(conjugate(ps.p)), as_float(conjugate(ps.q)))


def _check_rbar(cfg: SolverConfig, vartheta, rbar) -> float:
    lo, hi = adjusted_rbar_interval(cfg.params, vartheta)
    value = to_exact(rbar)
    if not lo <= value < hi:
        raise DataValidationError(
            f"r̄={format_exact(value)} 不在ϑ修正区间 [{format_exact(lo)}, {format_exact(hi)}) 内",
            field_name="rbar", expected_format="[r', ((-β+ϑΓ+d/p)/α)^{-1})")
    return as_float(value)


def apriori_report(traj: DensityTrajectory, cfg: SolverConfig, vartheta: float, rbar,
                   ts: Optional[ThermicSettings] = None) -> AprioriReport:
    """
    ∫|ρ(s)|^{r̄}_{B^{-β+ϑΓ}_{p',q'}} ds（右矩形，不含 s=t）与加权范数 L^{r̄}_w

    Raises:
        DataValidationError: r̄ 不在ϑ修正的容许区间内
    """
    rbar_value = _check_rbar(cfg, vartheta, rbar)
    idx = _solution_index(cfg, vartheta)
    norms = slice_norms(traj, idx, cfg.law, ts)
    steps = np.diff(traj.times)
    if math.isinf(rbar_value):
        plain = float(np.max(norms[1:]))
    else:
        plain = float(np.sum(steps * norms[1:] ** rbar_value))
    weighted = weighted_bochner_norm(traj, rbar_value, idx, traj.times[-1], cfg.law, ts, norms=norms)
    delta = None
    if conjugate(cfg.params.r) != INF:
        delta = float(delta_exponent(cfg.params, vartheta))
    return AprioriReport(vartheta=float(vartheta), rbar=rbar_value, index=idx,
                         horizon=float(traj.times[-1] - traj.times[0]),
                         plain_integral=plain, weighted_norm=weighted, delta=delta)


def _default_rbar(cfg: SolverConfig, vartheta):
    lo, _ = adjusted_rbar_interval(cfg.params, vartheta)
    return lo


def apriori_sweep(cfg: SolverConfig, horizons: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
                  vartheta: float = 0.5, rbar=None,
                  ts: Optional[ThermicSettings] = None) -> pd.DataFrame:
    """
    T-t 扫描下的先验范数；attrs['theta'] 为 log(plain) 对 log(T-t) 的拟合斜率
    """
    if len(horizons) < 2:
        raise DataValidationError("至少需要两个时间跨度", field_name="horizons")
    rbar = _default_rbar(cfg, vartheta) if rbar is None else rbar
    rows = []
    for horizon in horizons:
        result = picard_solve(cfg.evolve(T=cfg.t + horizon))
        row = apriori_report(result.trajectory, cfg, vartheta, rbar, ts).to_row()
        row.update({"converged": result.converged, "iterations": result.iterations})
        rows.append(row)
    frame = pd.DataFrame(rows)
    theta = fit_loglog_slope(frame["horizon"], frame["plain_integral"])
    frame.attrs["theta"] = theta
    frame.attrs["theta_ok"] = bool(theta > 0)
    logger.info(f"先验范数扫描: 拟合 θ = {theta:.3f}")
    return frame


def _require_weak(cfg: SolverConfig):
    report = check_weak(cfg.params)
    if not report.weak_ok and not cfg.override_thresholds:
        raise ThresholdGateError(f"诊断要求弱适定性条件成立: {cfg.params.describe()}", report=report)
    return report


def _solve_converged(cfg: SolverConfig, label: str,
                     init_guess: Optional[DensityTrajectory] = None) -> PicardResult:
    result = picard_solve(cfg, init_guess)
    if not result.converged:
        raise NumericalDivergenceError(f"{label} 求解未收敛 (最后增量 {result.increments[-1]:.3e})",
                                       iteration=result.iterations)
    return result


def epsilon_stability_study(cfg: SolverConfig, eps_list: Sequence[float], vartheta: float = 0.5,
                            rbar=None, ts: Optional[ThermicSettings] = None,
                            slice_stride: int = 8) -> pd.DataFrame:
    """
    相邻 ε 解之间的距离表（sup-L¹ 与 L^{r̄}(B^{-β+ϑΓ}_{p',q'})），
    以及核距离 |b^{ε_k} - b^{ε_j}|_{B^{β-ϑΓ}_{p,q}} 和两者之比

    attrs: decreasing（5%松弛）、decay_ratio（末/首）、ratio_spread（比值 max/min）、
    fitted_rate（sup-L¹ 对 ε 的对数斜率）与 expected_rate = ϑΓ/α（核距离在 B^{β-ϑΓ} 中的速率）

    Raises:
        DataValidationError: ε 列表少于3个或不严格递减，或核不是 KernelSpec
        ThresholdGateError: 参数不满足弱适定性
        NumericalDivergenceError: 某个 ε 的求解未收敛
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise DataValidationError("ε 列表至少需要3个值", field_name="eps_list")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DataValidationError("ε 列表必须为正且严格递减", field_name="eps_list")
    if not isinstance(cfg.kernel, KernelSpec):
        raise DataValidationError("ε稳定性研究需要核的 KernelSpec", field_name="kernel")
    _require_weak(cfg)
    rbar_value = _check_rbar(cfg, vartheta, _default_rbar(cfg, vartheta) if rbar is None else rbar)
    solution_idx = _solution_index(cfg, vartheta)
    ps = cfg.params
    kernel_idx = BesovIndex(float(ps.beta - to_exact(vartheta) * gap(ps)), as_float(ps.p), as_float(ps.q))

    members = []
    for e in eps:
        member = cfg.evolve(epsilon=e)
        members.append((member, _solve_converged(member, f"ε={e:g}").trajectory))

    stride = max(1, int(slice_stride))
    reference_time = 0.5 * (cfg.t + cfg.T)
    rows = []
    for (cfg_a, traj_a), (cfg_b, traj_b) in zip(members, members[1:]):
        sup_l1 = traj_a.sup_l1_distance(traj_b)
        picks = np.arange(0, len(traj_a), stride)
        if picks[-1] != len(traj_a) - 1:
            picks = np.append(picks, len(traj_a) - 1)
        diffs = [besov_norm(traj_a.slices[i] - traj_b.slices[i], solution_idx, cfg.law, ts) for i in picks]
        besov_time = time_lebesgue_norm(traj_a.times[picks], diffs, rbar_value)
        k_dist = kernel_distance(cfg_a.drift_kernel.at(reference_time), cfg_b.drift_kernel.at(reference_time),
                                 kernel_idx, cfg.law, ts)
        rows.append({
            "eps_a": cfg_a.epsilon,
            "eps_b": cfg_b.epsilon,
            "sup_l1": sup_l1,
            "besov_time": besov_time,
            "kernel_distance": k_dist,
            "ratio": sup_l1 / k_dist if k_dist > 0 else float("nan"),
        })
    frame = pd.DataFrame(rows)
    distances = frame["sup_l1"].to_numpy()
    ratios = frame["ratio"].to_numpy()
    ratios = ratios[np.isfinite(ratios) & (ratios > 0)]
    frame.attrs["decreasing"] = bool(np.all(distances[1:] <= distances[:-1] * 1.05))
    frame.attrs["decay_ratio"] = float(distances[-1] / distances[0]) if distances[0] > 0 else 0.0
    frame.attrs["ratio_spread"] = float(ratios.max() / ratios.min()) if ratios.size else 1.0
    frame.attrs["fitted_rate"] = (fit_loglog_slope(frame["eps_a"], distances)
                                  if np.count_nonzero(distances > 0) >= 2 else float("nan"))
    frame.attrs["expected_rate"] = float(to_exact(vartheta) * gap(ps) / ps.alpha)
    logger.info(f"ε稳定性: 衰减比 {frame.attrs['decay_ratio']:.3f}, 拟合速率 {frame.attrs['fitted_rate']:.3g}, "
                f"比值离散度 {frame.attrs['ratio_spread']:.2f}")
    return frame


def _perturbed_guess(cfg: SolverConfig, shift: int) -> DensityTrajectory:
    """μ̃ = (μ + τ_shift μ)/2 的自由演化，首片保持为 μ"""
    mu = cfg.initial.as_field(cfg.grid)
    mu_tilde = 0.5 * mu + 0.5 * mu.shift_cells(shift)
    slices = [mu] + [semigroup_apply(mu_tilde, s - cfg.t, cfg.law) for s in cfg.times[1:]]
    return DensityTrajectory(cfg.times, slices)


def uniqueness_probe(cfg: SolverConfig, shift: int = 3) -> float:
    """
    从两个不同初始猜测出发的Picard不动点的 sup-L¹ 距离

    Raises:
        ThresholdGateError: 参数不满足弱适定性
        NumericalDivergenceError: 任一求解未收敛
    """
    _require_weak(cfg)
    first = _solve_converged(cfg, "自由演化初值")
    second = _solve_converged(cfg, "扰动初值", init_guess=_perturbed_guess(cfg, shift))
    distance = first.trajectory.sup_l1_distance(second.trajectory)
    logger.info(f"唯一性探针: 两个不动点的距离 {distance:.3e}")
    return float(distance)


def mixture_consistency(cfg: SolverConfig, tol: float = 1e-6) -> Dict[str, object]:
    """
    冻结漂移 ℬ_{ρ*} 下的线性流: 从 μ 出发复现 ρ*，且从各原子出发的解按权重叠加后等于 ρ*

    Raises:
        DataValidationError: 初始分布不是原子型
    """
    if cfg.initial.kind != "atoms":
        raise DataValidationError("混合一致性检查需要 atoms 型初始分布", field_name="initial")
    reference = _solve_converged(cfg, "非线性").trajectory
    frozen = cfg.evolve(kernel=cfg.drift_kernel)
    decoupled = solve_frozen_drift(frozen, reference).trajectory
    decoupled_distance = decoupled.sup_l1_distance(reference)

    weights = cfg.initial.atom_weights()
    combined = [Field.zeros(cfg.grid) for _ in reference.slices]
    for w, atom_law in zip(weights, cfg.initial.atom_laws()):
        member = solve_frozen_drift(frozen.evolve(initial=atom_law), reference)
        if not member.converged:
            raise NumericalDivergenceError("单原子冻结漂移求解未收敛", iteration=member.iterations)
        combined = [acc + rho * float(w) for acc, rho in zip(combined, member.trajectory.slices)]
    mixture_distance = DensityTrajectory(reference.times, combined).sup_l1_distance(reference)
    return {
        "decoupled_distance": float(decoupled_distance),
        "mixture_distance": float(mixture_distance),
        "decoupled_ok": bool(decoupled_distance < tol),
        "mixture_ok": bool(mixture_distance < tol),
        "atoms": len(weights),
    }


def contraction_ratio(result: PicardResult, start: int = 3, statistic: str = "max") -> float:
    """
    第 start 次迭代起相邻增量比（跳过零增量）

    statistic="max" 给出最坏情形的压缩率；"median" 对单次抖动不敏感，用于跨配置比较。
    """
    if statistic not in RATIO_STATISTICS:
        raise DataValidationError(f"未知统计量: {statistic}", field_name="statistic",
                                  expected_format=" | ".join(RATIO_STATISTICS))
    inc = np.asarray(result.increments, dtype=float)
    if inc.size < start:
        return float("nan")
    prev, cur = inc[start - 2:-1], inc[start - 1:]
    keep = (prev > 0) & (cur > 0)
    if not np.any(keep):
        return float("nan")
    return float(RATIO_STATISTICS[statistic](cur[keep] / prev[keep]))


def contraction_vs_horizon(cfg: SolverConfig, halvings: int = 3) -> pd.DataFrame:
    """
    T-t 逐次减半时的Picard压缩率

    ratio 为中位数，worst_ratio 为最大值；attrs['monotone'] 表示中位压缩率随跨度减小而严格改善
    """
    if halvings < 1:
        raise DataValidationError("减半次数至少为1", field_name="halvings")
    rows = []
    horizon = cfg.T - cfg.t
    for k in range(halvings + 1):
        span = horizon / 2 ** k
        result = picard_solve(cfg.evolve(T=cfg.t + span))
        rows.append({
            "horizon": span,
            "ratio": contraction_ratio(result, start=2, statistic="median"),
            "worst_ratio": contraction_ratio(result, start=2),
            "iterations": result.iterations,
            "converged": result.converged,
        })
    frame = pd.DataFrame(rows)
    ratios = frame["ratio"].to_numpy()
    finite = ratios[np.isfinite(ratios)]
    frame.attrs["monotone"] = bool(finite.size >= 2 and np.all(finite[1:] < finite[:-1]))
    return frame
