"""
磨光McKean-Vlasov SDE的N粒子欧拉-丸山模拟

X^i ← X^i + dt·(1/N) Σ_j b^ε(s, X^i - X^j) + (𝒲_{s+dt} - 𝒲_s)^i
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.grid.models import Field, Grid
from src.grid.operations import VectorField, l1_distance
from src.kernels.models import MollifiedKernel
from src.particles.models import ParticleEnsemble, ParticleTrajectory, SimConfig, cfl_step
from src.particles.sampling import sample_step_increments
from src.solver.models import DensityTrajectory, SolverConfig
from src.utils.exceptions import DataValidationError, ParticleEscapeError

logger = logging.getLogger(__name__)

# 直方图外粒子占比上限
ESCAPE_LIMIT = 0.01


def wrap_periodic(positions: np.ndarray, extent: float, offset: float = 0.0) -> Tuple[np.ndarray, int]:
    """回绕到 [-L-offset, L-offset)，返回新位置与越界粒子数"""
    lo = -extent - offset
    outside = np.any((positions < -extent) | (positions >= extent), axis=1)
    wrapped = np.mod(positions - lo, 2.0 * extent) + lo
    return wrapped, int(np.count_nonzero(outside))


def interpolate_kernel(components: VectorField, points: np.ndarray) -> np.ndarray:
    """
    网格核在任意点处的多线性插值（周期延拓）

    Returns:
        形状 (K, d) 的矢量值
    """
    grid = components[0].grid
    d, n = grid.d, grid.n_per_axis
    u = (np.mod(points + grid.extent, 2.0 * grid.extent)) / grid.dx
    base = np.floor(u).astype(int)
    frac = u - base
    out = np.zeros((points.shape[0], len(components)))
    for corner in itertools.product((0, 1), repeat=d):
        offsets = np.asarray(corner)
        weight = np.prod(np.where(offsets == 1, frac, 1.0 - frac), axis=1)
        index = tuple(np.mod(base + offsets, n).T)
        for c, component in enumerate(components):
            out[:, c] += weight * component.values[index]
    return out


def pairwise_drift(positions: np.ndarray, components: VectorField, chunk_elements: int = 2_000_000,
                   workers: int = 1) -> np.ndarray:
    """(1/N) Σ_j b(X^i - X^j)，含 j = i 项，按行分块直接求和"""
    N, d = positions.shape
    rows = max(1, chunk_elements // max(1, N * d))
    blocks = [(start, min(N, start + rows)) for start in range(0, N, rows)]

    def block_drift(block: Tuple[int, int]) -> np.ndarray:
        start, stop = block
        displacement = positions[start:stop, None, :] - positions[None, :, :]
        values = interpolate_kernel(components, displacement.reshape(-1, d))
        return values.reshape(stop - start, N, len(components)).mean(axis=1)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(block_drift, blocks))
    else:
        parts = [block_drift(block) for block in blocks]
    return np.concatenate(parts, axis=0)


def step(ens: ParticleEnsemble, cfg: SimConfig) -> ParticleEnsemble:
    """一步欧拉-丸山更新，越界粒子周期回绕并计数"""
    if ens.d != cfg.d:
        raise DataValidationError(f"粒子维度 {ens.d} 与核维度 {cfg.d} 不一致", field_name="d")
    kernel = cfg.kernel
    positions = ens.positions
    max_drift = 0.0
    if not kernel.is_zero:
        drift = pairwise_drift(positions, kernel.at(ens.time), cfg.chunk_elements, cfg.workers)
        max_drift = float(np.max(np.linalg.norm(drift, axis=1)))
        positions = positions + cfg.dt * drift
    noise = sample_step_increments(cfg.law, cfg.dt, ens.N, ens.d, ens.seed, ens.step_index + 1)
    moved, wrapped = wrap_periodic(positions + noise, cfg.grid.extent)
    return ens.advance(moved, cfg.dt, wrapped, max_drift)


def _record_steps(cfg: SimConfig, record_times: Optional[Sequence[float]]) -> set:
    if record_times is None:
        return {0, cfg.n_steps}
    return {cfg.step_of(s) for s in record_times}


def simulate(cfg: SimConfig, record_times: Optional[Sequence[float]] = None,
             initial: Optional[ParticleEnsemble] = None) -> ParticleTrajectory:
    """
    运行 cfg.n_steps 步并在 record_times 处记录快照（默认只记录起点与终点）

    固定种子下逐位可复现。
    """
    kernel = cfg.kernel
    reference = cfg.t0 + 0.5 * cfg.dt if kernel.time_dependent else None
    guard = cfl_step(kernel, reference)
    if cfg.dt > guard:
        logger.warning(f"dt={cfg.dt:.3g} 超过 CFL 型上限 0.1·dx/|b^ε|∞ = {guard:.3g}")

    ens = initial if initial is not None else cfg.initial_ensemble()
    wanted = _record_steps(cfg, record_times)
    snapshots = [ens] if 0 in wanted else []
    for k in range(1, cfg.n_steps + 1):
        ens = step(ens, cfg)
        if k in wanted:
            snapshots.append(ens)
    trajectory = ParticleTrajectory(snapshots, cfg.grid, cfg.n_steps, config=cfg)
    if trajectory.flagged:
        logger.warning(f"周期回绕占比 {trajectory.wrap_rate:.2%} 超过 0.1%，重尾逃逸明显，建议增大L")
    logger.info(f"粒子模拟完成: N={cfg.N}, 步数={cfg.n_steps}, 回绕 {trajectory.wraps} 次")
    return trajectory


def empirical_density(ens: ParticleEnsemble, grid: Grid) -> Field:
    """
    以网格节点为中心的直方图，归一为质量1

    Raises:
        ParticleEscapeError: 超过1%的粒子落在 [-L, L)^d 之外
    """
    if ens.d != grid.d:
        raise DataValidationError(f"粒子维度 {ens.d} 与网格维度 {grid.d} 不一致", field_name="grid")
    half = 0.5 * grid.dx
    positions, outside = wrap_periodic(ens.positions, grid.extent, offset=half)
    fraction = outside / ens.N
    if fraction > ESCAPE_LIMIT:
        raise ParticleEscapeError(f"{fraction:.2%} 的粒子落在网格之外，请增大L", fraction=fraction)
    edges = [grid.axis - half for _ in range(grid.d)]
    edges = [np.append(e, e[-1] + grid.dx) for e in edges]
    counts, _ = np.histogramdd(positions, bins=edges)
    return Field(grid, counts / (counts.sum() * grid.cell_volume), tag=f"empirical@s={ens.time:.6g}")


def _run_signature(cfg: Union[SimConfig, SolverConfig]) -> Dict[str, object]:
    """核、磨光尺度、稳定律、初始分布与时间区间"""
    if isinstance(cfg, SimConfig):
        kernel, start, end = cfg.kernel, cfg.t0, cfg.t0 + cfg.horizon
    else:
        kernel, start, end = cfg.drift_kernel, cfg.t, cfg.T
    return {
        "kernel": kernel.spec,
        "epsilon": kernel.epsilon if isinstance(kernel, MollifiedKernel) else None,
        "law": cfg.law,
        "initial": cfg.initial,
        "start": float(start),
        "end": float(end),
    }


def check_run_compatibility(sim_cfg: Union[SimConfig, SolverConfig], fp_cfg: SolverConfig) -> None:
    """
    粒子模拟（或另一次求解）与PDE解必须对应同一个问题

    Raises:
        DataValidationError: 核、ε、稳定律或初始分布不同，起点不同，或模拟时段超出PDE时间网格
    """
    ours, theirs = _run_signature(sim_cfg), _run_signature(fp_cfg)
    for key in ("kernel", "epsilon", "law", "initial"):
        if ours[key] != theirs[key]:
            raise DataValidationError(f"粒子模拟与PDE的 {key} 不一致: {ours[key]!r} != {theirs[key]!r}",
                                      field_name=key)
    if not np.isclose(ours["start"], theirs["start"], rtol=0.0, atol=1e-12):
        raise DataValidationError(f"起始时刻不一致: {ours['start']} != {theirs['start']}", field_name="t0")
    if ours["end"] > theirs["end"] + 1e-9:
        raise DataValidationError(f"模拟终点 {ours['end']:g} 超出PDE区间终点 {theirs['end']:g}",
                                  field_name="horizon")


def compare_to_pde(sim: Union[ParticleTrajectory, DensityTrajectory],
                   fp: DensityTrajectory) -> pd.DataFrame:
    """
    每个共同记录时刻上经验密度与PDE切片的 L¹ 距离

    两侧都带有运行配置时（simulate / picard_solve 的输出），先检查两者描述同一个问题。

    Raises:
        DataValidationError: 网格或运行配置不一致，或记录时刻不在PDE时间网格上
    """
    if sim.grid != fp.grid:
        raise DataValidationError("粒子模拟与PDE使用的网格不一致", field_name="grid")
    if sim.config is not None and fp.config is not None:
        check_run_compatibility(sim.config, fp.config)
    rows = []
    for s in sim.times:
        target = fp.at(s)
        if isinstance(sim, DensityTrajectory):
            density, n = sim.at(s), None
        else:
            snapshot = sim.at(s)
            density, n = empirical_density(snapshot, fp.grid), snapshot.N
        rows.append({"time": float(s), "l1_distance": l1_distance(density, target), "N": n})
    return pd.DataFrame(rows, columns=["time", "l1_distance", "N"])
