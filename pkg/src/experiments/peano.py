"""
扰动Peano动力学的噪声正则化实验

dx^ε = sgn(x^ε)|x^ε|^β ds + ε d𝒲，β ∈ (-1, 0)。
ε = 0 时从 0 出发的极大解为 ±c_β s^{1/(1-β)}，c_β = (1-β)^{1/(1-β)}；
噪声尺度 s^{1/α} 压过该包络当且仅当 β > 1 - α。
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.experiments.config import PeanoConfig
from src.particles.sampling import sample_step_increments
from src.semigroup.models import StableLaw
from src.utils.exceptions import DataValidationError

logger = logging.getLogger(__name__)

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def peano_drift(x: np.ndarray, beta: float) -> np.ndarray:
    """sgn(x)|x|^β，约定 x = 0 处为 0"""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nonzero = x != 0.0
    out[nonzero] = np.sign(x[nonzero]) * np.abs(x[nonzero]) ** beta
    return out


def envelope_constant(beta: float) -> float:
    return (1.0 - beta) ** (1.0 / (1.0 - beta))


def maximal_solution(s, beta: float) -> np.ndarray:
    """c_β s^{1/(1-β)}"""
    return envelope_constant(beta) * np.asarray(s, dtype=float) ** (1.0 / (1.0 - beta))


def noise_threshold(alpha: float) -> float:
    """β > 1 - α 时噪声尺度主导"""
    return 1.0 - alpha


@dataclass
class PeanoReport:
    """单个 (α, β, ε) 的实验结果"""
    alpha: float
    beta: float
    eps: float
    horizon: float
    mode: str
    final_values: np.ndarray = field(repr=False)
    envelope: Optional[float] = None
    relative_error: Optional[float] = None
    tracking: Optional[pd.DataFrame] = field(default=None, repr=False)
    spread: Optional[float] = None
    occupancy: Optional[float] = None

    @property
    def above_threshold(self) -> bool:
        return self.beta > noise_threshold(self.alpha)

    def law_frame(self) -> pd.DataFrame:
        """x_T 的经验分位数"""
        values = np.quantile(self.final_values, QUANTILES)
        return pd.DataFrame({"quantile": QUANTILES, "x_T": values})

    def to_row(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "eps": self.eps,
            "threshold": noise_threshold(self.alpha),
            "above_threshold": self.above_threshold,
            "spread": self.spread,
            "occupancy": self.occupancy,
            "median_abs": float(np.median(np.abs(self.final_values))),
            "relative_error": self.relative_error,
        }


def _deterministic(cfg: PeanoConfig, steps: int) -> PeanoReport:
    x = float(cfg.x0)
    record_every = max(1, steps // 100)
    times, values = [0.0], [x]
    for k in range(1, steps + 1):
        x = x + cfg.dt * float(peano_drift(np.array([x]), cfg.beta)[0])
        if k % record_every == 0 or k == steps:
            times.append(k * cfg.dt)
            values.append(x)
    times, values = np.array(times), np.array(values)
    tracking = pd.DataFrame({
        "time": times,
        "x": values,
        "envelope": np.sign(cfg.x0) * maximal_solution(times, cfg.beta),
    })
    report = PeanoReport(cfg.alpha, cfg.beta, 0.0, cfg.horizon, "deterministic",
                         final_values=np.array([x]), tracking=tracking)
    if cfg.x0 != 0.0:
        target = float(np.sign(cfg.x0) * maximal_solution(cfg.horizon, cfg.beta))
        report.envelope = target
        report.relative_error = abs(x - target) / abs(target)
        logger.info(f"Peano ε=0: x_T={x:.6g}, 包络 {target:.6g}, 相对误差 {report.relative_error:.2e}")
    else:
        logger.info("Peano ε=0 从 0 出发: 欧拉解停留在 0")
    return report


def _noisy(cfg: PeanoConfig, steps: int) -> PeanoReport:
    law = StableLaw(cfg.alpha)
    x = np.full(cfg.paths, float(cfg.x0))
    for k in range(1, steps + 1):
        noise = sample_step_increments(law, cfg.dt, cfg.paths, 1, cfg.seed, k)[:, 0]
        x = x + cfg.dt * peano_drift(x, cfg.beta) + cfg.eps * noise
    if not np.all(np.isfinite(x)):
        raise DataValidationError("Peano路径出现非有限值，请减小 dt", field_name="dt")
    scale = cfg.eps * cfg.horizon ** (1.0 / cfg.alpha)
    spread = float(np.median(np.abs(x)) / scale)
    occupancy = float(np.mean(x > 0))
    logger.info(f"Peano β={cfg.beta:g}, ε={cfg.eps:g}: 散布统计 S={spread:.3f}, P(x_T>0)={occupancy:.3f}")
    return PeanoReport(cfg.alpha, cfg.beta, cfg.eps, cfg.horizon, "noisy", final_values=x,
                       spread=spread, occupancy=occupancy)


def run_peano(cfg: PeanoConfig) -> PeanoReport:
    """
    ε = 0: 单条欧拉ODE轨迹与极大解包络的比较；
    ε > 0: P 条带α稳定噪声的路径，报告 x_T 的经验分布、散布统计与两侧占有率

    Raises:
        DataValidationError: β 不在 (-1, 0) 内或 horizon 不是 dt 的整数倍
    """
    if not -1.0 < cfg.beta < 0.0:
        raise DataValidationError(f"β 必须在 (-1, 0) 内, 得到 {cfg.beta}", field_name="beta",
                                  expected_format="(-1, 0)")
    ratio = cfg.horizon / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise DataValidationError(f"horizon={cfg.horizon} 不是 dt={cfg.dt} 的整数倍", field_name="dt")
    steps = int(round(ratio))
    if cfg.eps == 0.0:
        return _deterministic(cfg, steps)
    return _noisy(cfg, steps)


def run_peano_sweep(cfg: PeanoConfig, betas: Optional[Sequence[float]] = None,
                    workers: int = 1) -> pd.DataFrame:
    """
    跨越 β = 1 - α 的扫描；描述性结果，不做通过/失败判断

    attrs['spread_monotone'] 记录 S(β) 是否随 β 单调。
    """
    betas = list(betas if betas is not None else cfg.betas)
    if not betas:
        betas = list(np.linspace(-0.9, -0.1, 9))
    cells = [cfg.model_copy(update={"beta": float(b)}) for b in sorted(betas)]
    for cell in cells:
        if not -1.0 < cell.beta < 0.0:
            raise DataValidationError(f"β 必须在 (-1, 0) 内, 得到 {cell.beta}", field_name="betas")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(run_peano, cells))
    else:
        reports = [run_peano(cell) for cell in cells]
    frame = pd.DataFrame([r.to_row() for r in reports])
    spread = frame["spread"].to_numpy(dtype=float)
    finite = spread[np.isfinite(spread)]
    diffs = np.diff(finite)
    frame.attrs["spread_monotone"] = bool(finite.size >= 2 and (np.all(diffs >= 0) or np.all(diffs <= 0)))
    return frame
