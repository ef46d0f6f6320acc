"""
粒子系统的数据模型
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from src.grid.models import Grid
from src.kernels.models import KernelRealization, MollifiedKernel
from src.semigroup.models import StableLaw
from src.solver.models import InitialLaw
from src.utils.exceptions import DataValidationError

logger = logging.getLogger(__name__)

# 无需磨光即有界的核族
BOUNDED_FAMILIES = ("zero", "constant", "smooth_bump")
MAX_PARTICLE_DIMENSION = 3
# 周期回绕占比超过该值时标记本次运行
WRAP_FLAG_RATE = 1e-3


@dataclass(frozen=True)
class ParticleEnsemble:
    """N 个粒子在时刻 time 的位置"""
    positions: np.ndarray = field(repr=False)
    time: float
    seed: int
    step_index: int = 0
    wraps: int = 0
    max_drift: float = 0.0

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float, copy=True)
        if positions.ndim == 1:
            positions = positions[:, None]
        if positions.ndim != 2 or positions.shape[0] < 2:
            raise DataValidationError(f"粒子位置必须为 N×d 且 N >= 2, 得到形状 {positions.shape}",
                                      field_name="positions", expected_format="N×d, N >= 2")
        if not np.all(np.isfinite(positions)):
            raise DataValidationError("粒子位置包含NaN/Inf", field_name="positions")
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def advance(self, positions: np.ndarray, dt: float, wrapped: int = 0,
                max_drift: float = 0.0) -> "ParticleEnsemble":
        return replace(self, positions=positions, time=self.time + dt, step_index=self.step_index + 1,
                       wraps=self.wraps + int(wrapped), max_drift=max(self.max_drift, max_drift))

    def permuted(self, order: Sequence[int]) -> "ParticleEnsemble":
        return replace(self, positions=self.positions[np.asarray(order)])


@dataclass
class SimConfig:
    """
    欧拉-丸山粒子模拟配置

    kernel 必须是磨光核 b^ε；zero/constant/smooth_bump 这类本身有界的核可直接使用网格实现。
    """
    N: int
    dt: float
    horizon: float
    law: StableLaw
    kernel: KernelRealization
    seed: int = 0
    initial: InitialLaw = field(default_factory=InitialLaw)
    t0: float = 0.0
    chunk_elements: int = 2_000_000
    workers: int = 1

    def __post_init__(self):
        self.law.require_subcritical()
        if self.N < 2:
            raise DataValidationError(f"粒子数至少为2, 得到 {self.N}", field_name="N")
        if not self.dt > 0 or not self.horizon > 0:
            raise DataValidationError("dt 与 horizon 必须为正", field_name="dt")
        if self.seed < 0 or int(self.seed) != self.seed:
            raise DataValidationError(f"种子必须为非负整数, 得到 {self.seed}", field_name="seed")
        if not isinstance(self.kernel, MollifiedKernel) and self.kernel.spec.family not in BOUNDED_FAMILIES:
            raise DataValidationError(
                f"粒子模拟需要磨光核, 得到未磨光的 {self.kernel.spec.family} 核",
                field_name="kernel", expected_format="MollifiedKernel")
        if self.grid.d > MAX_PARTICLE_DIMENSION:
            raise DataValidationError(f"粒子模拟只支持 d <= {MAX_PARTICLE_DIMENSION}", field_name="d")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise DataValidationError(f"horizon={self.horizon} 不是 dt={self.dt} 的整数倍",
                                      field_name="dt")

    @property
    def grid(self) -> Grid:
        return self.kernel.grid

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def step_of(self, s: float) -> int:
        """时刻 s 对应的步数"""
        k = (s - self.t0) / self.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)) or not 0 <= round(k) <= self.n_steps:
            raise DataValidationError(f"时刻 s={s} 不在模拟时间网格上", field_name="times")
        return int(round(k))

    def initial_ensemble(self) -> ParticleEnsemble:
        rng = np.random.default_rng(np.random.SeedSequence([int(self.seed), 0, 99]))
        return ParticleEnsemble(self.initial.sample(self.N, self.d, rng), self.t0, int(self.seed))


@dataclass
class ParticleTrajectory:
    """若干记录时刻的粒子快照"""
    snapshots: List[ParticleEnsemble]
    grid: Grid
    steps: int
    config: Optional[SimConfig] = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.snapshots])

    @property
    def final(self) -> ParticleEnsemble:
        return self.snapshots[-1]

    @property
    def wraps(self) -> int:
        return self.final.wraps

    @property
    def wrap_rate(self) -> float:
        return self.wraps / max(1, self.steps * self.final.N)

    @property
    def flagged(self) -> bool:
        return self.wrap_rate > WRAP_FLAG_RATE

    def at(self, s: float) -> ParticleEnsemble:
        matches = np.flatnonzero(np.isclose(self.times, s, rtol=0.0, atol=1e-9 * max(1.0, abs(s))))
        if matches.size == 0:
            raise DataValidationError(f"时刻 s={s} 没有记录粒子快照", field_name="s")
        return self.snapshots[int(matches[0])]

    def summary(self) -> dict:
        return {
            "N": self.final.N,
            "steps": self.steps,
            "wraps": self.wraps,
            "wrap_rate": self.wrap_rate,
            "flagged": self.flagged,
            "max_drift": self.final.max_drift,
        }


def drift_bound(kernel: KernelRealization, s: Optional[float] = None) -> float:
    """|b^ε|_{L∞}"""
    return kernel.sup_norm(s)


def cfl_step(kernel: KernelRealization, s: Optional[float] = None) -> float:
    """dt 的建议上限 0.1·dx/|b^ε|_{L∞}"""
    bound = drift_bound(kernel, s)
    return math.inf if bound == 0.0 else 0.1 * kernel.grid.dx / bound
