"""
Fokker-Planck求解器的数据模型
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field as PydanticField, PrivateAttr, model_validator

from src.besov.models import BesovIndex, ThermicSettings
from src.besov.norms import besov_norm
from src.grid.models import Field, Grid
from src.grid.operations import l1_distance
from src.kernels.catalog import realize_kernel
from src.kernels.models import KernelRealization, KernelSpec
from src.kernels.mollifier import mollify_realization
from src.semigroup.models import StableLaw
from src.thresholds.calculator import check_weak
from src.thresholds.models import ParameterSet
from src.utils.config_manager import get_numerics_config, get_solver_defaults
from src.utils.exceptions import DataValidationError, ThresholdGateError

logger = logging.getLogger(__name__)

QUADRATURES = ("midpoint", "left", "product")


class InitialLaw(BaseModel):
    """
    初始分布 μ

    point_mass: 单格单位质量；gaussian: N(mean, variance·I)；uniform_box: 以mean为中心、
    半宽half_width的盒子；atoms: 加权原子（smear>0 时为高斯涂抹）；custom: 任意非负Field。
    """
    model_config = ConfigDict(extra="forbid")

    kind: Literal["point_mass", "gaussian", "uniform_box", "atoms", "custom"] = "gaussian"
    mean: Union[float, List[float]] = 0.0
    variance: float = PydanticField(0.25, gt=0)
    half_width: float = PydanticField(1.0, gt=0)
    atoms: List[List[float]] = PydanticField(default_factory=list)
    weights: List[float] = PydanticField(default_factory=list)
    smear: float = PydanticField(0.0, ge=0)

    _custom: Optional[Field] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_atoms(self) -> "InitialLaw":
        if self.kind == "atoms":
            if not self.atoms:
                raise ValueError("atoms 类型至少需要一个原子")
            if self.weights and len(self.weights) != len(self.atoms):
                raise ValueError("weights 与 atoms 长度不一致")
            if self.weights and (min(self.weights) < 0 or sum(self.weights) <= 0):
                raise ValueError("原子权重必须非负且和为正")
        return self

    @classmethod
    def from_field(cls, f: Field) -> "InitialLaw":
        law = cls(kind="custom")
        law._custom = f
        return law

    def mean_vector(self, d: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.mean, dtype=float), (d,)).copy()

    def atom_weights(self) -> np.ndarray:
        w = np.asarray(self.weights if self.weights else [1.0] * len(self.atoms), dtype=float)
        return w / w.sum()

    def atom_laws(self) -> List["InitialLaw"]:
        """每个原子对应的单点初始分布"""
        kind = "gaussian" if self.smear > 0 else "point_mass"
        return [InitialLaw(kind=kind, mean=list(a), variance=self.smear or 0.25) for a in self.atoms]

    @staticmethod
    def _nearest_cell(grid: Grid, point: np.ndarray) -> tuple:
        return tuple(int(np.rint((x + grid.extent) / grid.dx)) % grid.n_per_axis for x in point)

    def as_field(self, grid: Grid) -> Field:
        """离散质量为1的非负Field"""
        d = grid.d
        if self.kind == "point_mass":
            return Field.delta(grid, self._nearest_cell(grid, self.mean_vector(d)), tag="mu")
        if self.kind == "gaussian":
            values = Field.gaussian(grid, self.variance, self.mean_vector(d)).values
        elif self.kind == "uniform_box":
            inside = np.ones(grid.shape, dtype=bool)
            for x, m in zip(grid.coordinates, self.mean_vector(d)):
                inside &= np.abs(x - m) <= self.half_width
            values = inside.astype(float)
        elif self.kind == "atoms":
            values = np.zeros(grid.shape)
            for w, atom in zip(self.atom_weights(), self.atoms):
                point = np.broadcast_to(np.asarray(atom, dtype=float), (d,))
                if self.smear > 0:
                    bump = Field.gaussian(grid, self.smear, point).values
                    values += w * bump / (bump.sum() * grid.cell_volume)
                else:
                    values[self._nearest_cell(grid, point)] += w / grid.cell_volume
            return Field(grid, values, tag="mu")
        else:
            if self._custom is None:
                raise DataValidationError("custom 初始分布缺少 Field", field_name="custom")
            if self._custom.grid != grid:
                raise DataValidationError("custom 初始分布的网格与求解网格不一致", field_name="grid")
            values = self._custom.values
        if np.min(values) < 0:
            raise DataValidationError("初始分布必须非负", field_name="initial")
        mass = values.sum() * grid.cell_volume
        if mass <= 0:
            raise DataValidationError("初始分布在网格上的质量为零，请检查 mean/half_width",
                                      field_name="initial")
        return Field(grid, values / mass, tag="mu")

    def sample(self, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
        """抽取 n 个 d 维初始位置"""
        mean = self.mean_vector(d)
        if self.kind == "point_mass":
            return np.tile(mean, (n, 1))
        if self.kind == "gaussian":
            return mean + math.sqrt(self.variance) * rng.standard_normal((n, d))
        if self.kind == "uniform_box":
            return rng.uniform(mean - self.half_width, mean + self.half_width, size=(n, d))
        if self.kind == "atoms":
            atoms = np.array([np.broadcast_to(np.asarray(a, dtype=float), (d,)) for a in self.atoms])
            picks = rng.choice(len(atoms), size=n, p=self.atom_weights())
            positions = atoms[picks]
            if self.smear > 0:
                positions = positions + math.sqrt(self.smear) * rng.standard_normal((n, d))
            return positions
        if self._custom is None:
            raise DataValidationError("custom 初始分布缺少 Field", field_name="custom")
        grid = self._custom.grid
        if grid.d != d:
            raise DataValidationError("custom 初始分布维度与采样维度不一致", field_name="d")
        weights = np.clip(self._custom.values.ravel(), 0.0, None)
        cells = rng.choice(weights.size, size=n, p=weights / weights.sum())
        index = np.array(np.unravel_index(cells, grid.shape)).T
        return -grid.extent + grid.dx * (index + rng.uniform(-0.5, 0.5, size=(n, d)))


@dataclass
class SolverConfig:
    """
    Picard求解器配置

    kernel 为 KernelSpec 时按 epsilon 磨光（epsilon=None 则直接在网格上采样）；
    params=None 时由稳定律与核的声明函数类推出。
    """
    grid: Grid
    law: StableLaw
    kernel: Union[KernelSpec, KernelRealization]
    initial: InitialLaw = field(default_factory=InitialLaw)
    epsilon: Optional[float] = None
    params: Optional[ParameterSet] = None
    t: float = 0.0
    T: float = 1.0
    time_nodes: int = field(default_factory=lambda: get_solver_defaults().time_nodes)
    picard_tol: float = field(default_factory=lambda: get_solver_defaults().picard_tol)
    picard_max: int = field(default_factory=lambda: get_solver_defaults().picard_max)
    quadrature: str = field(default_factory=lambda: get_solver_defaults().quadrature)
    override_thresholds: bool = False
    workers: int = 1

    def __post_init__(self):
        self.law.require_subcritical()
        if not self.T > self.t:
            raise DataValidationError(f"要求 T > t, 得到 t={self.t}, T={self.T}",
                                      field_name="T", expected_format="T > t")
        if self.time_nodes < 2:
            raise DataValidationError("时间节点数至少为2", field_name="time_nodes")
        if self.quadrature not in QUADRATURES:
            raise DataValidationError(f"未知求积规则: {self.quadrature}", field_name="quadrature",
                                      expected_format=" | ".join(QUADRATURES))
        if self.params is None:
            spec = self.kernel_spec
            p, q, r = spec.claimed_class.exponents()
            self.params = ParameterSet(self.law.alpha, spec.claimed_class.beta, p, q, r, self.grid.d)
        self.gate()

    @property
    def kernel_spec(self) -> KernelSpec:
        return self.kernel if isinstance(self.kernel, KernelSpec) else self.kernel.spec

    def gate(self):
        """弱适定性闸门: 不满足 (Γ > 0) 时拒绝，除非设置了覆盖标志"""
        report = check_weak(self.params)
        if not report.weak_ok:
            if not self.override_thresholds:
                raise ThresholdGateError(
                    f"参数不满足弱适定性条件 (Γ = {float(report.gamma_gap):.4g} <= 0): "
                    f"{self.params.describe()}", report=report)
            logger.warning(f"探索模式: 参数违反弱适定性条件 (Γ = {float(report.gamma_gap):.4g})，"
                           f"收敛性不作保证")
        return report

    @cached_property
    def drift_kernel(self) -> KernelRealization:
        realization = self.kernel if isinstance(self.kernel, KernelRealization) \
            else realize_kernel(self.kernel, self.grid)
        if self.epsilon is not None and isinstance(self.kernel, KernelSpec):
            realization = mollify_realization(realization, self.epsilon, self.law)
        return realization

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t, self.T, self.time_nodes + 1)

    @property
    def step(self) -> float:
        return (self.T - self.t) / self.time_nodes

    def evolve(self, **changes) -> "SolverConfig":
        """复制配置并替换部分字段（重新做闸门检查）"""
        return dataclasses.replace(self, **changes)


@dataclass
class DensityTrajectory:
    """s ↦ ρ(s,·) 在时间网格 t = s₀ < … < s_M = T 上的切片"""
    times: np.ndarray
    slices: List[Field]
    # 由 picard_solve 记录的求解配置
    config: Optional[SolverConfig] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.slices):
            raise DataValidationError("时间节点数与切片数不一致", field_name="slices")

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def grid(self) -> Grid:
        return self.slices[0].grid

    def index_of(self, s: float) -> int:
        matches = np.flatnonzero(np.isclose(self.times, s, rtol=0.0, atol=1e-12 * max(1.0, abs(s))))
        if matches.size == 0:
            raise DataValidationError(f"时间 s={s} 不是轨迹的节点", field_name="s")
        return int(matches[0])

    def at(self, s: float) -> Field:
        return self.slices[self.index_of(s)]

    def masses(self) -> np.ndarray:
        return np.array([f.mass() for f in self.slices])

    def minima(self) -> np.ndarray:
        return np.array([f.minimum() for f in self.slices])

    def sup_l1_distance(self, other: "DensityTrajectory") -> float:
        if len(other) != len(self) or not np.allclose(other.times, self.times):
            raise DataValidationError("两条轨迹的时间网格不一致", field_name="times")
        return max(l1_distance(a, b) for a, b in zip(self.slices, other.slices))

    def l1_increments(self, other: "DensityTrajectory") -> np.ndarray:
        return np.array([l1_distance(a, b) for a, b in zip(self.slices, other.slices)])

    def diagnostics(self, law: Optional[StableLaw] = None,
                    norm_indices: Sequence[BesovIndex] = (),
                    ts: Optional[ThermicSettings] = None) -> pd.DataFrame:
        """每个切片的质量、最小值与所选Besov范数"""
        frame = pd.DataFrame({
            "slice": np.arange(len(self)),
            "time": self.times,
            "mass": self.masses(),
            "min": self.minima(),
        })
        for idx in norm_indices:
            if law is None:
                raise DataValidationError("计算Besov范数需要稳定律", field_name="law")
            frame[f"norm_{idx.label()}"] = [besov_norm(f, idx, law, ts) for f in self.slices]
        return frame

    def check_invariants(self, mass_tol: float = 1e-6,
                         neg_tol: Optional[float] = None) -> Dict[str, object]:
        """质量守恒与负值下冲（只报告，不截断）"""
        neg_tol = get_numerics_config().neg_tol if neg_tol is None else neg_tol
        masses, minima = self.masses(), self.minima()
        mass_error = float(np.max(np.abs(masses - 1.0)))
        worst_min = float(np.min(minima))
        result = {
            "mass_ok": mass_error <= mass_tol,
            "max_mass_error": mass_error,
            "negativity_ok": worst_min >= -neg_tol,
            "min_value": worst_min,
        }
        if not result["mass_ok"]:
            logger.warning(f"质量守恒偏差 {mass_error:.3e} 超过 {mass_tol:.1e}")
        if not result["negativity_ok"]:
            logger.warning(f"密度负值下冲 {worst_min:.3e} 低于 -{neg_tol:.1e}，分辨率可能不足")
        return result


@dataclass
class PicardResult:
    """Picard迭代结果与收敛日志"""
    trajectory: DensityTrajectory
    increments: List[float]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.increments)

    def convergence_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iteration": np.arange(1, self.iterations + 1),
                             "increment": np.asarray(self.increments, dtype=float)})

    def contraction_ratios(self) -> np.ndarray:
        inc = np.asarray(self.increments, dtype=float)
        if inc.size < 2:
            return np.array([])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = inc[1:] / inc[:-1]
        return ratios[np.isfinite(ratios)]
