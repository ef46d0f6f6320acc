"""
实验配置模型

单个JSON文档，按模块分节；所有节都拒绝未知键，解析 → 序列化 → 解析 为恒等。
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.grid.models import Grid
from src.grid.operations import make_grid
from src.kernels.catalog import realize_kernel
from src.kernels.models import ExponentValue, KernelRealization, KernelSpec
from src.kernels.mollifier import mollify_realization
from src.particles.models import SimConfig
from src.semigroup.models import StableLaw
from src.solver.models import QUADRATURES, InitialLaw, SolverConfig
from src.thresholds.models import ParameterSet
from src.utils.config_manager import get_solver_defaults, get_system_config
from src.utils.exceptions import ConfigurationError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    d: int = Field(1, ge=1, description="空间维度")
    n: int = Field(256, ge=4, description="每个坐标轴的格点数")
    L: float = Field(8.0, gt=0, description="环面半宽，区域为 [-L, L)^d")

    def build(self) -> Grid:
        return make_grid(self.d, self.n, self.L)


class LawSection(_Section):
    alpha: float = Field(2.0, gt=1.0, le=2.0, description="稳定指数")
    mode: Literal["isotropic", "product", "coordinate-product"] = "isotropic"

    def build(self) -> StableLaw:
        return StableLaw(self.alpha, self.mode)


class ParameterSection(_Section):
    """可选的参数覆盖；缺省时由核的声明函数类给出"""
    beta: Optional[float] = None
    p: Optional[ExponentValue] = None
    q: Optional[ExponentValue] = None
    r: Optional[ExponentValue] = None


class SolverSection(_Section):
    t: float = 0.0
    T: float = 0.25
    time_nodes: int = Field(default_factory=lambda: get_solver_defaults().time_nodes, ge=2)
    picard_tol: float = Field(default_factory=lambda: get_solver_defaults().picard_tol, gt=0)
    picard_max: int = Field(default_factory=lambda: get_solver_defaults().picard_max, ge=1)
    quadrature: str = Field(default_factory=lambda: get_solver_defaults().quadrature)
    epsilon: Optional[float] = Field(None, gt=0, description="磨光尺度，None 表示直接采样核")
    eps_list: List[float] = Field(default_factory=list, description="ε稳定性研究的递减序列")
    vartheta: float = Field(0.5, ge=0, lt=1)
    rbar: Optional[ExponentValue] = None
    horizons: List[float] = Field(default_factory=list, description="先验范数扫描的时间跨度")
    override_thresholds: bool = False
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "SolverSection":
        if not self.T > self.t:
            raise ValueError(f"要求 T > t, 得到 t={self.t}, T={self.T}")
        if self.quadrature not in QUADRATURES:
            raise ValueError(f"未知求积规则: {self.quadrature}")
        return self


class ParticleSection(_Section):
    enabled: bool = True
    N: int = Field(10_000, ge=2)
    dt: float = Field(0.01, gt=0)
    horizon: Optional[float] = Field(None, gt=0, description="缺省为求解器的 T - t")
    l1_budget: float = Field(0.1, gt=0, description="与PDE比较时 L¹ 距离的工程预算")
    workers: int = Field(1, ge=1)


class PeanoConfig(_Section):
    """扰动Peano动力学 dx = sgn(x)|x|^β ds + ε d𝒲"""
    alpha: float = Field(2.0, gt=1.0, le=2.0)
    beta: float = Field(-0.5, gt=-1.0, lt=0.0)
    eps: float = Field(0.0, ge=0)
    x0: float = 0.0
    paths: int = Field(1000, ge=1)
    dt: float = Field(1e-3, gt=0)
    horizon: float = Field(1.0, gt=0)
    seed: int = Field(0, ge=0)
    betas: List[float] = Field(default_factory=list, description="β 扫描点")

    @model_validator(mode="after")
    def _check_betas(self) -> "PeanoConfig":
        for beta in self.betas:
            if not -1.0 < beta < 0.0:
                raise ValueError(f"扫描点 β={beta} 不在 (-1, 0) 内")
        return self


class SweepSection(_Section):
    """(α, β) 平面上的阈值扫描，(p, q, r, d) 固定"""
    alpha_min: float = Field(1.05, gt=1.0, le=2.0)
    alpha_max: float = Field(2.0, gt=1.0, le=2.0)
    alpha_points: int = Field(20, ge=2)
    beta_min: float = Field(-1.0, ge=-1.0, le=0.0)
    beta_max: float = Field(0.0, ge=-1.0, le=0.0)
    beta_points: int = Field(21, ge=2)
    p: ExponentValue = "inf"
    q: ExponentValue = "inf"
    r: ExponentValue = "inf"
    d: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)


class ExperimentConfig(_Section):
    experiment_id: str = "experiment"
    seed: int = Field(0, ge=0)
    output_dir: str = Field(default_factory=lambda: get_system_config().output_dir)
    grid: GridSection = Field(default_factory=GridSection)
    law: LawSection = Field(default_factory=LawSection)
    kernel: KernelSpec = Field(default_factory=lambda: KernelSpec(family="zero"))
    initial: InitialLaw = Field(default_factory=InitialLaw)
    parameters: Optional[ParameterSection] = None
    solver: SolverSection = Field(default_factory=SolverSection)
    particles: Optional[ParticleSection] = None
    peano: Optional[PeanoConfig] = None
    sweep: Optional[SweepSection] = None

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def parameter_set(self) -> ParameterSet:
        claimed = self.kernel.claimed_class
        override = self.parameters or ParameterSection()
        pick = lambda value, default: default if value is None else value
        return ParameterSet(self.law.alpha, pick(override.beta, claimed.beta), pick(override.p, claimed.p),
                            pick(override.q, claimed.q), pick(override.r, claimed.r), self.grid.d)

    def build_kernel(self) -> KernelRealization:
        """网格上的核，配置了 ε 时为磨光核"""
        realization = realize_kernel(self.kernel, self.grid.build())
        if self.solver.epsilon is None:
            return realization
        return mollify_realization(realization, self.solver.epsilon, self.law.build())

    def build_solver_config(self, epsilon: Union[float, None, str] = "config",
                            override: Optional[bool] = None, T: Optional[float] = None,
                            kernel: Optional[KernelRealization] = None) -> SolverConfig:
        """kernel 给定时直接使用该网格实现（不再磨光）"""
        s = self.solver
        if kernel is not None:
            epsilon = None
        return SolverConfig(
            grid=self.grid.build() if kernel is None else kernel.grid,
            law=self.law.build(),
            kernel=self.kernel if kernel is None else kernel,
            initial=self.initial,
            epsilon=s.epsilon if epsilon == "config" else epsilon,
            params=self.parameter_set(),
            t=s.t,
            T=s.T if T is None else T,
            time_nodes=s.time_nodes,
            picard_tol=s.picard_tol,
            picard_max=s.picard_max,
            quadrature=s.quadrature,
            override_thresholds=s.override_thresholds if override is None else override,
            workers=s.workers,
        )

    def build_sim_config(self, solver_cfg: SolverConfig, N: Optional[int] = None,
                         seed: Optional[int] = None) -> SimConfig:
        section = self.particles or ParticleSection()
        return SimConfig(
            N=section.N if N is None else N,
            dt=section.dt,
            horizon=section.horizon or (solver_cfg.T - solver_cfg.t),
            law=solver_cfg.law,
            kernel=solver_cfg.drift_kernel,
            seed=self.seed if seed is None else seed,
            initial=self.initial,
            t0=solver_cfg.t,
            workers=section.workers,
        )


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    读取并校验JSON配置

    Raises:
        ConfigurationError: 文件不存在、不是合法JSON或不满足模式
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"无法读取配置文件 {path}: {e}") from e
    try:
        return ExperimentConfig.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"配置文件 {path} 不是合法JSON: {e}") from e
    except ValidationError as e:
        raise ConfigurationError(f"配置文件 {path} 校验失败:\n{e}") from e


def save_experiment_config(cfg: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cfg.to_json(), encoding="utf-8")
    return path
