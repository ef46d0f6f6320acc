"""
相互作用核的配置模型与网格实现
"""

import math
from dataclasses import dataclass, field
from typing import Annotated, Callable, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field as PydanticField, model_validator

from src.grid.models import Grid
from src.grid.operations import VectorField, parse_exponent, vector_lp_norm
from src.utils.exceptions import DataValidationError

KernelFamily = Literal["power", "grad_holder", "smooth_bump", "constant", "zero"]
SINGULAR_FAMILIES = ("power", "grad_holder")


def _normalize_exponent(value):
    """∞ 统一序列化为字符串 'inf'，保证 JSON 往返"""
    parsed = parse_exponent(value)
    if math.isinf(parsed):
        return "inf"
    if parsed < 1.0:
        raise ValueError(f"指数必须在 [1, ∞] 内, 得到 {value}")
    return parsed


ExponentValue = Annotated[Union[Literal["inf"], float], BeforeValidator(_normalize_exponent)]


class ClaimedClass(BaseModel):
    """核所属的函数类 b ∈ L^r((t,T], B^β_{p,q})"""
    model_config = ConfigDict(extra="forbid")

    beta: float = PydanticField(0.0, description="空间正则性指标 β")
    p: ExponentValue = "inf"
    q: ExponentValue = "inf"
    r: ExponentValue = "inf"

    def exponents(self) -> Tuple[float, float, float]:
        return parse_exponent(self.p), parse_exponent(self.q), parse_exponent(self.r)


class KernelSpec(BaseModel):
    """相互作用核规格"""
    model_config = ConfigDict(extra="forbid")

    family: KernelFamily = PydanticField(..., description="核族")
    beta: float = PydanticField(0.0, description="名义正则性 β")
    amplitude: float = PydanticField(1.0, description="幅度")
    vector: Optional[List[float]] = PydanticField(None, description="constant族的常矢量")
    width: float = PydanticField(1.0, gt=0, description="smooth_bump族的宽度")
    seed: int = PydanticField(0, ge=0, description="grad_holder族合成所用的随机种子")
    time_profile: Literal["constant", "power"] = "constant"
    theta: float = PydanticField(0.0, ge=0, lt=1, description="时间调制 (s-t0)^{-θ} 的指数")
    t0: float = PydanticField(0.0, description="时间调制的奇点")
    claimed_class: Optional[ClaimedClass] = None

    @model_validator(mode="after")
    def _check_family(self) -> "KernelSpec":
        if self.family in SINGULAR_FAMILIES and not -1.0 < self.beta <= 0.0:
            raise ValueError(f"奇异核族 {self.family} 要求 β ∈ (-1, 0], 得到 {self.beta}")
        if self.claimed_class is None:
            beta = self.beta if self.family in SINGULAR_FAMILIES else 0.0
            self.claimed_class = ClaimedClass(beta=beta)
        if self.time_profile == "power":
            r = parse_exponent(self.claimed_class.r)
            if not self.theta > 0.0:
                raise ValueError("power 时间调制要求 θ > 0")
            if not self.theta * r < 1.0:
                raise ValueError(f"时间调制 (s-t0)^{{-θ}} 要求 θ·r < 1, 得到 θ={self.theta}, r={r}")
        return self

    def modulation(self, s: float) -> float:
        """时间调制 g(s)"""
        if self.time_profile == "constant":
            return 1.0
        if s <= self.t0:
            raise DataValidationError(f"时间调制在 s={s} <= t0={self.t0} 处无定义",
                                      field_name="s", expected_format="s > t0")
        return (s - self.t0) ** (-self.theta)


@dataclass(frozen=True)
class KernelRealization:
    """核在网格上的实现 b(s,x) = g(s)·b₀(x)"""
    spec: KernelSpec
    components: VectorField
    modulation: Callable[[float], float] = field(repr=False, default=lambda s: 1.0)

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    @property
    def time_dependent(self) -> bool:
        return self.spec.time_profile != "constant"

    @property
    def is_zero(self) -> bool:
        return all(not np.any(c.values) for c in self.components)

    def at(self, s: float) -> VectorField:
        if not self.time_dependent:
            return self.components
        scale = self.modulation(s)
        return tuple(c * scale for c in self.components)

    def sup_norm(self, s: Optional[float] = None) -> float:
        return vector_lp_norm(self.components if s is None else self.at(s), math.inf)


@dataclass(frozen=True)
class MollifiedKernel(KernelRealization):
    """b^ε = η_ε ⋆_time (p̃^α(ε) ⋆ b)"""
    epsilon: float = 0.0
    gradient_sup_norm: float = 0.0
