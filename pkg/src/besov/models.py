"""
Besov指标、热型积分设置与不等式报告
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.grid.models import Grid
from src.grid.operations import Exponent, conjugate_exponent, parse_exponent
from src.semigroup.models import StableLaw
from src.utils.config_manager import get_numerics_config
from src.utils.exceptions import DataValidationError, ResolutionError
from src.utils.serialization import serialize_report


@dataclass(frozen=True)
class BesovIndex:
    """B^γ_{ℓ,m} 的指标"""
    gamma: float
    ell: Exponent = math.inf
    m: Exponent = math.inf

    def __post_init__(self):
        ell, m = parse_exponent(self.ell), parse_exponent(self.m)
        for name, value in (("ell", ell), ("m", m)):
            if not value >= 1.0:
                raise DataValidationError(f"Besov指标 {name} 必须 >= 1, 得到 {value}",
                                          field_name=name, expected_format="[1, ∞]")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "m", m)

    def dual(self) -> "BesovIndex":
        """(-γ, ℓ', m')"""
        return BesovIndex(-self.gamma, conjugate_exponent(self.ell), conjugate_exponent(self.m))

    def with_gamma(self, gamma: float) -> "BesovIndex":
        return BesovIndex(gamma, self.ell, self.m)

    def label(self) -> str:
        fmt = lambda x: "inf" if math.isinf(x) else f"{x:g}"
        return f"B^{self.gamma:g}_{{{fmt(self.ell)},{fmt(self.m)}}}"


@dataclass
class ThermicSettings:
    """
    热型刻画的求积设置

    n=None 时自动选择 n = 0 (γ<0) 或 ⌊γ/α⌋+1 (γ>=0)；
    v_min=None 时取网格分辨率下限 (2·dx)^α。
    """
    n: Optional[int] = None
    v_nodes: int = field(default_factory=lambda: get_numerics_config().thermic_nodes)
    v_min: Optional[float] = None
    phi_radius: float = field(default_factory=lambda: get_numerics_config().phi_radius)
    workers: int = 1

    def __post_init__(self):
        if self.v_nodes < 2:
            raise DataValidationError("热型求积至少需要2个节点", field_name="v_nodes")
        if self.phi_radius <= 0:
            raise DataValidationError("低频窗口半径必须 > 0", field_name="phi_radius")
        if self.n is not None and (int(self.n) != self.n or self.n < 0):
            raise DataValidationError(f"导数阶数必须为非负整数, 得到 {self.n}", field_name="n")

    def resolve_n(self, idx: BesovIndex, law: StableLaw) -> int:
        if self.n is None:
            n = 0 if idx.gamma < 0 else int(math.floor(idx.gamma / law.alpha)) + 1
        else:
            n = int(self.n)
        if not n > idx.gamma / law.alpha:
            raise DataValidationError(
                f"热导数阶数 n={n} 必须严格大于 γ/α = {idx.gamma / law.alpha:.4g}",
                field_name="n", expected_format="n > γ/α")
        return n

    def resolve_v_min(self, grid: Grid, law: StableLaw) -> float:
        floor = grid.resolution_floor(law.alpha)
        v_min = floor if self.v_min is None else float(self.v_min)
        if v_min >= 1.0:
            raise ResolutionError(f"网格过粗: v_min={v_min:.3e} >= 1，热型积分区间为空",
                                  value=v_min, floor=floor)
        return v_min

    def v_grid(self, grid: Grid, law: StableLaw) -> np.ndarray:
        return np.geomspace(self.resolve_v_min(grid, law), 1.0, self.v_nodes)

    def refined(self, factor: int = 2) -> "ThermicSettings":
        return ThermicSettings(self.n, self.v_nodes * factor, self.v_min, self.phi_radius, self.workers)


@dataclass
class InequalityRecord:
    """族中单个成员的测量结果"""
    family_id: Union[int, str]
    ratio: float
    lhs: float
    rhs: float
    parameters: Dict[str, Any] = field(default_factory=dict)


@dataclass
class InequalityReport:
    """
    函数不等式的测量报告

    ratio 为最近一次记录的 lhs/rhs；fitted_constant 为族上的最大比值（经验常数）。
    """
    name: str
    records: List[InequalityRecord] = field(default_factory=list)
    fitted_slope: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.records[-1].ratio if self.records else 0.0

    @property
    def fitted_constant(self) -> float:
        return max((r.ratio for r in self.records), default=0.0)

    @property
    def family_size(self) -> int:
        return len(self.records)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records])

    @property
    def witnesses(self) -> List[InequalityRecord]:
        """比值最大的成员（并列时全部返回）"""
        if not self.records:
            return []
        worst = self.fitted_constant
        return [r for r in self.records if r.ratio == worst]

    def record(self, lhs: float, rhs: float, family_id=None, **parameters) -> InequalityRecord:
        if rhs == 0.0:
            if lhs != 0.0:
                raise DataValidationError(f"{self.name}: 右端为零而左端非零", field_name="rhs")
            ratio = 0.0
        else:
            ratio = abs(lhs) / rhs
        entry = InequalityRecord(family_id if family_id is not None else len(self.records),
                                 float(ratio), float(lhs), float(rhs), parameters)
        self.records.append(entry)
        return entry

    def extend(self, other: "InequalityReport") -> "InequalityReport":
        self.records.extend(other.records)
        return self

    def to_frame(self) -> pd.DataFrame:
        rows = [{
            "family_id": r.family_id,
            "ratio": r.ratio,
            "parameters": json.dumps(serialize_report(r.parameters), sort_keys=True),
        } for r in self.records]
        return pd.DataFrame(rows, columns=["family_id", "ratio", "parameters"])

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        return path

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ratio": self.ratio,
            "fitted_constant": self.fitted_constant,
            "family_size": self.family_size,
            "fitted_slope": self.fitted_slope,
        }
