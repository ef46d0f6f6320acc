"""
稳定律模型
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.grid.models import Grid
from src.utils.exceptions import DataValidationError

StableMode = Literal["isotropic", "product", "coordinate-product"]
STABLE_MODES = ("isotropic", "product")
# 模式别名，构造时归一化
MODE_ALIASES = {"coordinate-product": "product"}


@dataclass(frozen=True)
class StableLaw:
    """
    对称α-稳定律

    isotropic: 符号 |ξ|^α
    product:   符号 Σ_i |ξ_i|^α（各坐标独立的一维对称稳定过程）
    coordinate-product 为 product 的别名
    """
    alpha: float
    mode: StableMode = "isotropic"

    def __post_init__(self):
        object.__setattr__(self, "mode", MODE_ALIASES.get(self.mode, self.mode))
        if not (0.0 < float(self.alpha) <= 2.0):
            raise DataValidationError(f"稳定指数α必须在(0,2]内, 得到 {self.alpha}",
                                      field_name="alpha", expected_format="(0, 2]")
        if self.mode not in STABLE_MODES:
            raise DataValidationError(f"未知稳定律模式: {self.mode}",
                                      field_name="mode", expected_format=" | ".join(STABLE_MODES))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def is_gaussian(self) -> bool:
        return self.alpha == 2.0

    def symbol(self, grid: Grid) -> np.ndarray:
        """生成元的符号 σ(ξ)，半群乘子为 e^{-tσ(ξ)}"""
        if self.mode == "isotropic" or grid.d == 1:
            return grid.wavenumber ** self.alpha
        return sum(np.abs(k) ** self.alpha for k in grid.wavevectors)

    def multiplier(self, grid: Grid, t: float) -> np.ndarray:
        return np.exp(-t * self.symbol(grid))

    def require_subcritical(self) -> "StableLaw":
        """求解器与粒子模拟要求 α ∈ (1, 2]"""
        if not self.alpha > 1.0:
            raise DataValidationError(f"求解器与粒子模拟要求α ∈ (1,2], 得到 {self.alpha}",
                                      field_name="alpha", expected_format="(1, 2]")
        return self

    def describe(self) -> str:
        return f"StableLaw(alpha={self.alpha}, mode={self.mode})"
