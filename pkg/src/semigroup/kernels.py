"""
α-稳定热核与半群作用（谱乘子实现）
"""

import logging
from typing import Optional

import numpy as np

from src.grid.models import Field, Grid, SpectralField, field_from_multiplier
from src.semigroup.models import StableLaw
from src.utils.exceptions import DataValidationError, ResolutionError

logger = logging.getLogger(__name__)

# logspace端点的舍入误差不应触发分辨率下限
_FLOOR_SLACK = 1e-9


def _require_positive(t: float, name: str) -> float:
    t = float(t)
    if not np.isfinite(t) or t <= 0.0:
        raise DataValidationError(f"{name} 必须 > 0, 得到 {t}", field_name=name, expected_format="> 0")
    return t


def check_resolution(grid: Grid, t: float, law: StableLaw, name: str = "t") -> float:
    """拒绝小于 (2·dx)^α 的时间：宽度不足两个网格的核无法表示"""
    t = _require_positive(t, name)
    floor = grid.resolution_floor(law.alpha)
    if t < floor * (1.0 - _FLOOR_SLACK):
        raise ResolutionError(
            f"{name}={t:.3e} 低于分辨率下限 (2·dx)^α = {floor:.3e}，请加密网格",
            value=t, floor=floor)
    return t


def derivative_multiplier(grid: Grid, axis: int) -> np.ndarray:
    """iξ_axis，Nyquist处置零以保持实值输出"""
    if not 1 <= axis <= grid.d:
        raise DataValidationError(f"轴编号必须在 1..{grid.d} 内, 得到 {axis}",
                                  field_name="axis", expected_format=f"1..{grid.d}")
    k = grid.wavevectors[axis - 1]
    return np.where(grid.nyquist_mask[axis - 1], 0.0, 1j * k)


def heat_kernel(grid: Grid, t: float, law: StableLaw) -> Field:
    """p^α_t = F^{-1}(e^{-tσ(ξ)})"""
    t = check_resolution(grid, t, law)
    kernel = field_from_multiplier(grid, law.multiplier(grid, t), tag=f"p_alpha(t={t:g})")
    if not law.is_gaussian:
        kernel.warn_boundary_mass("heat_kernel")
    return kernel


def semigroup_apply(f: Field, t: float, law: StableLaw) -> Field:
    """P^α_t f；t=0 时原样返回"""
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise DataValidationError(f"半群时间必须 >= 0, 得到 {t}", field_name="t", expected_format=">= 0")
    if t == 0.0:
        return f
    if f.is_constant:
        # 常数是半群的不动点，跳过FFT舍入
        return f
    return f.to_spectral().multiply(law.multiplier(f.grid, t)).to_physical(f.tag)


def grad_heat_kernel(grid: Grid, t: float, law: StableLaw, axis: int = 1) -> Field:
    """∂_axis p^α_t = F^{-1}(iξ_axis e^{-tσ(ξ)})"""
    t = check_resolution(grid, t, law)
    multiplier = derivative_multiplier(grid, axis) * law.multiplier(grid, t)
    return field_from_multiplier(grid, multiplier, tag=f"grad{axis}_p_alpha(t={t:g})")


def thermic_derivative(f: Field, v: float, n: int, law: StableLaw,
                       spectrum: Optional[np.ndarray] = None) -> Field:
    """
    ∂ⁿ_v (p^α_v ⋆ f) = F^{-1}((-σ)ⁿ e^{-vσ} F f)

    Args:
        spectrum: 可选的预计算 F f，用于在多个v节点上复用
    """
    v = check_resolution(f.grid, v, law, name="v")
    if int(n) != n or n < 0:
        raise DataValidationError(f"导数阶数必须为非负整数, 得到 {n}", field_name="n")
    sigma = law.symbol(f.grid)
    multiplier = np.exp(-v * sigma)
    if n:
        multiplier = multiplier * (-sigma) ** int(n)
    coefficients = f.to_spectral().coefficients if spectrum is None else spectrum
    return SpectralField(f.grid, coefficients * multiplier).to_physical(f.tag)
