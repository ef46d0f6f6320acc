"""
网格运算: 构造、谱卷积、Lᵖ范数
"""

import math
from typing import Sequence, Tuple, Union

import numpy as np

from src.grid.models import Field, Grid
from src.utils.exceptions import DataValidationError, GridMismatchError

Exponent = Union[float, int, str]

# 矢量场按分量存储，长度为 d
VectorField = Tuple[Field, ...]


def make_grid(d: int, n: int, L: float) -> Grid:
    """构造 [-L, L)^d 上每轴 n 个点的周期网格"""
    return Grid(d=int(d), n_per_axis=int(n), extent=float(L))


def parse_exponent(value: Exponent) -> float:
    """把 'inf' / '∞' / 数值 统一为 float（∞ 为 math.inf）"""
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("inf", "infinity", "∞", "+inf"):
            return math.inf
        value = float(token)
    return float(value)


def conjugate_exponent(value: Exponent) -> float:
    """ℓ' 满足 1/ℓ + 1/ℓ' = 1"""
    ell = parse_exponent(value)
    if ell == 1.0:
        return math.inf
    if math.isinf(ell):
        return 1.0
    return ell / (ell - 1.0)


def reciprocal(value: Exponent) -> float:
    ell = parse_exponent(value)
    return 0.0 if math.isinf(ell) else 1.0 / ell


def ensure_same_grid(*fields: Field) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(
                f"网格不一致: {grid.describe()} vs {f.grid.describe()}", field_name="grid")
    return grid


def convolve(f: Field, g: Field) -> Field:
    """周期卷积 ∫ f(x-y) g(y) dy，谱方法计算"""
    ensure_same_grid(f, g)
    spectral = f.to_spectral().multiply(g.to_spectral().coefficients)
    return spectral.to_physical(f.tag)


def convolve_vector(b: Sequence[Field], g: Field) -> VectorField:
    """矢量场逐分量卷积"""
    g_hat = g.to_spectral().coefficients
    return tuple(c.to_spectral().multiply(g_hat).to_physical(c.tag) for c in b)


def lp_norm(f: Field, ell: Exponent) -> float:
    """(Σ |f|^ℓ dx^d)^{1/ℓ}，ℓ=∞ 时为 max|f|"""
    exponent = parse_exponent(ell)
    if not exponent >= 1.0:
        raise DataValidationError(f"Lᵖ指数必须 >= 1, 得到 {ell}",
                                  field_name="ell", expected_format="[1, ∞]")
    values = np.abs(f.values)
    if math.isinf(exponent):
        return float(np.max(values))
    peak = float(np.max(values))
    if peak == 0.0:
        return 0.0
    # 先除以峰值避免大指数下溢/上溢
    scaled = np.sum((values / peak) ** exponent) * f.grid.cell_volume
    return float(peak * scaled ** (1.0 / exponent))


def vector_lp_norm(b: Sequence[Field], ell: Exponent) -> float:
    """矢量场的 Lᵖ 范数（逐点欧氏模）"""
    grid = ensure_same_grid(*b)
    magnitude = np.sqrt(sum(c.values ** 2 for c in b))
    return lp_norm(Field(grid, magnitude), ell)


def pairing(f: Field, g: Field) -> float:
    """∫ f g dx"""
    ensure_same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def l1_distance(f: Field, g: Field) -> float:
    ensure_same_grid(f, g)
    return lp_norm(f - g, 1)
