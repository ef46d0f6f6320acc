"""
网格与场的数据模型

Fourier约定: F f(ξ) = ∫ f(x) e^{-i x·ξ} dx, 用缩放后的DFT近似；
环面为 [-L, L)^d, 节点 x_j = -L + j·dx。
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import scipy.fft as sfft

from src.utils.config_manager import get_numerics_config
from src.utils.exceptions import DataValidationError, GridMismatchError, NonFiniteFieldError

logger = logging.getLogger(__name__)

# 外层10%壳层用于边界质量诊断
BOUNDARY_SHELL = 0.9


@dataclass(frozen=True)
class Grid:
    """周期网格"""
    d: int
    n_per_axis: int
    extent: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DataValidationError(f"网格维度必须为1或2, 得到 d={self.d}",
                                      field_name="d", expected_format="1 | 2")
        n = self.n_per_axis
        if not isinstance(n, (int, np.integer)) or n < 32 or (n & (n - 1)) != 0:
            raise DataValidationError(f"每轴点数必须是>=32的2的幂, 得到 n={n}",
                                      field_name="n_per_axis", expected_format="2^k >= 32")
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise DataValidationError(f"半宽L必须为正, 得到 L={self.extent}",
                                      field_name="extent", expected_format="L > 0")

    @property
    def dx(self) -> float:
        return 2.0 * self.extent / self.n_per_axis

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_per_axis,) * self.d

    @property
    def size(self) -> int:
        return self.n_per_axis ** self.d

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.d

    @cached_property
    def axis(self) -> np.ndarray:
        """单轴坐标 x_j = -L + j·dx"""
        return -self.extent + self.dx * np.arange(self.n_per_axis)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """单轴频率 2π·fftfreq(n, dx) = (π/L)·k"""
        return 2.0 * np.pi * sfft.fftfreq(self.n_per_axis, d=self.dx)

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    @cached_property
    def wavevectors(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.frequencies] * self.d), indexing="ij"))

    @cached_property
    def wavenumber(self) -> np.ndarray:
        """|ξ|"""
        return np.sqrt(sum(k ** 2 for k in self.wavevectors))

    @cached_property
    def phase(self) -> np.ndarray:
        """e^{i L Σξ_i}: 把DFT的起点从 x=-L 平移到 x=0"""
        ph = np.ones(self.shape, dtype=complex)
        for k in self.wavevectors:
            ph = ph * np.exp(1j * self.extent * k)
        return ph

    @cached_property
    def nyquist_mask(self) -> Tuple[np.ndarray, ...]:
        """每个轴上Nyquist频率的掩码（奇数阶导数乘子在此处置零）"""
        nyq = np.zeros(self.n_per_axis, dtype=bool)
        nyq[self.n_per_axis // 2] = True
        masks = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.n_per_axis
            masks.append(np.broadcast_to(nyq.reshape(shape), self.shape))
        return tuple(masks)

    @cached_property
    def origin_index(self) -> Tuple[int, ...]:
        """x=0 所在的格点"""
        return (self.n_per_axis // 2,) * self.d

    def shell_mask(self, fraction: float = BOUNDARY_SHELL) -> np.ndarray:
        """外层壳层: 任一坐标 |x_i| > fraction·L"""
        mask = np.zeros(self.shape, dtype=bool)
        for x in self.coordinates:
            mask |= np.abs(x) > fraction * self.extent
        return mask

    def resolution_floor(self, alpha: float) -> float:
        """可表示核的最小时间 (2·dx)^α"""
        return (2.0 * self.dx) ** alpha

    def fftn(self, values: np.ndarray) -> np.ndarray:
        return sfft.fftn(values, workers=get_numerics_config().fft_workers)

    def ifftn(self, coefficients: np.ndarray) -> np.ndarray:
        return sfft.ifftn(coefficients, workers=get_numerics_config().fft_workers)

    def describe(self) -> str:
        return f"Grid(d={self.d}, n={self.n_per_axis}, L={self.extent}, dx={self.dx:.6g})"


@dataclass(frozen=True)
class Field:
    """网格上的实值函数"""
    grid: Grid
    values: np.ndarray
    tag: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.grid.shape:
            raise DataValidationError(
                f"Field形状 {values.shape} 与网格 {self.grid.shape} 不一致",
                field_name="values", expected_format=str(self.grid.shape))
        if not np.all(np.isfinite(values)):
            raise NonFiniteFieldError(f"Field '{self.tag}' 含有NaN/Inf", tag=self.tag)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    # --- 构造 ---

    @classmethod
    def zeros(cls, grid: Grid, tag: Optional[str] = None) -> "Field":
        return cls(grid, np.zeros(grid.shape), tag)

    @classmethod
    def constant(cls, grid: Grid, value: float, tag: Optional[str] = None) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)), tag)

    @classmethod
    def delta(cls, grid: Grid, index: Optional[Tuple[int, ...]] = None,
              tag: Optional[str] = "delta") -> "Field":
        """单格单位质量场，取值 1/dx^d"""
        values = np.zeros(grid.shape)
        values[index if index is not None else grid.origin_index] = 1.0 / grid.cell_volume
        return cls(grid, values, tag)

    @classmethod
    def gaussian(cls, grid: Grid, variance: float, mean=0.0, tag: Optional[str] = None) -> "Field":
        """各向同性高斯密度 N(mean, variance·I)（解析采样，不重新归一化）"""
        means = np.broadcast_to(np.asarray(mean, dtype=float), (grid.d,))
        sq = sum((x - m) ** 2 for x, m in zip(grid.coordinates, means))
        values = np.exp(-sq / (2.0 * variance)) / (2.0 * np.pi * variance) ** (grid.d / 2.0)
        return cls(grid, values, tag)

    # --- 代数 ---

    def _check_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise GridMismatchError(
                f"网格不一致: {self.grid.describe()} vs {other.grid.describe()}",
                field_name="grid")

    def __add__(self, other) -> "Field":
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.values + other.values, self.tag)
        return Field(self.grid, self.values + float(other), self.tag)

    __radd__ = __add__

    def __sub__(self, other) -> "Field":
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.values - other.values, self.tag)
        return Field(self.grid, self.values - float(other), self.tag)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values, self.tag)

    def __mul__(self, other) -> "Field":
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.values * other.values, self.tag)
        return Field(self.grid, self.values * float(other), self.tag)

    __rmul__ = __mul__

    def with_tag(self, tag: Optional[str]) -> "Field":
        return Field(self.grid, self.values, tag)

    # --- 诊断 ---

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_volume)

    mass = integral

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values.flat[0]))

    def minimum(self) -> float:
        return float(np.min(self.values))

    def boundary_mass(self) -> float:
        """外层10%壳层中的 |f| 质量"""
        return float(np.sum(np.abs(self.values[self.grid.shell_mask()])) * self.grid.cell_volume)

    def warn_boundary_mass(self, source: str = "") -> float:
        """重尾场的边界质量超过阈值时发出警告"""
        bmass = self.boundary_mass()
        threshold = get_numerics_config().boundary_mass_warn
        if bmass > threshold:
            logger.warning(f"{source or self.tag}: 边界质量 {bmass:.3e} 超过 {threshold:.1e}，"
                           f"周期截断可能产生混叠，建议增大L")
        return bmass

    def reflect(self) -> "Field":
        """f(-x)（以 x=0 格点为中心）"""
        values = self.values
        for axis in range(self.grid.d):
            values = np.roll(np.flip(values, axis=axis), 1, axis=axis)
        return Field(self.grid, values, self.tag)

    def shift_cells(self, cells) -> "Field":
        """周期平移 f(x - k·dx)"""
        shifts = np.broadcast_to(np.asarray(cells, dtype=int), (self.grid.d,))
        return Field(self.grid, np.roll(self.values, tuple(shifts), axis=tuple(range(self.grid.d))),
                     self.tag)

    def to_spectral(self) -> "SpectralField":
        coefficients = self.grid.fftn(self.values) * self.grid.cell_volume * self.grid.phase
        return SpectralField(self.grid, coefficients)


@dataclass(frozen=True)
class SpectralField:
    """Field的谱表示: coefficients ≈ ∫ f(x) e^{-i x·ξ} dx"""
    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=complex, copy=True)
        if coefficients.shape != self.grid.shape:
            raise DataValidationError("谱系数形状与网格不一致", field_name="coefficients")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    def multiply(self, multiplier: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, self.coefficients * multiplier)

    def to_physical(self, tag: Optional[str] = None) -> Field:
        values = self.grid.ifftn(self.coefficients / (self.grid.cell_volume * self.grid.phase)).real
        return Field(self.grid, values, tag)

    def energy(self) -> float:
        """谱能量 (2π)^{-d} Σ |F f|² dξ^d，Parseval下等于 |f|²_{L²}"""
        dxi = np.pi / self.grid.extent
        return float(np.sum(np.abs(self.coefficients) ** 2) * (dxi / (2.0 * np.pi)) ** self.grid.d)


def field_from_multiplier(grid: Grid, multiplier: np.ndarray, tag: Optional[str] = None) -> Field:
    """返回 F^{-1}(multiplier)"""
    return SpectralField(grid, multiplier).to_physical(tag)
