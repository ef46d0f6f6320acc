"""
α-稳定增量的采样

特征函数约定 E e^{iξ·X} = e^{-dt·σ(ξ)}，与半群乘子一致:
  α = 2:       N(0, 2dt) 逐坐标
  isotropic:   X = dt^{1/α}·√(2A)·G，A 为 Laplace 变换 e^{-λ^{α/2}} 的正稳定变量（Kanter表示）
  product:     逐坐标独立的对称α稳定变量（Chambers-Mallows-Stuck），尺度 dt^{1/α}
"""

import math
from typing import Tuple

import numpy as np

from src.semigroup.models import StableLaw
from src.utils.exceptions import DataValidationError

# 每一步使用的独立变量流编号
_UNIFORM, _EXPONENTIAL, _GAUSSIAN = 0, 1, 2


def positive_stable(a: float, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    """
    Laplace 变换为 e^{-λ^a} 的正稳定变量，a ∈ (0, 1]

    Args:
        u: (0,1) 上的均匀变量
        e: 标准指数变量
    """
    if a == 1.0:
        return np.ones_like(u)
    angle = math.pi * u
    kernel = np.sin(a * angle) / np.sin(angle) ** (1.0 / a)
    return kernel * (np.sin((1.0 - a) * angle) / e) ** ((1.0 - a) / a)


def symmetric_stable(alpha: float, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    """特征函数 e^{-|ξ|^α} 的对称稳定变量"""
    phi = (u - 0.5) * math.pi
    if alpha == 2.0:
        return 2.0 * np.sqrt(e) * np.sin(phi)
    return (np.cos((1.0 - alpha) * phi) / e) ** (1.0 / alpha - 1.0) * np.sin(alpha * phi) \
        / np.cos(phi) ** (1.0 / alpha)


def _increments(law: StableLaw, dt: float, u: np.ndarray, e: np.ndarray, g: np.ndarray) -> np.ndarray:
    scale = dt ** (1.0 / law.alpha)
    if law.is_gaussian:
        return math.sqrt(2.0 * dt) * g
    if law.mode == "product" and g.shape[-1] > 1:
        return scale * symmetric_stable(law.alpha, u, e)
    a = positive_stable(law.alpha / 2.0, u[..., :1], e[..., :1])
    return scale * np.sqrt(2.0 * a) * g


def _check(dt: float, d: int):
    if not dt > 0:
        raise DataValidationError(f"dt 必须 > 0, 得到 {dt}", field_name="dt")
    if d < 1:
        raise DataValidationError(f"维度必须 >= 1, 得到 {d}", field_name="d")


def _open_uniform(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    u = rng.random(shape)
    return np.where(u == 0.0, 0.5, u)


def sample_stable_increment(law: StableLaw, dt: float, d: int, rng: np.random.Generator) -> np.ndarray:
    """单个 d 维增量 𝒲_{s+dt} - 𝒲_s"""
    _check(dt, d)
    shape = (d,)
    u = _open_uniform(rng, shape)
    e = rng.standard_exponential(shape)
    g = rng.standard_normal(shape)
    return _increments(law, dt, u, e, g)


def step_streams(seed: int, step: int):
    """第 step 步的三个独立变量流，由 (seed, step, 流编号) 派生"""
    return tuple(np.random.default_rng(np.random.SeedSequence([int(seed), int(step), stream]))
                 for stream in (_UNIFORM, _EXPONENTIAL, _GAUSSIAN))


def sample_step_increments(law: StableLaw, dt: float, N: int, d: int, seed: int, step: int) -> np.ndarray:
    """
    一步内 N 个粒子的增量，形状 (N, d)

    第 i 行只依赖 (seed, step, i)：不同 N 的模拟共享前缀粒子的噪声。
    """
    _check(dt, d)
    uniform, exponential, gaussian = step_streams(seed, step)
    shape = (N, d)
    u = _open_uniform(uniform, shape)
    e = exponential.standard_exponential(shape)
    g = gaussian.standard_normal(shape)
    return _increments(law, dt, u, e, g)
