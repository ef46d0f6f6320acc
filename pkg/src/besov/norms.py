"""
热型刻画的Besov范数与加权时间Bochner范数

|f|_{B^γ_{ℓ,m}} ≈ |F^{-1}(φ F f)|_{L^ℓ} + ( ∫_0^1 dv/v [v^{n-γ/α} |∂ⁿ_v p̃^α(v)⋆f|_{L^ℓ}]^m )^{1/m}
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from src.besov.models import BesovIndex, ThermicSettings
from src.grid.models import Field, Grid
from src.grid.operations import Exponent, lp_norm, parse_exponent
from src.semigroup.kernels import thermic_derivative
from src.semigroup.models import StableLaw
from src.utils.exceptions import DataValidationError


def low_frequency_window(grid: Grid, radius: float = 1.0) -> np.ndarray:
    """φ(ξ) = exp(1 - 1/(1 - |ξ/ξ₀|²))，|ξ| >= ξ₀ 时为 0"""
    r2 = (grid.wavenumber / radius) ** 2
    window = np.zeros(grid.shape)
    inside = r2 < 1.0
    window[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return window


def low_frequency_part(f: Field, ell: Exponent, radius: float = 1.0) -> float:
    low = f.to_spectral().multiply(low_frequency_window(f.grid, radius)).to_physical()
    return lp_norm(low, ell)


def thermic_profile(f: Field, idx: BesovIndex, law: StableLaw,
                    ts: Optional[ThermicSettings] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    返回 (v节点, v^{n-γ/α}·|∂ⁿ_v p̃^α(v)⋆f|_{L^ℓ})
    """
    ts = ts or ThermicSettings()
    n = ts.resolve_n(idx, law)
    v = ts.v_grid(f.grid, law)
    spectrum = f.to_spectral().coefficients
    exponent = n - idx.gamma / law.alpha

    def evaluate(node: float) -> float:
        derivative = thermic_derivative(f, node, n, law, spectrum=spectrum)
        return node ** exponent * lp_norm(derivative, idx.ell)

    if ts.workers > 1:
        with ThreadPoolExecutor(max_workers=ts.workers) as executor:
            values = list(executor.map(evaluate, v))
    else:
        values = [evaluate(node) for node in v]
    return v, np.asarray(values)


def thermic_part(f: Field, idx: BesovIndex, law: StableLaw,
                 ts: Optional[ThermicSettings] = None) -> float:
    v, values = thermic_profile(f, idx, law, ts)
    peak = float(np.max(values))
    if math.isinf(idx.m) or peak == 0.0:
        return peak
    # dv/v 测度下在 log v 上做梯形积分
    integral = trapezoid((values / peak) ** idx.m, np.log(v))
    return float(peak * integral ** (1.0 / idx.m))


def besov_norm(f: Field, idx: BesovIndex, law: StableLaw,
               ts: Optional[ThermicSettings] = None) -> float:
    ts = ts or ThermicSettings()
    return low_frequency_part(f, idx.ell, ts.phi_radius) + thermic_part(f, idx, law, ts)


def _time_nodes_before(times: Sequence[float], S: float) -> Tuple[np.ndarray, np.ndarray]:
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise DataValidationError("时间轨迹为空或只有一个节点", field_name="times")
    if not times[0] < S <= times[-1] * (1.0 + 1e-12):
        raise DataValidationError(f"右端点 S={S} 不在轨迹区间 ({times[0]}, {times[-1]}] 内",
                                  field_name="S", expected_format="(t, T]")
    before = np.flatnonzero(times < S)
    steps = times[before + 1] - times[before]
    return before, steps


def weighted_time_norm(times: Sequence[float], norms: Sequence[float], r: Exponent,
                       alpha: float, S: float) -> float:
    """
    (Σ_s Δs (S-s)^{-r/α} N(s)^r)^{1/r}，左矩形求积，排除 s = S 处的节点
    """
    r = parse_exponent(r)
    if not r >= 1.0:
        raise DataValidationError(f"时间指数 r 必须 >= 1, 得到 {r}", field_name="r")
    before, steps = _time_nodes_before(times, S)
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)[before]
    lag = S - times[before]
    if math.isinf(r):
        return float(np.max(lag ** (-1.0 / alpha) * norms))
    return float(np.sum(steps * lag ** (-r / alpha) * norms ** r) ** (1.0 / r))


def time_lebesgue_norm(times: Sequence[float], norms: Sequence[float], r: Exponent,
                       S: Optional[float] = None) -> float:
    """无权的 L^r 时间范数，左矩形求积"""
    r = parse_exponent(r)
    times_arr = np.asarray(times, dtype=float)
    before, steps = _time_nodes_before(times_arr, times_arr[-1] if S is None else S)
    values = np.asarray(norms, dtype=float)[before]
    if math.isinf(r):
        return float(np.max(values))
    return float(np.sum(steps * values ** r) ** (1.0 / r))


def slice_norms(traj, idx: BesovIndex, law: StableLaw,
                ts: Optional[ThermicSettings] = None, S: Optional[float] = None) -> np.ndarray:
    """逐时间片的Besov范数；S 给定时只计算 s < S 的切片，其余记为 0"""
    norms = np.zeros(len(traj.times))
    for i, (s, rho) in enumerate(zip(traj.times, traj.slices)):
        if S is None or s < S:
            norms[i] = besov_norm(rho, idx, law, ts)
    return norms


def weighted_bochner_norm(traj, r: Exponent, idx: BesovIndex, S: float, law: StableLaw,
                          ts: Optional[ThermicSettings] = None,
                          norms: Optional[Sequence[float]] = None) -> float:
    """
    轨迹的加权 L^r_w(B^γ_{ℓ,m}) 范数

    Args:
        traj: 具有 times / slices 属性的时间轨迹
        norms: 可选的预计算逐片范数
    """
    if traj is None or len(traj.times) == 0:
        raise DataValidationError("轨迹为空", field_name="traj")
    if norms is None:
        norms = slice_norms(traj, idx, law, ts, S=S)
    return weighted_time_norm(traj.times, norms, r, law.alpha, S)
