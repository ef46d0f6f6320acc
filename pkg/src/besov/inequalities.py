"""
Besov空间函数不等式的测量验证器

所有验证器都只测量比值 lhs/rhs 并在族上拟合常数，不断言常数为1：
热型范数与文献中的范数只相差一个等价常数。
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.besov.models import BesovIndex, InequalityReport, ThermicSettings
from src.besov.norms import besov_norm, thermic_part
from src.grid.models import Field, Grid
from src.grid.operations import (
    Exponent, conjugate_exponent, convolve, ensure_same_grid, lp_norm, pairing, parse_exponent,
    reciprocal,
)
from src.semigroup.kernels import grad_heat_kernel, heat_kernel
from src.semigroup.models import StableLaw
from src.utils.exceptions import DataValidationError, ExponentBookkeepingError

logger = logging.getLogger(__name__)

_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class YoungSplit:
    """Young不等式的指标拆分 (δ, ℓ₁, ℓ₂, m₁, m₂)"""
    delta: float
    ell1: Exponent
    ell2: Exponent
    m1: Exponent
    m2: Exponent

    def validate(self, target: BesovIndex) -> None:
        lhs = 1.0 + reciprocal(target.ell)
        rhs = reciprocal(self.ell1) + reciprocal(self.ell2)
        if abs(lhs - rhs) > _IDENTITY_TOL:
            raise ExponentBookkeepingError(
                f"Young指标不满足 1 + 1/ℓ = 1/ℓ₁ + 1/ℓ₂: {lhs:.6g} != {rhs:.6g}",
                identity="1 + 1/ℓ = 1/ℓ₁ + 1/ℓ₂")
        bound = max(reciprocal(target.m) - reciprocal(self.m2), 0.0)
        if reciprocal(self.m1) < bound - _IDENTITY_TOL:
            raise ExponentBookkeepingError(
                f"Young指标不满足 1/m₁ >= (1/m - 1/m₂) ∨ 0: {reciprocal(self.m1):.6g} < {bound:.6g}",
                identity="1/m₁ >= (1/m - 1/m₂) ∨ 0")

    def f_index(self, target: BesovIndex) -> BesovIndex:
        return BesovIndex(target.gamma - self.delta, self.ell1, self.m1)

    def g_index(self) -> BesovIndex:
        return BesovIndex(self.delta, self.ell2, self.m2)


@dataclass(frozen=True)
class FGHIndices:
    """
    卷积引理 |(𝒞 g₂)⋆h|_{B^γ_{ℓ,m}} <= c |f|_{B^{γ_f}_{ℓ_f,m_f}} |g₁|_{B^{-γ_f}_{ℓ_g1,m_g1}}
    |g₂|_{L^{ℓ_g2}} |h|_{B^γ_{ℓ_h,m_h}}，其中 𝒞 = f⋆g₁
    """
    gamma: float
    ell: Exponent
    m: Exponent
    gamma_f: float
    ell_f: Exponent
    m_f: Exponent
    ell_g1: Exponent
    m_g1: Exponent
    ell_g2: Exponent
    ell_h: Exponent
    m_h: Exponent

    @classmethod
    def drift_instantiation(cls, beta: float, p: Exponent, q: Exponent,
                            regularity_gain: float = 0.0) -> "FGHIndices":
        """先验估计中的取法: f=b, g₁=g₂=ρ, h=∇p^α，γ = -β + ϑΓ"""
        p_dual, q_dual = conjugate_exponent(p), conjugate_exponent(q)
        return cls(gamma=-beta + regularity_gain, ell=p_dual, m=q_dual,
                   gamma_f=beta, ell_f=p, m_f=q, ell_g1=p_dual, m_g1=q_dual,
                   ell_g2=1.0, ell_h=p_dual, m_h=1.0)

    def validate(self) -> None:
        lhs = sum(reciprocal(x) for x in (self.ell_f, self.ell_g1, self.ell_g2, self.ell_h))
        rhs = 2.0 + reciprocal(self.ell)
        if abs(lhs - rhs) > _IDENTITY_TOL:
            raise ExponentBookkeepingError(
                f"卷积引理指标不满足 1/ℓ_f + 1/ℓ_g1 + 1/ℓ_g2 + 1/ℓ_h = 2 + 1/ℓ: {lhs:.6g} != {rhs:.6g}",
                identity="1/ℓ_f + 1/ℓ_g1 + 1/ℓ_g2 + 1/ℓ_h = 2 + 1/ℓ")
        if parse_exponent(self.m_h) > parse_exponent(self.m):
            raise ExponentBookkeepingError("卷积引理指标不满足 m_h <= m", identity="m_h <= m")
        bound = max(1.0 - reciprocal(self.m_f), 0.0)
        if reciprocal(self.m_g1) < bound - _IDENTITY_TOL:
            raise ExponentBookkeepingError(
                "卷积引理指标不满足 1/m_g1 >= (1 - 1/m_f) ∨ 0",
                identity="1/m_g1 >= (1 - 1/m_f) ∨ 0")
        if not -1.0 <= self.gamma_f <= 0.0:
            raise ExponentBookkeepingError(f"γ_f 必须在 [-1,0] 内, 得到 {self.gamma_f}",
                                           identity="γ_f ∈ [-1, 0]")
        if self.gamma < 0.0:
            raise ExponentBookkeepingError(f"γ 必须 >= 0, 得到 {self.gamma}", identity="γ >= 0")


def check_young(f: Field, g: Field, target: BesovIndex, split: YoungSplit, law: StableLaw,
                ts: Optional[ThermicSettings] = None, report: Optional[InequalityReport] = None,
                family_id=None) -> InequalityReport:
    """|f⋆g|_{B^γ_{ℓ,m}} / (|f|_{B^{γ-δ}_{ℓ₁,m₁}} |g|_{B^δ_{ℓ₂,m₂}})"""
    split.validate(target)
    ensure_same_grid(f, g)
    report = report if report is not None else InequalityReport("young")
    lhs = besov_norm(convolve(f, g), target, law, ts)
    rhs = besov_norm(f, split.f_index(target), law, ts) * besov_norm(g, split.g_index(), law, ts)
    report.record(lhs, rhs, family_id, target=target.label(), delta=split.delta)
    return report


def check_duality(f: Field, g: Field, idx: BesovIndex, law: StableLaw,
                  ts: Optional[ThermicSettings] = None, report: Optional[InequalityReport] = None,
                  family_id=None) -> InequalityReport:
    """|∫ f g| / (|f|_{B^γ_{ℓ,m}} |g|_{B^{-γ}_{ℓ',m'}})"""
    ensure_same_grid(f, g)
    report = report if report is not None else InequalityReport("duality")
    rhs = besov_norm(f, idx, law, ts) * besov_norm(g, idx.dual(), law, ts)
    if rhs == 0.0:
        raise DataValidationError("对偶不等式分母为零（两个场均为零）", field_name="rhs")
    report.record(abs(pairing(f, g)), rhs, family_id, index=idx.label())
    return report


def check_fgh(f: Field, g1: Field, g2: Field, h: Field, indices: FGHIndices, law: StableLaw,
              ts: Optional[ThermicSettings] = None, report: Optional[InequalityReport] = None,
              family_id=None) -> InequalityReport:
    """|((f⋆g₁)·g₂)⋆h|_{B^γ_{ℓ,m}} 与四个因子范数之积的比值"""
    indices.validate()
    ensure_same_grid(f, g1, g2, h)
    report = report if report is not None else InequalityReport("fgh")
    composite = convolve(convolve(f, g1) * g2, h)
    lhs = besov_norm(composite, BesovIndex(indices.gamma, indices.ell, indices.m), law, ts)
    factors = (
        besov_norm(f, BesovIndex(indices.gamma_f, indices.ell_f, indices.m_f), law, ts),
        besov_norm(g1, BesovIndex(-indices.gamma_f, indices.ell_g1, indices.m_g1), law, ts),
        lp_norm(g2, indices.ell_g2),
        besov_norm(h, BesovIndex(indices.gamma, indices.ell_h, indices.m_h), law, ts),
    )
    report.record(lhs, float(np.prod(factors)), family_id, gamma=indices.gamma,
                  gamma_f=indices.gamma_f)
    return report


def check_embedding(fields: Iterable[Field], ell: Exponent, law: StableLaw,
                    ts: Optional[ThermicSettings] = None) -> Tuple[InequalityReport, InequalityReport]:
    """
    B⁰_{ℓ,1} ↪ L^ℓ ↪ B⁰_{ℓ,∞}

    Returns:
        (|f|_{L^ℓ}/|f|_{B⁰_{ℓ,1}} 报告, |f|_{B⁰_{ℓ,∞}}/|f|_{L^ℓ} 报告)
    """
    lower = InequalityReport("embedding_B0l1_to_Ll")
    upper = InequalityReport("embedding_Ll_to_B0linf")
    for k, f in enumerate(fields):
        norm = lp_norm(f, ell)
        lower.record(norm, besov_norm(f, BesovIndex(0.0, ell, 1.0), law, ts), k)
        upper.record(besov_norm(f, BesovIndex(0.0, ell, math.inf), law, ts), norm, k)
    return lower, upper


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise DataValidationError("斜率拟合至少需要两个正值点", field_name="samples")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def dequadrification_family(b: Sequence[Field], rho: Field, beta: float, law: StableLaw,
                            lags: Sequence[float],
                            ts: Optional[ThermicSettings] = None) -> InequalityReport:
    """
    |div((ℬ_ρ ρ) ⋆ p^α_{s-v})|_{B^{-β}_{1,1}} 与 |b|_{B^β_{∞,∞}} |ρ|_{B^{-β}_{1,1}} 的比值族，
    并拟合左端关于 s-v 的对数斜率（上界斜率为 -(1-β)/α）
    """
    grid = ensure_same_grid(*b, rho)
    report = InequalityReport("dequadrification")
    drift = [convolve(component, rho) for component in b]
    flux = [component * rho for component in drift]
    kernel_norm = max(besov_norm(c, BesovIndex(beta, math.inf, math.inf), law, ts) for c in b)
    rho_norm = besov_norm(rho, BesovIndex(-beta, 1.0, 1.0), law, ts)
    lhs_values = []
    for lag in lags:
        divergence = Field.zeros(grid)
        for axis, component in enumerate(flux, start=1):
            divergence = divergence + convolve(component, grad_heat_kernel(grid, lag, law, axis))
        lhs = besov_norm(divergence, BesovIndex(-beta, 1.0, 1.0), law, ts)
        lhs_values.append(lhs)
        report.record(lhs, kernel_norm * rho_norm, family_id=f"lag={lag:g}", lag=lag)
    report.fitted_slope = fit_loglog_slope(lags, lhs_values)
    logger.debug(f"去平方化斜率 {report.fitted_slope:.4f}，上界斜率 {-(1 - beta) / law.alpha:.4f}")
    return report


def expected_heat_kernel_slope(idx: BesovIndex, law: StableLaw, d: int, order: int) -> float:
    """-(γ/α + (d/α)(1 - 1/ℓ) + |a|/α)"""
    return -(idx.gamma + d * (1.0 - reciprocal(idx.ell)) + order) / law.alpha


def heat_kernel_scaling(grid: Grid, law: StableLaw, idx: BesovIndex, times: Sequence[float],
                        order: int = 0, ts: Optional[ThermicSettings] = None,
                        thermic_only: bool = False) -> Tuple[float, float, pd.DataFrame]:
    """
    测量 |∂^a p^α_t|_{B^γ_{ℓ,m}} 随 t 的对数斜率

    Returns:
        (拟合斜率, 理论斜率, 每个t的范数表)
    """
    if order not in (0, 1):
        raise DataValidationError(f"只支持 |a| ∈ {{0,1}}, 得到 {order}", field_name="order")
    measure = thermic_part if thermic_only else besov_norm
    rows = []
    for t in times:
        kernel = heat_kernel(grid, t, law) if order == 0 else grad_heat_kernel(grid, t, law, 1)
        rows.append({"t": float(t), "norm": measure(kernel, idx, law, ts)})
    table = pd.DataFrame(rows, columns=["t", "norm"])
    slope = fit_loglog_slope(table["t"], table["norm"])
    return slope, expected_heat_kernel_slope(idx, law, grid.d, order), table
