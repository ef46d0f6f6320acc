"""
适定性阈值计算器
"""

import logging
import math
from fractions import Fraction
from typing import Dict, Optional, Tuple

from src.thresholds.models import (
    INF, Exact, ParameterSet, StrongCertificate, ThresholdReport, conjugate, invert, reciprocal,
    to_exact,
)
from src.utils.exceptions import DataValidationError

logger = logging.getLogger(__name__)

ROUGH_PATH_NOTE = ("结构化漂移的粗糙路径方法可把阈值降到 (2-2α)/3，仅作文献背景，未检查")

# 见证搜索中 ℓ 的最大加倍次数
_MAX_ELL_DOUBLINGS = 64


def _drift_load(ps: ParameterSet) -> Fraction:
    """d/p + α/r"""
    return ps.d * reciprocal(ps.p) + ps.alpha * reciprocal(ps.r)


def gap(ps: ParameterSet) -> Fraction:
    """Γ = β - (1 - α + d/p + α/r)"""
    return ps.beta - (1 - ps.alpha + _drift_load(ps))


def weak_threshold(ps: ParameterSet) -> Fraction:
    return 1 - ps.alpha + _drift_load(ps)


def strong_threshold(ps: ParameterSet) -> Fraction:
    """2 - 3α/2 + d/p + α/r"""
    return 2 - Fraction(3, 2) * ps.alpha + _drift_load(ps)


def linear_threshold(ps: ParameterSet) -> Fraction:
    """(1 - α)/2"""
    return (1 - ps.alpha) / 2


def rbar_interval(ps: ParameterSet, regularity_gain: Fraction = Fraction(0)) -> Tuple[Exact, Exact]:
    """[r', ((-β + ϑΓ + d/p)/α)^{-1})；ϑΓ = 0 时即基本区间"""
    upper = invert((-ps.beta + regularity_gain + ps.d * reciprocal(ps.p)) / ps.alpha)
    return conjugate(ps.r), upper


def _interval_empty(interval: Tuple[Exact, Exact]) -> bool:
    lo, hi = interval
    return not lo < hi


def recommended_rbar(ps: ParameterSet) -> Optional[Exact]:
    """区间上端附近的 r̄: 1/r̄ = -β/α + d/(αp) + Γ/(2α)"""
    gamma = gap(ps)
    if gamma <= 0:
        return None
    return invert((-ps.beta + ps.d * reciprocal(ps.p) + gamma / 2) / ps.alpha)


def drift_integrability(ps: ParameterSet, rbar) -> Tuple[Tuple[Exact, Exact], bool]:
    """
    磨光非线性漂移属于 L^{r₀}(B⁰_{∞,1})，r₀ ∈ (0, (1/r + 1/r̄)^{-1}]；
    Krylov-Röckner 判据 α/r₀ < α - 1 在区间上端最容易满足

    Returns:
        ((0, r₀_max), kr_ok)

    Raises:
        DataValidationError: r̄ 不在容许区间内
    """
    rbar = to_exact(rbar)
    lo, hi = rbar_interval(ps)
    if not lo <= rbar < hi:
        raise DataValidationError(
            f"r̄={float(rbar):.6g} 不在容许区间 [{float(lo):.6g}, {float(hi):.6g}) 内",
            field_name="rbar", expected_format="[r', (-β/α + d/(αp))^{-1})")
    r0_max = invert(reciprocal(ps.r) + reciprocal(rbar))
    kr_ok = ps.alpha * reciprocal(r0_max) < ps.alpha - 1
    return (Fraction(0), r0_max), bool(kr_ok)


def delta_exponent(ps: ParameterSet, vartheta) -> Fraction:
    """δ = 1 - ((-β + ϑΓ)/α + d/(pα) + 1/α)·r'"""
    vartheta = to_exact(vartheta)
    if not 0 <= vartheta < 1:
        raise DataValidationError(f"ϑ 必须在 [0,1) 内, 得到 {float(vartheta)}", field_name="vartheta")
    r_dual = conjugate(ps.r)
    if r_dual == INF:
        raise DataValidationError("r = 1 时 r' = ∞，δ 无定义", field_name="r")
    load = (-ps.beta + vartheta * gap(ps)) / ps.alpha + ps.d * reciprocal(ps.p) / ps.alpha + 1 / ps.alpha
    return 1 - load * r_dual


def adjusted_rbar_interval(ps: ParameterSet, vartheta) -> Tuple[Exact, Exact]:
    """ϑ 修正后的 r̄ 区间"""
    vartheta = to_exact(vartheta)
    if not 0 <= vartheta < 1:
        raise DataValidationError(f"ϑ 必须在 [0,1) 内, 得到 {float(vartheta)}", field_name="vartheta")
    return rbar_interval(ps, vartheta * gap(ps))


def strong_certificate(ps: ParameterSet) -> Optional[StrongCertificate]:
    """
    在强条件成立时构造见证 (γ, ℓ, 𝔰):
    γ = ϑ̄Γ ∈ (1-α/2, 1)，ϑ̄ 取容许子区间中点；𝔰 取 (α/(α-1), 上界) 的 3/4 处；
    ℓ 从 max(⌈2d/α⌉, 2)·8 开始加倍直到 α/𝔰 + d/ℓ < α - 1
    """
    gamma = gap(ps)
    lower = (1 - ps.alpha / 2) / gamma if gamma > 0 else None
    upper = min(Fraction(1), 1 / gamma) if gamma > 0 else None
    if lower is None or not lower < upper:
        return None
    theta_bar = (lower + upper) / 2
    gamma_w = theta_bar * gamma
    c = (-ps.beta + gamma_w + ps.d * reciprocal(ps.p)) / ps.alpha
    s_hi = invert(reciprocal(ps.r) + c)
    s_lo = ps.alpha / (ps.alpha - 1)
    s_exp = INF if s_hi == INF else (s_lo + 3 * s_hi) / 4
    ell = max(math.ceil(ps.d * 2 / ps.alpha), 2) * 8
    criterion = None
    for _ in range(_MAX_ELL_DOUBLINGS):
        criterion = ps.alpha * reciprocal(s_exp) + Fraction(ps.d, ell)
        if criterion < ps.alpha - 1:
            break
        ell *= 2
    verified = bool(criterion < ps.alpha - 1)
    if not verified:
        logger.warning(f"强适定性见证未通过数值校验: {ps.describe()}")
    return StrongCertificate(theta_bar=theta_bar, gamma=gamma_w, ell=ell, s_exponent=s_exp,
                             criterion=criterion, verified=verified)


def threshold_report(ps: ParameterSet) -> ThresholdReport:
    gamma = gap(ps)
    interval = rbar_interval(ps)
    strong = ps.beta > strong_threshold(ps)
    report = ThresholdReport(
        params=ps,
        gamma_gap=gamma,
        weak_threshold=weak_threshold(ps),
        strong_threshold=strong_threshold(ps),
        linear_threshold=linear_threshold(ps),
        weak_ok=bool(gamma > 0),
        strong_ok=bool(strong),
        linear_ok=bool(ps.beta > linear_threshold(ps)),
        rbar_interval=interval,
        rbar_empty=_interval_empty(interval),
        notes=[ROUGH_PATH_NOTE],
    )
    if report.weak_ok:
        report.recommended_rbar = recommended_rbar(ps)
        report.r0_interval, report.kr_ok = drift_integrability(ps, report.recommended_rbar)
    if strong:
        report.xz_certificate = strong_certificate(ps)
    return report


def check_weak(ps: ParameterSet) -> ThresholdReport:
    """弱适定性条件 β > 1 - α + d/p + α/r（即 Γ > 0）"""
    return threshold_report(ps)


def check_strong(ps: ParameterSet) -> ThresholdReport:
    """强适定性条件 β > 2 - 3α/2 + d/p + α/r，成立时附带见证"""
    return threshold_report(ps)


def check_linear(ps: ParameterSet) -> bool:
    """线性阈值 β > (1-α)/2"""
    return bool(ps.beta > linear_threshold(ps))


def compare_linear_mckean(ps: ParameterSet) -> Dict[str, object]:
    """线性阈值与McKean阈值的对照"""
    report = threshold_report(ps)
    return {
        "linear_threshold": float(report.linear_threshold),
        "mckean_threshold": float(report.weak_threshold),
        "linear_ok": report.linear_ok,
        "mckean_ok": report.weak_ok,
        "mckean_improves": bool(report.weak_threshold < report.linear_threshold),
    }
