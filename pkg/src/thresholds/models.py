"""
参数组与阈值报告

所有阈值运算使用 fractions.Fraction 精确计算，∞ 用 math.inf 表示（1/∞ = 0 精确成立）。
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from src.grid.operations import parse_exponent
from src.utils.exceptions import DataValidationError

Exact = Union[Fraction, float]  # float 仅用于 math.inf
INF = math.inf


def to_exact(value) -> Exact:
    """数值 → Fraction（按十进制字面量），∞ 保持为 math.inf"""
    if isinstance(value, Fraction):
        return value
    parsed = parse_exponent(value) if isinstance(value, str) else value
    if isinstance(parsed, float) and math.isinf(parsed):
        if parsed < 0:
            raise DataValidationError("指数不能为 -∞", field_name="exponent")
        return INF
    return Fraction(str(parsed)) if isinstance(parsed, float) else Fraction(parsed)


def reciprocal(value: Exact) -> Fraction:
    """1/x，1/∞ = 0"""
    if value == INF:
        return Fraction(0)
    return 1 / Fraction(value)


def invert(value: Fraction) -> Exact:
    """x^{-1}，0^{-1} = ∞"""
    return INF if value == 0 else 1 / value


def conjugate(value: Exact) -> Exact:
    """1/x + 1/x' = 1"""
    return invert(1 - reciprocal(value))


def as_float(value: Exact) -> float:
    return float(value)


def format_exact(value: Optional[Exact]) -> str:
    if value is None:
        return "-"
    if value == INF:
        return "∞"
    return f"{float(value):.6g}"


@dataclass(frozen=True)
class ParameterSet:
    """
    (α, β, p, q, r, d)

    β 允许取边界值 -1，以便表示 Γ = 0 的临界情形。
    """
    alpha: Exact
    beta: Exact
    p: Exact = INF
    q: Exact = INF
    r: Exact = INF
    d: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "p", "q", "r"):
            object.__setattr__(self, name, to_exact(getattr(self, name)))
        if self.alpha == INF or not 1 < self.alpha <= 2:
            raise DataValidationError(f"α 必须在 (1,2] 内, 得到 {self.alpha}",
                                      field_name="alpha", expected_format="(1, 2]")
        if self.beta == INF or not -1 <= self.beta <= 0:
            raise DataValidationError(f"β 必须在 [-1,0] 内, 得到 {self.beta}",
                                      field_name="beta", expected_format="[-1, 0]")
        for name in ("p", "q", "r"):
            if getattr(self, name) < 1:
                raise DataValidationError(f"{name} 必须在 [1,∞] 内", field_name=name,
                                          expected_format="[1, ∞]")
        if int(self.d) != self.d or self.d < 1:
            raise DataValidationError(f"维度 d 必须为正整数, 得到 {self.d}", field_name="d")
        object.__setattr__(self, "d", int(self.d))

    @classmethod
    def from_values(cls, alpha, beta, p="inf", q="inf", r="inf", d: int = 1) -> "ParameterSet":
        return cls(alpha, beta, p, q, r, d)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "alpha": as_float(self.alpha),
            "beta": as_float(self.beta),
            "p": as_float(self.p),
            "q": as_float(self.q),
            "r": as_float(self.r),
            "d": self.d,
        }

    def describe(self) -> str:
        return (f"α={format_exact(self.alpha)}, β={format_exact(self.beta)}, p={format_exact(self.p)}, "
                f"q={format_exact(self.q)}, r={format_exact(self.r)}, d={self.d}")


@dataclass(frozen=True)
class StrongCertificate:
    """强适定性见证 (γ, ℓ, 𝔰)，需满足 α/𝔰 + d/ℓ < α - 1"""
    theta_bar: Fraction
    gamma: Fraction
    ell: int
    s_exponent: Exact
    criterion: Fraction
    verified: bool


@dataclass
class ThresholdReport:
    """参数组的全部适定性判断与导出区间"""
    params: ParameterSet
    gamma_gap: Fraction
    weak_threshold: Fraction
    strong_threshold: Fraction
    linear_threshold: Fraction
    weak_ok: bool
    strong_ok: bool
    linear_ok: bool
    rbar_interval: Tuple[Exact, Exact]
    rbar_empty: bool
    recommended_rbar: Optional[Exact] = None
    r0_interval: Optional[Tuple[Exact, Exact]] = None
    kr_ok: bool = False
    xz_certificate: Optional[StrongCertificate] = None
    notes: List[str] = field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        """CSV 行（列顺序固定）"""
        row = self.params.as_dict()
        cert = self.xz_certificate
        row.update({
            "gamma_gap": float(self.gamma_gap),
            "weak_threshold": float(self.weak_threshold),
            "strong_threshold": float(self.strong_threshold),
            "linear_threshold": float(self.linear_threshold),
            "weak_ok": self.weak_ok,
            "strong_ok": self.strong_ok,
            "linear_ok": self.linear_ok,
            "rbar_lo": float(self.rbar_interval[0]),
            "rbar_hi": float(self.rbar_interval[1]),
            "rbar_empty": self.rbar_empty,
            "recommended_rbar": None if self.recommended_rbar is None else float(self.recommended_rbar),
            "r0_max": None if self.r0_interval is None else float(self.r0_interval[1]),
            "kr_ok": self.kr_ok,
            "xz_gamma": None if cert is None else float(cert.gamma),
            "xz_ell": None if cert is None else cert.ell,
            "xz_s": None if cert is None else float(cert.s_exponent),
            "xz_verified": None if cert is None else cert.verified,
        })
        return row
