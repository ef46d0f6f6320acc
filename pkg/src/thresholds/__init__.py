"""
参数组 (α, β, p, q, r, d) 上的精确阈值计算
"""

from .models import (
    ParameterSet, ThresholdReport, StrongCertificate, INF, to_exact, reciprocal, conjugate,
    invert, format_exact,
)
from .calculator import (
    gap, weak_threshold, strong_threshold, linear_threshold, rbar_interval, recommended_rbar,
    drift_integrability, delta_exponent, adjusted_rbar_interval, strong_certificate,
    threshold_report, check_weak, check_strong, check_linear, compare_linear_mckean,
)

__all__ = [
    'ParameterSet',
    'ThresholdReport',
    'StrongCertificate',
    'INF',
    'to_exact',
    'reciprocal',
    'conjugate',
    'invert',
    'format_exact',
    'gap',
    'weak_threshold',
    'strong_threshold',
    'linear_threshold',
    'rbar_interval',
    'recommended_rbar',
    'drift_integrability',
    'delta_exponent',
    'adjusted_rbar_interval',
    'strong_certificate',
    'threshold_report',
    'check_weak',
    'check_strong',
    'check_linear',
    'compare_linear_mckean',
]
