"""
热型刻画的Besov范数、加权时间范数与函数不等式验证器
"""

from .models import BesovIndex, ThermicSettings, InequalityRecord, InequalityReport
from .norms import (
    low_frequency_window, low_frequency_part, thermic_profile, thermic_part, besov_norm,
    weighted_time_norm, time_lebesgue_norm, slice_norms, weighted_bochner_norm,
)
from .inequalities import (
    YoungSplit, FGHIndices, check_young, check_duality, check_fgh, check_embedding,
    dequadrification_family, heat_kernel_scaling, expected_heat_kernel_slope, fit_loglog_slope,
)

__all__ = [
    'BesovIndex',
    'ThermicSettings',
    'InequalityRecord',
    'InequalityReport',
    'low_frequency_window',
    'low_frequency_part',
    'thermic_profile',
    'thermic_part',
    'besov_norm',
    'weighted_time_norm',
    'time_lebesgue_norm',
    'slice_norms',
    'weighted_bochner_norm',
    'YoungSplit',
    'FGHIndices',
    'check_young',
    'check_duality',
    'check_fgh',
    'check_embedding',
    'dequadrification_family',
    'heat_kernel_scaling',
    'expected_heat_kernel_slope',
    'fit_loglog_slope',
]
