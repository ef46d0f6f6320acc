"""
温和形式非线性Fokker-Planck方程的Picard求解器及其诊断
"""

from .models import InitialLaw, SolverConfig, DensityTrajectory, PicardResult, QUADRATURES
from .duhamel import (
    nl_drift, free_evolution, DuhamelOperator, duhamel_rhs, picard_solve, solve_frozen_drift,
)
from .diagnostics import (
    TestFunction, default_test_battery, weak_form_residual, AprioriReport, apriori_report,
    apriori_sweep, epsilon_stability_study, uniqueness_probe, mixture_consistency,
    contraction_ratio, contraction_vs_horizon,
)

__all__ = [
    'InitialLaw',
    'SolverConfig',
    'DensityTrajectory',
    'PicardResult',
    'QUADRATURES',
    'nl_drift',
    'free_evolution',
    'DuhamelOperator',
    'duhamel_rhs',
    'picard_solve',
    'solve_frozen_drift',
    'TestFunction',
    'default_test_battery',
    'weak_form_residual',
    'AprioriReport',
    'apriori_report',
    'apriori_sweep',
    'epsilon_stability_study',
    'uniqueness_probe',
    'mixture_consistency',
    'contraction_ratio',
    'contraction_vs_horizon',
]
