"""
α-稳定热核 p^α_t、半群作用 P^α_t、梯度核与热导数
"""

from .models import StableLaw, STABLE_MODES, MODE_ALIASES
from .kernels import (
    heat_kernel, semigroup_apply, grad_heat_kernel, thermic_derivative,
    check_resolution, derivative_multiplier,
)

__all__ = [
    'StableLaw',
    'STABLE_MODES',
    'MODE_ALIASES',
    'heat_kernel',
    'semigroup_apply',
    'grad_heat_kernel',
    'thermic_derivative',
    'check_resolution',
    'derivative_multiplier',
]
