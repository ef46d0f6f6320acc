"""
奇异相互作用核目录与磨光方案
"""

from .models import (
    KernelSpec, ClaimedClass, KernelRealization, MollifiedKernel, ExponentValue, SINGULAR_FAMILIES,
)
from .catalog import realize_kernel, refinement_ratio
from .mollifier import (
    mollify, mollify_realization, mollify_modulation, time_mollifier, kernel_distance, thermic_distance,
    mollifier_convergence, mollifier_uniform_bound, mollified_pairings,
)

__all__ = [
    'KernelSpec',
    'ClaimedClass',
    'KernelRealization',
    'MollifiedKernel',
    'ExponentValue',
    'SINGULAR_FAMILIES',
    'realize_kernel',
    'refinement_ratio',
    'mollify',
    'mollify_realization',
    'mollify_modulation',
    'time_mollifier',
    'kernel_distance',
    'thermic_distance',
    'mollifier_convergence',
    'mollifier_uniform_bound',
    'mollified_pairings',
]
