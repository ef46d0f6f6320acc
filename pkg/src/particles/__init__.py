"""
磨光McKean-Vlasov SDE的相互作用粒子模拟
"""

from .models import ParticleEnsemble, SimConfig, ParticleTrajectory, drift_bound, cfl_step
from .sampling import (
    sample_stable_increment, sample_step_increments, positive_stable, symmetric_stable, step_streams,
)
from .simulator import (
    step, simulate, empirical_density, compare_to_pde, interpolate_kernel, pairwise_drift,
    wrap_periodic,
)

__all__ = [
    'ParticleEnsemble',
    'SimConfig',
    'ParticleTrajectory',
    'drift_bound',
    'cfl_step',
    'sample_stable_increment',
    'sample_step_increments',
    'positive_stable',
    'symmetric_stable',
    'step_streams',
    'step',
    'simulate',
    'empirical_density',
    'compare_to_pde',
    'interpolate_kernel',
    'pairwise_drift',
    'wrap_periodic',
]
