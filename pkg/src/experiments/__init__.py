"""
实验配置、Peano噪声正则化实验、阈值扫描与全流程编排
"""

from .config import (
    ExperimentConfig, GridSection, LawSection, ParameterSection, SolverSection, ParticleSection,
    PeanoConfig, SweepSection, load_experiment_config, save_experiment_config,
)
from .peano import (
    PeanoReport, run_peano, run_peano_sweep, peano_drift, maximal_solution, envelope_constant,
    noise_threshold,
)
from .sweeps import run_threshold_sweep, boundary_lines, sweep_from_section, write_threshold_sweep
from .reporting import (
    CheckRecord, write_frame, write_trajectory, write_convergence, write_positions,
    write_particle_snapshots, write_summary,
)
from .pipeline import run_full_pipeline

__all__ = [
    'ExperimentConfig',
    'GridSection',
    'LawSection',
    'ParameterSection',
    'SolverSection',
    'ParticleSection',
    'PeanoConfig',
    'SweepSection',
    'load_experiment_config',
    'save_experiment_config',
    'PeanoReport',
    'run_peano',
    'run_peano_sweep',
    'peano_drift',
    'maximal_solution',
    'envelope_constant',
    'noise_threshold',
    'run_threshold_sweep',
    'boundary_lines',
    'sweep_from_section',
    'write_threshold_sweep',
    'CheckRecord',
    'write_frame',
    'write_trajectory',
    'write_convergence',
    'write_positions',
    'write_particle_snapshots',
    'write_summary',
    'run_full_pipeline',
]
