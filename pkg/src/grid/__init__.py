"""
周期网格、谱变换、卷积与Lᵖ范数 - 其余模块的数值基底
"""

from .models import Grid, Field, SpectralField, field_from_multiplier
from .operations import (
    make_grid, convolve, convolve_vector, lp_norm, vector_lp_norm, pairing,
    l1_distance, parse_exponent, conjugate_exponent, reciprocal, VectorField,
)
from .dump import dumps_field, loads_field, write_field, read_field

__all__ = [
    'Grid',
    'Field',
    'SpectralField',
    'VectorField',
    'field_from_multiplier',
    'make_grid',
    'convolve',
    'convolve_vector',
    'lp_norm',
    'vector_lp_norm',
    'pairing',
    'l1_distance',
    'parse_exponent',
    'conjugate_exponent',
    'reciprocal',
    'dumps_field',
    'loads_field',
    'write_field',
    'read_field',
]
