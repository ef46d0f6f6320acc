"""
测试网格、场与转储格式
"""

import numpy as np
import pytest

from src.grid.dump import dumps_field, loads_field, read_field, write_field
from src.grid.models import Field, Grid
from src.grid.operations import (
    conjugate_exponent, convolve, l1_distance, lp_norm, make_grid, pairing, parse_exponent,
)
from src.utils.exceptions import DataValidationError, GridMismatchError, NonFiniteFieldError


class TestGridConstruction:
    """测试网格构造与前置条件"""

    @pytest.mark.parametrize("n", [16, 48, 100])
    def test_rejects_bad_point_count(self, n):
        with pytest.raises(DataValidationError):
            make_grid(1, n, 4.0)

    def test_rejects_bad_dimension_and_extent(self):
        with pytest.raises(DataValidationError):
            make_grid(3, 32, 4.0)
        with pytest.raises(DataValidationError):
            make_grid(1, 32, 0.0)

    def test_spacing_and_axis(self, grid_1d):
        assert grid_1d.dx == pytest.approx(16.0 / 256)
        assert grid_1d.axis[0] == -8.0
        assert grid_1d.axis[grid_1d.origin_index[0]] == pytest.approx(0.0)
        assert grid_1d.resolution_floor(2.0) == pytest.approx((2 * grid_1d.dx) ** 2)

    def test_grid_equality_is_structural(self):
        assert make_grid(1, 64, 4.0) == Grid(1, 64, 4.0)
        assert make_grid(1, 64, 4.0) != make_grid(1, 64, 8.0)


class TestFieldOperations:
    """测试场的代数与诊断"""

    def test_values_are_read_only(self, grid_1d):
        f = Field.zeros(grid_1d)
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_rejects_nan(self, grid_1d):
        values = np.zeros(grid_1d.shape)
        values[3] = np.nan
        with pytest.raises(NonFiniteFieldError):
            Field(grid_1d, values, tag="bad")

    def test_rejects_grid_mismatch(self, grid_1d, small_grid):
        with pytest.raises(GridMismatchError):
            Field.zeros(grid_1d) + Field.zeros(small_grid)

    def test_gaussian_and_delta_have_unit_mass(self, grid_1d, grid_2d):
        assert Field.gaussian(grid_1d, 0.25).integral() == pytest.approx(1.0, abs=1e-10)
        assert Field.gaussian(grid_2d, 0.25).integral() == pytest.approx(1.0, abs=1e-8)
        assert Field.delta(grid_1d).integral() == pytest.approx(1.0)

    def test_reflect_and_shift(self, grid_1d):
        g = Field.gaussian(grid_1d, 0.5)
        assert np.allclose(g.reflect().values, g.values)
        shifted = g.shift_cells(5)
        assert shifted.integral() == pytest.approx(g.integral())
        assert np.argmax(shifted.values) == grid_1d.origin_index[0] + 5

    def test_boundary_mass_of_narrow_gaussian_is_small(self, grid_1d):
        assert Field.gaussian(grid_1d, 0.25).boundary_mass() < 1e-12
        assert Field.constant(grid_1d, 1.0).boundary_mass() > 1.0


class TestSpectralRepresentation:
    """测试谱约定"""

    def test_round_trip(self, grid_2d):
        rng = np.random.default_rng(3)
        f = Field(grid_2d, rng.normal(size=grid_2d.shape))
        back = f.to_spectral().to_physical()
        assert np.allclose(back.values, f.values, atol=1e-12)

    def test_zero_frequency_is_mass(self, grid_1d):
        g = Field.gaussian(grid_1d, 0.3)
        assert g.to_spectral().coefficients[0].real == pytest.approx(g.integral())

    def test_parseval(self, grid_1d):
        g = Field.gaussian(grid_1d, 0.3)
        assert g.to_spectral().energy() == pytest.approx(lp_norm(g, 2) ** 2, rel=1e-10)

    def test_delta_is_convolution_identity(self, grid_1d):
        g = Field.gaussian(grid_1d, 0.4)
        assert np.allclose(convolve(Field.delta(grid_1d), g).values, g.values, atol=1e-12)


class TestNorms:
    """测试Lᵖ范数与指数解析"""

    def test_parse_exponent(self):
        assert parse_exponent("inf") == np.inf
        assert parse_exponent("∞") == np.inf
        assert parse_exponent(2) == 2.0
        assert conjugate_exponent(1) == np.inf
        assert conjugate_exponent("inf") == 1.0
        assert conjugate_exponent(2) == 2.0

    def test_constant_norms(self, small_grid):
        one = Field.constant(small_grid, 1.0)
        assert lp_norm(one, 1) == pytest.approx(8.0)
        assert lp_norm(one, 2) == pytest.approx(np.sqrt(8.0))
        assert lp_norm(one, "inf") == 1.0

    def test_rejects_exponent_below_one(self, small_grid):
        with pytest.raises(DataValidationError):
            lp_norm(Field.zeros(small_grid), 0.5)

    def test_pairing_and_distance(self, grid_1d):
        g = Field.gaussian(grid_1d, 0.3)
        assert pairing(g, Field.constant(grid_1d, 1.0)) == pytest.approx(g.integral())
        assert l1_distance(g, g) == 0.0


class TestFieldDump:
    """测试转储格式"""

    def test_bit_exact_round_trip(self, tmp_path, grid_2d):
        rng = np.random.default_rng(11)
        f = Field(grid_2d, rng.normal(size=grid_2d.shape), tag="noise")
        path = write_field(f, tmp_path / "f.field")
        back = read_field(path)
        assert back.grid == f.grid
        assert back.tag == "noise"
        assert back.values.tobytes() == f.values.tobytes()

    def test_header_layout(self, small_grid):
        head = dumps_field(Field.zeros(small_grid)).split(b"\n\n", 1)[0].decode("utf-8")
        keys = [line.split(":", 1)[0] for line in head.splitlines()]
        assert keys == ["dimension", "n", "L", "tag", "endianness"]

    def test_rejects_truncated_payload(self, small_grid):
        data = dumps_field(Field.zeros(small_grid))
        with pytest.raises(DataValidationError):
            loads_field(data[:-8])
