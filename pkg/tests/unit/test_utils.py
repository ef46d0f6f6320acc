"""
测试工具模块: 异常层次、序列化、终端输出、配置管理与日志
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest

from src.thresholds.calculator import threshold_report
from src.utils.config_manager import ConfigManager
from src.utils.exceptions import (
    ConfigurationError, DataValidationError, GridMismatchError, NumericalDivergenceError,
    ParticleEscapeError, StableToolkitError, StageError, ThresholdGateError,
)
from src.utils.logging_config import setup_logger
from src.utils.serialization import serialize_report
from src.utils.structured_terminal import (
    StructuredTerminalOutput, render_summary, render_threshold_report, summary_section,
)


class TestExceptions:
    """测试异常层次与退出码"""

    @pytest.mark.parametrize("error, code", [
        (DataValidationError("x"), 2),
        (GridMismatchError("x"), 2),
        (ConfigurationError("x"), 2),
        (ParticleEscapeError("x", fraction=0.5), 2),
        (NumericalDivergenceError("x", iteration=3), 3),
        (ThresholdGateError("x"), 4),
    ])
    def test_exit_codes(self, error, code):
        assert isinstance(error, StableToolkitError)
        assert error.exit_code == code

    def test_stage_error_inherits_exit_code(self):
        cause = ThresholdGateError("gate")
        error = StageError("stopped", stage="thresholds", cause=cause)
        assert error.stage == "thresholds"
        assert error.exit_code == 4
        assert StageError("stopped", stage="solve").exit_code == 1

    def test_context_fields(self):
        error = DataValidationError("bad", field_name="alpha", expected_format="(1, 2]")
        assert error.field_name == "alpha"
        assert error.expected_format == "(1, 2]"


class TestSerialization:
    """测试报告序列化"""

    def test_numeric_types(self):
        @dataclass
        class Sample:
            ratio: Fraction
            values: np.ndarray
            bound: float
            flag: np.bool_

        payload = serialize_report(Sample(Fraction(1, 4), np.array([1.0, np.inf]), math.nan, np.bool_(True)))
        assert payload == {"ratio": 0.25, "values": [1.0, "inf"], "bound": "nan", "flag": True}
        json.dumps(payload)

    def test_threshold_report_is_serializable(self, reference_params):
        payload = serialize_report(threshold_report(reference_params))
        text = json.dumps(payload, ensure_ascii=False)
        assert payload["weak_ok"] is True
        assert "gamma_gap" in text

    def test_scalars_and_none(self):
        assert serialize_report(None) == {}
        assert serialize_report(3) == {"value": 3}


class TestStructuredTerminal:
    """测试终端输出格式"""

    def test_sections_and_values(self):
        output = StructuredTerminalOutput("测试", width=40)
        output.set_metadata("seed", 7)
        output.add_section("summary", {"ok": True, "ratio": math.inf, "nested": {"x": None}})
        text = output.generate_output()
        assert "seed: 7" in text
        assert "✅" in text and "∞" in text and "N/A" in text

    def test_threshold_rendering(self, reference_params):
        text = render_threshold_report(threshold_report(reference_params))
        assert "适定性阈值" in text
        assert "2.66667" in text

    def test_summary_rendering(self):
        checks = [{"check": "solve.mass", "status": True, "detail": "1e-12"},
                  {"check": "weak_form.residual", "status": False, "detail": ""}]
        section = summary_section(checks)
        assert section["solve.mass"].startswith("✅")
        assert section["weak_form.residual"] == "❌"
        assert "solve.mass" in render_summary(checks)


class TestConfigManager:
    """测试环境变量配置"""

    def test_defaults(self, monkeypatch):
        for key in ("SOLVER_TIME_NODES", "PICARD_TOL", "SOLVER_QUADRATURE", "NEG_TOL"):
            monkeypatch.delenv(key, raising=False)
        manager = ConfigManager()
        assert manager.solver.quadrature in ("midpoint", "left", "product")
        assert manager.validate_configuration()
        assert set(manager.as_dict()) == {"numerics", "solver", "system"}

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("SOLVER_TIME_NODES", "64")
        monkeypatch.setenv("SOLVER_QUADRATURE", "simpson")
        manager = ConfigManager()
        assert manager.solver.time_nodes == 64
        assert not manager.validate_configuration()

    def test_malformed_value(self, monkeypatch):
        monkeypatch.setenv("PICARD_MAX", "many")
        with pytest.raises(ConfigurationError):
            ConfigManager()

    def test_env_template(self, tmp_path):
        path = tmp_path / ".env.example"
        ConfigManager().save_env_template(str(path))
        assert "PICARD_TOL" in path.read_text(encoding="utf-8")


class TestLoggingConfig:
    """测试命名logger的处理器配置"""

    def test_setup_logger_handlers(self, tmp_path):
        logger = setup_logger("test_toolkit_logger", log_dir=str(tmp_path), level=logging.WARNING)
        assert not logger.propagate
        assert len(logger.handlers) == 2
        assert (tmp_path / "test_toolkit_logger.log").exists()
        console = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)][0]
        assert console.level == logging.WARNING

    def test_repeated_setup_only_adjusts_console(self, tmp_path):
        setup_logger("test_toolkit_repeat", log_dir=str(tmp_path), level=logging.WARNING)
        logger = setup_logger("test_toolkit_repeat", log_dir=str(tmp_path), level=logging.INFO)
        assert len(logger.handlers) == 2
        levels = sorted(h.level for h in logger.handlers)
        assert levels == [logging.DEBUG, logging.INFO]
