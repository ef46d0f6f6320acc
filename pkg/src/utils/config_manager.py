"""
统一配置管理模块

数值默认值从环境变量加载（支持 .env 文件），实验级配置见 src.experiments.config
"""
import os
import logging
from dataclasses import dataclass, asdict
from typing import Optional, Dict, Any

from dotenv import load_dotenv

from src.utils.exceptions import ConfigurationError


@dataclass
class NumericsConfig:
    """数值计算配置"""
    fft_workers: int = 1
    boundary_mass_warn: float = 1e-3
    thermic_nodes: int = 200
    phi_radius: float = 1.0
    neg_tol: float = 1e-3


@dataclass
class SolverDefaults:
    """Picard求解器默认配置"""
    time_nodes: int = 256
    picard_tol: float = 1e-8
    picard_max: int = 50
    quadrature: str = "midpoint"


@dataclass
class SystemConfig:
    """系统配置"""
    log_level: str = "INFO"
    log_dir: Optional[str] = None
    output_dir: str = "results"


class ConfigManager:
    """配置管理器"""

    def __init__(self):
        self._numerics_config: Optional[NumericsConfig] = None
        self._solver_defaults: Optional[SolverDefaults] = None
        self._system_config: Optional[SystemConfig] = None
        self._logger = logging.getLogger(__name__)

        self._load_configs()

    def _load_configs(self):
        """加载所有配置"""
        try:
            load_dotenv()
            self._numerics_config = self._load_numerics_config()
            self._solver_defaults = self._load_solver_defaults()
            self._system_config = self._load_system_config()
            self._logger.debug("配置加载完成")
        except Exception as e:
            raise ConfigurationError(f"配置加载失败: {str(e)}")

    def _load_numerics_config(self) -> NumericsConfig:
        """加载数值配置"""
        return NumericsConfig(
            fft_workers=int(os.getenv("FFT_WORKERS", "1")),
            boundary_mass_warn=float(os.getenv("BOUNDARY_MASS_WARN", "1e-3")),
            thermic_nodes=int(os.getenv("THERMIC_NODES", "200")),
            phi_radius=float(os.getenv("PHI_RADIUS", "1.0")),
            neg_tol=float(os.getenv("NEG_TOL", "1e-3"))
        )

    def _load_solver_defaults(self) -> SolverDefaults:
        """加载求解器默认配置"""
        return SolverDefaults(
            time_nodes=int(os.getenv("SOLVER_TIME_NODES", "256")),
            picard_tol=float(os.getenv("PICARD_TOL", "1e-8")),
            picard_max=int(os.getenv("PICARD_MAX", "50")),
            quadrature=os.getenv("SOLVER_QUADRATURE", "midpoint")
        )

    def _load_system_config(self) -> SystemConfig:
        """加载系统配置"""
        return SystemConfig(
            log_level=os.getenv("LOG_LEVEL", "INFO"),
            log_dir=os.getenv("LOG_DIR") or None,
            output_dir=os.getenv("OUTPUT_DIR", "results")
        )

    @property
    def numerics(self) -> NumericsConfig:
        """获取数值配置"""
        return self._numerics_config

    @property
    def solver(self) -> SolverDefaults:
        """获取求解器默认配置"""
        return self._solver_defaults

    @property
    def system(self) -> SystemConfig:
        """获取系统配置"""
        return self._system_config

    def as_dict(self) -> Dict[str, Any]:
        return {
            "numerics": asdict(self._numerics_config),
            "solver": asdict(self._solver_defaults),
            "system": asdict(self._system_config),
        }

    def validate_configuration(self) -> bool:
        """验证配置的有效性"""
        errors = []

        if self._numerics_config.fft_workers < 1:
            errors.append("FFT_WORKERS必须大于等于1")
        if self._numerics_config.thermic_nodes < 2:
            errors.append("THERMIC_NODES至少为2")
        if self._numerics_config.phi_radius <= 0:
            errors.append("PHI_RADIUS必须大于0")
        if self._solver_defaults.time_nodes < 2:
            errors.append("SOLVER_TIME_NODES至少为2")
        if not 0 < self._solver_defaults.picard_tol < 1:
            errors.append("PICARD_TOL必须在(0,1)之间")
        if self._solver_defaults.quadrature not in ("midpoint", "left", "product"):
            errors.append("SOLVER_QUADRATURE必须是 midpoint / left / product")

        if errors:
            error_msg = "配置验证失败:\n" + "\n".join(f"- {error}" for error in errors)
            self._logger.error(error_msg)
            return False

        return True

    def get_env_template(self) -> str:
        """获取环境变量模板"""
        return """# 数值工具箱环境配置

# 数值配置
FFT_WORKERS=1
BOUNDARY_MASS_WARN=1e-3
THERMIC_NODES=200
PHI_RADIUS=1.0
NEG_TOL=1e-3

# Picard求解器
SOLVER_TIME_NODES=256
PICARD_TOL=1e-8
PICARD_MAX=50
SOLVER_QUADRATURE=midpoint

# 系统配置
LOG_LEVEL=INFO
LOG_DIR=
OUTPUT_DIR=results
"""

    def save_env_template(self, file_path: str = ".env.example"):
        """保存环境变量模板到文件"""
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(self.get_env_template())
        self._logger.info(f"环境变量模板已保存到: {file_path}")


# 全局配置实例
_config_manager: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """获取全局配置实例"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reload_config():
    """重新加载配置"""
    global _config_manager
    _config_manager = ConfigManager()


# 便捷函数
def get_numerics_config() -> NumericsConfig:
    """获取数值配置"""
    return get_config().numerics


def get_solver_defaults() -> SolverDefaults:
    """获取求解器默认配置"""
    return get_config().solver


def get_system_config() -> SystemConfig:
    """获取系统配置"""
    return get_config().system
