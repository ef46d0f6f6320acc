"""
pytest配置文件 - 全局测试配置和fixture

提供共享的网格、稳定律、核与求解器配置
"""

import json
import logging
import sys
from pathlib import Path

import pytest

# 添加项目路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.grid.operations import make_grid
from src.kernels.models import KernelSpec
from src.semigroup.models import StableLaw
from src.solver.models import InitialLaw, SolverConfig
from src.thresholds.models import ParameterSet

# 测试配置
TEST_CONFIG = {
    'LOG_LEVEL': logging.WARNING,  # 测试时降低日志级别
    'SEED': 20240601,
}

# 测试数据路径
TEST_DATA_DIR = project_root / 'tests' / 'fixtures'


@pytest.fixture(scope="session")
def test_config():
    """测试配置fixture"""
    return TEST_CONFIG


@pytest.fixture(autouse=True, scope="session")
def setup_test_logging():
    """库模块日志降到 WARNING"""
    logging.getLogger("src").setLevel(TEST_CONFIG['LOG_LEVEL'])
    return logging.getLogger('test')


@pytest.fixture
def grid_1d():
    """[-8, 8) 上 256 点"""
    return make_grid(1, 256, 8.0)


@pytest.fixture
def small_grid():
    """[-4, 4) 上 64 点，用于较重的求解"""
    return make_grid(1, 64, 4.0)


@pytest.fixture
def grid_2d():
    return make_grid(2, 32, 4.0)


@pytest.fixture
def brownian():
    return StableLaw(2.0)


@pytest.fixture
def stable_15():
    return StableLaw(1.5)


@pytest.fixture
def power_kernel():
    """奇异幂核 β = -0.5，p=q=r=∞"""
    return KernelSpec(family="power", beta=-0.5)


@pytest.fixture
def reference_params():
    return ParameterSet(2, "-0.5", "inf", "inf", "inf", 1)


@pytest.fixture
def gaussian_initial():
    return InitialLaw(kind="gaussian", variance=0.25)


@pytest.fixture
def zero_solver_config(small_grid, brownian, gaussian_initial):
    """零核: 解即自由演化"""
    return SolverConfig(grid=small_grid, law=brownian, kernel=KernelSpec(family="zero"),
                        initial=gaussian_initial, t=0.0, T=0.25, time_nodes=32)


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(TEST_CONFIG['SEED'])


# pytest插件配置
def pytest_collection_modifyitems(config, items):
    """自动标记测试"""
    for item in items:
        # 根据路径自动标记
        path = str(item.fspath)
        if "unit" in path:
            item.add_marker(pytest.mark.unit)
        elif "integration" in path:
            item.add_marker(pytest.mark.integration)
        elif "performance" in path:
            item.add_marker(pytest.mark.performance)

        # 标记慢速测试
        if "slow" in item.name.lower():
            item.add_marker(pytest.mark.slow)


# 测试用的实用函数
def load_test_data(filename):
    """加载测试数据文件"""
    file_path = TEST_DATA_DIR / filename
    if not file_path.exists():
        raise FileNotFoundError(f"测试数据文件不存在: {file_path}")
    with open(file_path, 'r', encoding='utf-8') as f:
        if filename.endswith('.json'):
            return json.load(f)
        return f.read()


@pytest.fixture
def fixture_config():
    """按文件名加载 tests/fixtures 下的实验配置"""
    from src.experiments.config import ExperimentConfig

    def _load(filename: str) -> ExperimentConfig:
        return ExperimentConfig.model_validate(load_test_data(filename))
    return _load


@pytest.fixture
def fixture_path():
    return lambda filename: str(TEST_DATA_DIR / filename)
