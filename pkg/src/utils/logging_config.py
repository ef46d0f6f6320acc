"""
日志配置

命令行与实验驱动使用 setup_logger 创建命名logger；库模块统一使用
logging.getLogger(__name__)，由 configure_package_logging 在 "src" 上挂载处理器。
"""
import os
import logging
from typing import Optional

from src.utils.config_manager import get_system_config

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
PACKAGE_LOGGER = "src"

# 预定义的图标
SUCCESS_ICON = "✓"
ERROR_ICON = "✗"


def _resolve_log_dir(log_dir: Optional[str]) -> str:
    """参数 > LOG_DIR 环境变量 > 项目根目录下的 logs/"""
    log_dir = log_dir or get_system_config().log_dir
    if log_dir is None:
        log_dir = os.path.join(os.path.dirname(os.path.dirname(
            os.path.dirname(os.path.abspath(__file__)))), 'logs')
    os.makedirs(log_dir, exist_ok=True)
    return log_dir


def _resolve_level(level: Optional[int]) -> int:
    if level is not None:
        return level
    configured = logging.getLevelName(get_system_config().log_level.upper())
    return configured if isinstance(configured, int) else logging.INFO


def _attach_handlers(logger: logging.Logger, file_stem: str, level: int,
                     log_dir: Optional[str]) -> None:
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)

    log_file = os.path.join(_resolve_log_dir(log_dir), f"{file_stem}.log")
    file_handler = logging.FileHandler(log_file, encoding='utf-8')
    file_handler.setLevel(logging.DEBUG)  # 文件保留Picard逐次增量等DEBUG信息
    file_handler.setFormatter(formatter)

    logger.addHandler(console_handler)
    logger.addHandler(file_handler)


def _set_console_level(logger: logging.Logger, level: int) -> None:
    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


def setup_logger(name: str, log_dir: Optional[str] = None,
                 level: Optional[int] = None) -> logging.Logger:
    """创建或复用命名logger

    Args:
        name: logger的名称，同时作为日志文件名
        log_dir: 日志文件目录，缺省取 LOG_DIR 或项目下的 logs/
        level: 控制台日志级别，缺省取 LOG_LEVEL；--quiet 时为 WARNING

    Returns:
        配置好的logger实例
    """
    level = _resolve_level(level)
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # 重复调用只调整控制台级别
    if logger.handlers:
        _set_console_level(logger, level)
        return logger

    _attach_handlers(logger, name, level, log_dir)
    return logger


def configure_package_logging(level: Optional[int] = None,
                              log_dir: Optional[str] = None) -> logging.Logger:
    """
    给库模块（src.grid、src.solver 等）挂载控制台与 numerics.log 文件处理器

    边界质量、粒子回绕、探索模式等警告经由此logger输出。
    """
    level = _resolve_level(level)
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    if logger.handlers:
        _set_console_level(logger, level)
    else:
        _attach_handlers(logger, "numerics", level, log_dir)
    return logger
