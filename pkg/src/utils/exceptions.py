"""
自定义异常类，提供更精确的错误处理
"""


class StableToolkitError(Exception):
    """数值工具箱的基础异常类"""
    exit_code = 1


class DataValidationError(StableToolkitError):
    """数据验证错误（前置条件不满足）"""
    exit_code = 2

    def __init__(self, message: str, field_name: str = None, expected_format: str = None):
        self.field_name = field_name
        self.expected_format = expected_format
        super().__init__(message)


class GridMismatchError(DataValidationError):
    """两个Field不在同一网格上"""
    pass


class ResolutionError(DataValidationError):
    """时间或尺度低于网格分辨率下限 (2·dx)^α"""

    def __init__(self, message: str, value: float = None, floor: float = None):
        self.value = value
        self.floor = floor
        super().__init__(message, field_name="time", expected_format=f">= {floor}")


class ExponentBookkeepingError(DataValidationError):
    """指数关系不成立 - 调用方错误，消息中包含失败的恒等式"""

    def __init__(self, message: str, identity: str = None):
        self.identity = identity
        super().__init__(message, field_name="exponents", expected_format=identity)


class NonFiniteFieldError(StableToolkitError):
    """Field中出现NaN/Inf"""
    exit_code = 3

    def __init__(self, message: str, tag: str = None):
        self.tag = tag
        super().__init__(message)


class NumericalDivergenceError(StableToolkitError):
    """数值发散（Picard迭代出现NaN等）"""
    exit_code = 3

    def __init__(self, message: str, iteration: int = None, time: float = None):
        self.iteration = iteration
        self.time = time
        super().__init__(message)


class ThresholdGateError(StableToolkitError):
    """参数不满足弱适定性条件 (C0)，且未设置覆盖标志"""
    exit_code = 4

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class ConfigurationError(StableToolkitError):
    """配置错误"""
    exit_code = 2


class ParticleEscapeError(StableToolkitError):
    """超过1%的粒子落在直方图网格之外"""
    exit_code = 2

    def __init__(self, message: str, fraction: float = None):
        self.fraction = fraction
        super().__init__(message)


class StageError(StableToolkitError):
    """流水线阶段错误，携带阶段名称和原始异常"""

    def __init__(self, message: str, stage: str = None, cause: Exception = None):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {message}")
