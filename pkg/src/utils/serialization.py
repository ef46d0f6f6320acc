"""
序列化工具 - 用于将报告、配置和数值对象转换为JSON可序列化格式
"""

import dataclasses
import math
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict

import numpy as np


def serialize_report(report: Any) -> Dict:
    """
    将报告对象（dataclass / pydantic模型 / 字典）转换为JSON可序列化的字典

    Args:
        report: 报告对象，可能包含numpy数组、Fraction、无穷大等

    Returns:
        转换后的JSON友好字典
    """
    if report is None:
        return {}

    try:
        converted = _convert_to_serializable(report)
        return converted if isinstance(converted, dict) else {"value": converted}
    except Exception as e:
        # 如果序列化失败，至少返回一个有用的错误信息
        return {
            "error": f"无法序列化报告: {str(e)}",
            "serialization_error": True,
            "timestamp": datetime.now(timezone.utc).isoformat()
        }


def _convert_to_serializable(obj: Any) -> Any:
    """递归地将对象转换为JSON可序列化格式"""
    if hasattr(obj, 'model_dump'):  # pydantic模型
        return _convert_to_serializable(obj.model_dump(mode="json"))
    elif hasattr(obj, 'to_dict') and not isinstance(obj, dict):  # pandas Series/DataFrame
        return _convert_to_serializable(obj.to_dict())
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _convert_to_serializable(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if f.repr}
    elif isinstance(obj, Fraction):
        return float(obj)
    elif isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    elif isinstance(obj, (int, np.integer)):
        return int(obj)
    elif isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    elif isinstance(obj, (str, type(None))):
        return obj
    elif isinstance(obj, np.ndarray):
        return [_convert_to_serializable(item) for item in obj.tolist()]
    elif isinstance(obj, (list, tuple)):
        return [_convert_to_serializable(item) for item in obj]
    elif isinstance(obj, dict):
        return {str(key): _convert_to_serializable(value) for key, value in obj.items()}
    elif isinstance(obj, datetime):
        return obj.isoformat()
    else:
        return str(obj)  # 回退到字符串表示
