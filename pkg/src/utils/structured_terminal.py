"""
结构化终端输出模块

收集阈值报告、求解诊断与流水线检查结果，以带边框的树形格式一次性展示。
只负责终端输出的格式化，不参与任何计算。
"""

import math
from typing import Any, Dict, List, Optional, Sequence

from src.utils.logging_config import setup_logger

# 设置日志记录器
logger = setup_logger('structured_terminal')

# 格式化符号
SYMBOLS = {
    "border": "═",
    "header_left": "╔",
    "header_right": "╗",
    "footer_left": "╚",
    "footer_right": "╝",
    "separator": "─",
    "vertical": "║",
    "tree_branch": "├─",
    "tree_last": "└─",
    "section_prefix": "● ",
}

# 状态图标
STATUS_ICONS = {
    "completed": "✅",
    "error": "❌",
    "warning": "⚠️",
    "skipped": "⏭️",
}

# 分区图标和名称映射
SECTION_MAP = {
    "thresholds": {"icon": "📐", "name": "适定性阈值"},
    "solver": {"icon": "🧮", "name": "Picard求解"},
    "diagnostics": {"icon": "🔬", "name": "诊断"},
    "particles": {"icon": "🎲", "name": "粒子模拟"},
    "peano": {"icon": "📈", "name": "Peano实验"},
    "summary": {"icon": "📋", "name": "检查汇总"},
}


class StructuredTerminalOutput:
    """结构化终端输出类"""

    def __init__(self, title: str = "数值实验报告", width: int = 80):
        self.title = title
        self.width = width
        self.sections: Dict[str, Any] = {}
        self.metadata: Dict[str, Any] = {}

    def set_metadata(self, key: str, value: Any) -> None:
        self.metadata[key] = value

    def add_section(self, name: str, data: Any) -> None:
        self.sections[name] = data

    def _format_value(self, value: Any) -> str:
        """格式化单个值"""
        if isinstance(value, bool):
            return STATUS_ICONS["completed"] if value else STATUS_ICONS["error"]
        if isinstance(value, float):
            if math.isinf(value):
                return "∞" if value > 0 else "-∞"
            if math.isnan(value):
                return "N/A"
            return f"{value:.6g}"
        if value is None:
            return "N/A"
        return str(value)

    def _format_dict_as_tree(self, data: Dict[str, Any], indent: int = 0) -> List[str]:
        """将字典格式化为树形结构"""
        result = []
        items = list(data.items())

        for i, (key, value) in enumerate(items):
            prefix = SYMBOLS["tree_last"] if i == len(items) - 1 else SYMBOLS["tree_branch"]
            indent_str = "  " * indent

            if isinstance(value, dict) and value:
                result.append(f"{indent_str}{prefix} {key}:")
                result.extend(self._format_dict_as_tree(value, indent + 1))
            elif isinstance(value, (list, tuple)) and value and not isinstance(value[0], (int, float)):
                result.append(f"{indent_str}{prefix} {key}:")
                for j, item in enumerate(value):
                    sub_prefix = SYMBOLS["tree_last"] if j == len(value) - 1 else SYMBOLS["tree_branch"]
                    result.append(f"{indent_str}  {sub_prefix} {self._format_value(item)}")
            else:
                if isinstance(value, (list, tuple)):
                    value = "[" + ", ".join(self._format_value(v) for v in value) + "]"
                result.append(f"{indent_str}{prefix} {key}: {self._format_value(value)}")

        return result

    def _format_section(self, name: str, data: Any) -> List[str]:
        """带边框的分区"""
        info = SECTION_MAP.get(name, {"icon": "🔄", "name": name})
        width = self.width
        title = f"{info['icon']} {info['name']}"
        result = [
            f"{SYMBOLS['header_left']}{SYMBOLS['border'] * (width - 2)}{SYMBOLS['header_right']}",
            f"{SYMBOLS['vertical']} {title}",
            f"{SYMBOLS['vertical']}{SYMBOLS['separator'] * (width - 2)}",
        ]
        lines = self._format_dict_as_tree(data) if isinstance(data, dict) else [str(data)]
        result.extend(f"{SYMBOLS['vertical']} {line}" for line in lines)
        result.append(f"{SYMBOLS['footer_left']}{SYMBOLS['border'] * (width - 2)}{SYMBOLS['footer_right']}")
        return result

    def generate_output(self) -> str:
        """生成格式化输出"""
        width = self.width
        result = [SYMBOLS["border"] * width, f"{self.title:^{width}}", SYMBOLS["border"] * width]
        for key, value in self.metadata.items():
            result.append(f"{key}: {self._format_value(value)}")
        if self.metadata:
            result.append("")
        for name, data in self.sections.items():
            result.extend(self._format_section(name, data))
            result.append("")
        result.append(SYMBOLS["border"] * width)
        return "\n".join(result)

    def print_output(self) -> None:
        logger.info("\n" + self.generate_output())


def threshold_section(report) -> Dict[str, Any]:
    """ThresholdReport → 可展示的字典"""
    from src.thresholds.models import format_exact

    section = {
        "参数": report.params.describe(),
        "间隙 Γ": format_exact(report.gamma_gap),
        "弱条件 (Γ > 0)": report.weak_ok,
        "强条件": report.strong_ok,
        "线性条件": report.linear_ok,
        "弱阈值 β >": format_exact(report.weak_threshold),
        "强阈值 β >": format_exact(report.strong_threshold),
        "线性阈值 β >": format_exact(report.linear_threshold),
        "r̄ 区间": f"[{format_exact(report.rbar_interval[0])}, {format_exact(report.rbar_interval[1])})",
        "推荐 r̄": format_exact(report.recommended_rbar),
        "Krylov-Röckner": report.kr_ok,
    }
    cert = report.xz_certificate
    if cert is not None:
        section["强适定性见证"] = {
            "γ": format_exact(cert.gamma),
            "ℓ": cert.ell,
            "𝔰": format_exact(cert.s_exponent),
            "已校验": cert.verified,
        }
    if report.notes:
        section["备注"] = list(report.notes)
    return section


def summary_section(checks: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """检查记录列表 → {检查名: 状态 + 说明}"""
    section = {}
    for check in checks:
        icon = STATUS_ICONS["completed"] if check["status"] else STATUS_ICONS["error"]
        detail = check.get("detail") or ""
        section[check["check"]] = f"{icon} {detail}".strip()
    return section


def render_threshold_report(report, title: Optional[str] = None) -> str:
    output = StructuredTerminalOutput(title or "适定性阈值报告")
    output.add_section("thresholds", threshold_section(report))
    return output.generate_output()


def render_summary(checks: Sequence[Dict[str, Any]], metadata: Optional[Dict[str, Any]] = None) -> str:
    output = StructuredTerminalOutput("流水线检查汇总")
    for key, value in (metadata or {}).items():
        output.set_metadata(key, value)
    output.add_section("summary", summary_section(checks))
    return output.generate_output()
