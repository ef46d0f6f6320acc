"""
(α, β) 平面上的适定性区域扫描
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.experiments.config import SweepSection
from src.thresholds.calculator import linear_threshold, strong_threshold, threshold_report, weak_threshold
from src.thresholds.models import ParameterSet
from src.utils.exceptions import DataValidationError

logger = logging.getLogger(__name__)


def _cell(args: Tuple[float, float, object, object, object, int]) -> Dict[str, object]:
    alpha, beta, p, q, r, d = args
    return threshold_report(ParameterSet(alpha, beta, p, q, r, d)).to_row()


def run_threshold_sweep(alphas: Sequence[float], betas: Sequence[float], p="inf", q="inf", r="inf",
                        d: int = 1, workers: int = 1) -> pd.DataFrame:
    """
    每个 (α, β) 一行，列为 ThresholdReport 的全部字段（顺序固定）

    attrs['strong_subset_weak'] 逐格检查强区域 ⊆ 弱区域。
    """
    if len(alphas) == 0 or len(betas) == 0:
        raise DataValidationError("扫描网格为空", field_name="alphas")
    cells = [(float(a), float(b), p, q, r, d) for a in alphas for b in betas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]
    frame = pd.DataFrame(rows)
    frame.attrs["strong_subset_weak"] = bool(np.all(~frame["strong_ok"] | frame["weak_ok"]))
    logger.info(f"阈值扫描: {len(frame)} 个参数组, 弱可容许 {int(frame['weak_ok'].sum())} 个")
    return frame


def boundary_lines(alphas: Sequence[float], p="inf", q="inf", r="inf", d: int = 1) -> pd.DataFrame:
    """三条边界线 β = 1-α+d/p+α/r，β = 2-3α/2+d/p+α/r，β = (1-α)/2 的绘图数据"""
    rows = []
    for alpha in alphas:
        ps = ParameterSet(alpha, -1, p, q, r, d)
        rows.append({
            "alpha": float(alpha),
            "weak_beta": float(weak_threshold(ps)),
            "strong_beta": float(strong_threshold(ps)),
            "linear_beta": float(linear_threshold(ps)),
        })
    return pd.DataFrame(rows, columns=["alpha", "weak_beta", "strong_beta", "linear_beta"])


def sweep_from_section(section: SweepSection) -> Tuple[pd.DataFrame, pd.DataFrame]:
    alphas = np.linspace(section.alpha_min, section.alpha_max, section.alpha_points)
    betas = np.linspace(section.beta_min, section.beta_max, section.beta_points)
    frame = run_threshold_sweep(alphas, betas, section.p, section.q, section.r, section.d, section.workers)
    return frame, boundary_lines(alphas, section.p, section.q, section.r, section.d)


def write_threshold_sweep(frame: pd.DataFrame, lines: pd.DataFrame,
                          out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table, plot = out_dir / "threshold_sweep.csv", out_dir / "threshold_boundaries.csv"
    frame.to_csv(table, index=False)
    lines.to_csv(plot, index=False)
    return table, plot
