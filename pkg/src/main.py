"""
命令行入口

    python -m src.main <子命令> --config experiment.json [--seed N] [--out DIR]
                       [--override-thresholds] [--quiet]

退出码: 0 成功, 2 配置/前置条件错误, 3 数值发散, 4 阈值闸门, 1 其他异常
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.besov.inequalities import heat_kernel_scaling
from src.besov.models import BesovIndex
from src.besov.norms import besov_norm
from src.experiments.config import (
    ExperimentConfig, PeanoConfig, load_experiment_config, save_experiment_config,
)
from src.experiments.peano import run_peano, run_peano_sweep
from src.experiments.pipeline import run_full_pipeline
from src.experiments.reporting import (
    CheckRecord, write_convergence, write_frame, write_particle_snapshots, write_summary,
    write_trajectory,
)
from src.experiments.sweeps import sweep_from_section, write_threshold_sweep
from src.grid.dump import write_field
from src.kernels.mollifier import mollifier_convergence
from src.particles.simulator import simulate
from src.solver.diagnostics import weak_form_residual
from src.solver.duhamel import picard_solve
from src.thresholds.calculator import threshold_report
from src.thresholds.models import reciprocal
from src.utils.exceptions import StableToolkitError
from src.utils.logging_config import ERROR_ICON, SUCCESS_ICON, configure_package_logging, setup_logger
from src.utils.structured_terminal import render_summary, render_threshold_report

logger = setup_logger('stable_toolkit')

HEAT_TIMES = (0.05, 0.1, 0.2, 0.4, 0.8)


def _out_dir(cfg: ExperimentConfig, args: argparse.Namespace, command: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(cfg.output_dir) / cfg.experiment_id / command


def _finish(checks: List[CheckRecord], out: Path, cfg: ExperimentConfig, quiet: bool):
    write_summary(checks, out, {"experiment_id": cfg.experiment_id, "seed": cfg.seed})
    if not quiet:
        print(render_summary([c.as_dict() for c in checks],
                             {"experiment": cfg.experiment_id, "seed": cfg.seed, "output": str(out)}))


# --- 子命令 ---

def cmd_grid(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """构造网格并转储初始密度"""
    out = _out_dir(cfg, args, "grid")
    grid = cfg.grid.build()
    rho0 = cfg.initial.as_field(grid)
    write_field(rho0, out / "initial.field")
    floor = grid.resolution_floor(cfg.law.alpha)
    logger.info(f"{grid.describe()}, 分辨率下限 {floor:.3e}")
    _finish([CheckRecord("grid.mass", abs(rho0.integral() - 1.0) < 1e-6, f"{rho0.integral():.8f}")],
            out, cfg, args.quiet)
    return out


def cmd_kernel(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """实现（并磨光）核；给出 ε 列表时输出磨光收敛表"""
    out = _out_dir(cfg, args, "kernel")
    kernel = cfg.build_kernel()
    for i, component in enumerate(kernel.components, start=1):
        write_field(component, out / f"b_{i}.field")
    checks = [CheckRecord("kernel.finite", bool(np.isfinite(kernel.sup_norm())),
                          f"|b|∞ = {kernel.sup_norm():.6g}")]
    eps_list = cfg.solver.eps_list
    if eps_list:
        claimed = cfg.kernel.claimed_class
        table = mollifier_convergence(cfg.kernel, cfg.grid.build(), claimed.beta - 0.2, eps_list,
                                      cfg.law.build())
        write_frame(table, out / "mollifier_convergence.csv")
        checks.append(CheckRecord("kernel.mollifier_decreasing", bool(table.attrs["trend_ok"]),
                                  f"热型速率 {table.attrs['fitted_rate']:.3g} (期望 {table.attrs['expected_rate']:.3g})"))
    _finish(checks, out, cfg, args.quiet)
    return out


def cmd_besov(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """热核Besov尺度拟合与初始密度的嵌入范数"""
    out = _out_dir(cfg, args, "besov")
    grid, law = cfg.grid.build(), cfg.law.build()
    ps = cfg.parameter_set()
    checks = []
    rows = []
    for gamma in (-0.5, 0.0, 0.5):
        idx = BesovIndex(gamma, float(ps.p), "inf")
        for order in (0, 1):
            slope, expected, _ = heat_kernel_scaling(grid, law, idx, HEAT_TIMES, order=order,
                                                     thermic_only=True)
            rows.append({"gamma": gamma, "ell": float(ps.p), "order": order,
                         "slope": slope, "expected": expected})
    table = pd.DataFrame(rows, columns=["gamma", "ell", "order", "slope", "expected"])
    write_frame(table, out / "heat_kernel_scaling.csv")
    worst = float(np.max(np.abs(table["slope"] - table["expected"])))
    checks.append(CheckRecord("besov.heat_kernel_slopes", worst < 0.05, f"最大偏差 {worst:.3g}"))
    embedding = BesovIndex(-grid.d * (1.0 - float(reciprocal(ps.p))), float(ps.p), "inf")
    value = besov_norm(cfg.initial.as_field(grid), embedding, law)
    checks.append(CheckRecord("besov.initial_embedding", bool(np.isfinite(value)), f"{value:.6g}"))
    _finish(checks, out, cfg, args.quiet)
    return out


def cmd_thresholds(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """阈值报告（终端+CSV），配置了 sweep 节时加做 (α, β) 扫描"""
    out = _out_dir(cfg, args, "thresholds")
    report = threshold_report(cfg.parameter_set())
    if not args.quiet:
        print(render_threshold_report(report))
    write_frame(pd.DataFrame([report.to_row()]), out / "thresholds.csv")
    if cfg.sweep is not None:
        frame, lines = sweep_from_section(cfg.sweep)
        write_threshold_sweep(frame, lines, out)
    logger.info(f"阈值报告已写入 {out}")
    return out


def cmd_solve(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """Picard求解 + 守恒检查 + 弱形式残差"""
    out = _out_dir(cfg, args, "solve")
    solver_cfg = cfg.build_solver_config(override=args.override_thresholds or None)
    result = picard_solve(solver_cfg)
    write_trajectory(result.trajectory, out / "trajectory")
    write_convergence(result, out / "convergence.csv")
    invariants = result.trajectory.check_invariants()
    residual = weak_form_residual(result.trajectory, solver_cfg)
    checks = [
        CheckRecord("solve.converged", result.converged, f"{result.iterations} 次迭代"),
        CheckRecord("solve.mass", invariants["mass_ok"], f"最大偏差 {invariants['max_mass_error']:.3e}"),
        CheckRecord("solve.negativity", invariants["negativity_ok"], f"最小值 {invariants['min_value']:.3e}"),
        CheckRecord("solve.weak_form", residual < 1e-3, f"{residual:.3e}"),
    ]
    _finish(checks, out, cfg, args.quiet)
    return out


def cmd_particles(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """粒子系统模拟，输出各记录时刻的位置与分箱密度"""
    out = _out_dir(cfg, args, "particles")
    solver_cfg = cfg.build_solver_config(override=args.override_thresholds or None)
    sim_cfg = cfg.build_sim_config(solver_cfg)
    sim = simulate(sim_cfg)
    write_particle_snapshots(sim, out, solver_cfg.grid)
    summary = sim.summary()
    (out / "particles.json").write_text(json.dumps(summary, ensure_ascii=False, indent=2, default=float),
                                        encoding="utf-8")
    _finish([CheckRecord("particles.wraps", not sim.flagged, f"回绕率 {sim.wrap_rate:.2e}")],
            out, cfg, args.quiet)
    return out


def cmd_peano(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    """扰动Peano实验；peano.betas 非空时做 β 扫描"""
    out = _out_dir(cfg, args, "peano")
    peano = cfg.peano or PeanoConfig(seed=cfg.seed)
    checks = []
    if peano.betas:
        frame = run_peano_sweep(peano, workers=cfg.solver.workers)
        write_frame(frame, out / "peano_sweep.csv")
        checks.append(CheckRecord("peano.spread_monotone", frame.attrs["spread_monotone"], "描述性"))
    else:
        report = run_peano(peano)
        write_frame(pd.DataFrame([report.to_row()]), out / "peano.csv")
        write_frame(report.law_frame(), out / "peano_quantiles.csv")
        if report.tracking is not None:
            write_frame(report.tracking, out / "peano_tracking.csv")
        if report.relative_error is not None:
            checks.append(CheckRecord("peano.envelope", report.relative_error < 0.01,
                                      f"相对误差 {report.relative_error:.2e}"))
        else:
            checks.append(CheckRecord("peano.run", True, report.mode))
    _finish(checks, out, cfg, args.quiet)
    return out


def cmd_pipeline(cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
    out = Path(args.out) if args.out else None
    path = run_full_pipeline(cfg, out, override=args.override_thresholds or None)
    if not args.quiet:
        rows = pd.read_csv(path / "summary.csv").to_dict("records")
        print(render_summary(rows, {"experiment": cfg.experiment_id, "output": str(path)}))
    return path


COMMANDS: Dict[str, Callable[[ExperimentConfig, argparse.Namespace], Path]] = {
    "grid": cmd_grid,
    "kernel": cmd_kernel,
    "besov": cmd_besov,
    "thresholds": cmd_thresholds,
    "solve": cmd_solve,
    "particles": cmd_particles,
    "peano": cmd_peano,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='稳定噪声McKean-Vlasov数值工具箱')
    parser.add_argument('command', choices=sorted(COMMANDS),
                        help='要运行的子命令')
    parser.add_argument('--config', type=str,
                        help='实验配置JSON路径（缺省使用全部默认值）')
    parser.add_argument('--seed', type=int,
                        help='覆盖配置中的随机种子')
    parser.add_argument('--out', type=str,
                        help='输出目录（缺省为 output_dir/experiment_id/子命令）')
    parser.add_argument('--override-thresholds', action='store_true',
                        help='允许违反弱适定性条件的探索性运行')
    parser.add_argument('--quiet', action='store_true',
                        help='只输出警告与错误')
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_experiment_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        updates = {"seed": args.seed}
        if cfg.peano is not None:
            updates["peano"] = cfg.peano.model_copy(update={"seed": args.seed})
        cfg = cfg.model_copy(update=updates)
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.INFO
    setup_logger('stable_toolkit', level=level)
    configure_package_logging(level)
    try:
        cfg = load_config(args)
        out = COMMANDS[args.command](cfg, args)
        if args.command != "pipeline":
            save_experiment_config(cfg, out / "config.json")
        logger.info(f"{SUCCESS_ICON} {args.command} 完成: {out}")
        return 0
    except ValidationError as e:
        logger.error(f"{ERROR_ICON} 配置校验失败: {e}")
        return 2
    except StableToolkitError as e:
        logger.error(f"{ERROR_ICON} {type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"{ERROR_ICON} 未预期的错误: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
