"""
全流程编排: 核实现 → 磨光 → 阈值闸门 → Picard求解 → 先验范数 → ε稳定性 → 粒子比较

任一阶段失败即以带阶段名的 StageError 终止，已写出的产物与汇总保留。
"""

import json
import logging
from pathlib import Path
from typing import Callable, List, Optional, Union

import numpy as np

from src.experiments.config import ExperimentConfig, save_experiment_config
from src.experiments.reporting import (
    CheckRecord, write_convergence, write_frame, write_particle_snapshots, write_summary,
    write_trajectory,
)
from src.grid.dump import write_field
from src.kernels.models import SINGULAR_FAMILIES, KernelRealization
from src.particles.simulator import compare_to_pde, simulate
from src.solver.diagnostics import apriori_report, epsilon_stability_study, weak_form_residual
from src.solver.duhamel import picard_solve
from src.solver.models import SolverConfig
from src.thresholds.calculator import adjusted_rbar_interval, threshold_report
from src.utils.exceptions import StableToolkitError, StageError, ThresholdGateError
from src.utils.logging_config import ERROR_ICON, SUCCESS_ICON
from src.utils.serialization import serialize_report

logger = logging.getLogger(__name__)

RESIDUAL_LIMIT = 1e-3
MASS_TOL = 1e-6


class _Pipeline:
    def __init__(self, cfg: ExperimentConfig, out_dir: Path, override: bool):
        self.cfg = cfg
        self.out = out_dir
        self.override = override
        self.checks: List[CheckRecord] = []
        self.realization: Optional[KernelRealization] = None
        self.solver_cfg: Optional[SolverConfig] = None
        self.result = None

    def check(self, name: str, status: bool, detail: str = ""):
        self.checks.append(CheckRecord(name, bool(status), detail))
        logger.info(f"{SUCCESS_ICON if status else ERROR_ICON} {name} {detail}")

    def stage(self, name: str, body: Callable[[], None]):
        logger.info(f"阶段 {name} 开始")
        try:
            body()
        except StableToolkitError as e:
            self.check(name, False, str(e))
            raise StageError(str(e), stage=name, cause=e) from e

    # --- 各阶段 ---

    def kernel(self):
        kernel = self.realization = self.cfg.build_kernel()
        for i, component in enumerate(kernel.components, start=1):
            write_field(component, self.out / "kernel" / f"b_{i}.field")
        self.check("kernel.realized", True, f"|b|∞ = {kernel.sup_norm():.6g}")

    def thresholds(self):
        report = threshold_report(self.cfg.parameter_set())
        (self.out / "thresholds.json").write_text(
            json.dumps(serialize_report(report), ensure_ascii=False, indent=2, sort_keys=True), encoding="utf-8")
        self.check("thresholds.weak", report.weak_ok, f"Γ = {float(report.gamma_gap):.6g}")
        if not report.weak_ok and not self.override:
            raise ThresholdGateError("参数不满足弱适定性条件，未设置覆盖标志", report=report)
        self.solver_cfg = self.cfg.build_solver_config(override=self.override, kernel=self.realization)

    def solve(self):
        self.result = picard_solve(self.solver_cfg)
        traj = self.result.trajectory
        write_trajectory(traj, self.out / "trajectory")
        write_convergence(self.result, self.out / "convergence.csv")
        invariants = traj.check_invariants(mass_tol=MASS_TOL)
        self.check("solve.converged", self.result.converged, f"{self.result.iterations} 次迭代")
        self.check("solve.mass", invariants["mass_ok"], f"最大偏差 {invariants['max_mass_error']:.3e}")
        self.check("solve.negativity", invariants["negativity_ok"], f"最小值 {invariants['min_value']:.3e}")

    def weak_form(self):
        residual = weak_form_residual(self.result.trajectory, self.solver_cfg)
        self.check("weak_form.residual", residual < RESIDUAL_LIMIT, f"{residual:.3e}")

    def apriori(self):
        section = self.cfg.solver
        rbar = section.rbar
        if rbar is None:
            rbar = adjusted_rbar_interval(self.solver_cfg.params, section.vartheta)[0]
        report = apriori_report(self.result.trajectory, self.solver_cfg, section.vartheta, rbar)
        self.check("apriori.finite", report.finite,
                   f"plain={report.plain_integral:.4g}, weighted={report.weighted_norm:.4g}")

    def epsilon_stability(self):
        section = self.cfg.solver
        frame = epsilon_stability_study(self.solver_cfg.evolve(kernel=self.cfg.kernel), section.eps_list,
                                        vartheta=section.vartheta, rbar=section.rbar)
        write_frame(frame, self.out / "epsilon_stability.csv")
        self.check("epsilon.decreasing", frame.attrs["decreasing"],
                   f"末/首 = {frame.attrs['decay_ratio']:.3g}")
        self.check("epsilon.ratio_bounded", frame.attrs["ratio_spread"] < 10.0,
                   f"离散度 {frame.attrs['ratio_spread']:.3g}")

    def particles(self):
        section = self.cfg.particles
        sim_cfg = self.cfg.build_sim_config(self.solver_cfg)
        fp = self.result.trajectory
        offsets = (fp.times - sim_cfg.t0) / sim_cfg.dt
        on_grid = np.abs(offsets - np.round(offsets)) < 1e-9
        record = [float(s) for s in fp.times[on_grid] if s - sim_cfg.t0 <= sim_cfg.horizon + 1e-12]
        sim = simulate(sim_cfg, record_times=record)
        write_particle_snapshots(sim, self.out / "particles", fp.grid)
        table = compare_to_pde(sim, fp)
        write_frame(table, self.out / "particles" / "pde_distance.csv")
        final = float(table["l1_distance"].iloc[-1])
        self.check("particles.l1", final < section.l1_budget, f"末时刻 L¹ = {final:.4g}")
        self.check("particles.wraps", not sim.flagged, f"回绕率 {sim.wrap_rate:.2e}")

    def run(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        save_experiment_config(self.cfg, self.out / "config.json")
        stages = [("kernel", self.kernel), ("thresholds", self.thresholds), ("solve", self.solve),
                  ("weak_form", self.weak_form), ("apriori", self.apriori)]
        if len(self.cfg.solver.eps_list) >= 3:
            stages.append(("epsilon_stability", self.epsilon_stability))
        if self.cfg.particles is not None and self.cfg.particles.enabled:
            stages.append(("particles", self.particles))
        try:
            for name, body in stages:
                self.stage(name, body)
        finally:
            write_summary(self.checks, self.out, {"experiment_id": self.cfg.experiment_id,
                                                  "seed": self.cfg.seed})
        return self.out


def run_full_pipeline(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None,
                      override: Optional[bool] = None) -> Path:
    """
    运行完整实验并返回产物目录

    Raises:
        StageError: 任一阶段失败（退出码取自原始异常）
    """
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir) / cfg.experiment_id
    override = cfg.solver.override_thresholds if override is None else override
    if cfg.kernel.family in SINGULAR_FAMILIES and cfg.solver.epsilon is None:
        logger.warning("奇异核未指定磨光尺度 ε，求解器将直接使用网格采样的核")
    path = _Pipeline(cfg, out, override).run()
    logger.info(f"流水线完成，产物目录: {path}")
    return path
