"""
实验产物的写出: 轨迹转储、收敛日志、粒子快照与汇总文件
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from src.besov.models import BesovIndex, ThermicSettings
from src.grid.dump import write_field
from src.grid.models import Grid
from src.particles.models import ParticleEnsemble, ParticleTrajectory
from src.particles.simulator import empirical_density
from src.semigroup.models import StableLaw
from src.solver.models import DensityTrajectory, PicardResult
from src.utils.serialization import serialize_report

PathLike = Union[str, Path]


@dataclass
class CheckRecord:
    """汇总中的一条检查"""
    check: str
    status: bool
    detail: str = ""

    def as_dict(self) -> Dict[str, object]:
        return {"check": self.check, "status": bool(self.status), "detail": self.detail}


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def write_trajectory(traj: DensityTrajectory, out_dir: PathLike, law: Optional[StableLaw] = None,
                     norm_indices: Sequence[BesovIndex] = (),
                     ts: Optional[ThermicSettings] = None) -> Path:
    """每个切片一个 slice_XXXX.field，外加 index.csv（slice, time, mass, min, 范数列）"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(traj.slices):
        write_field(f, out_dir / f"slice_{i:04d}.field")
    return write_frame(traj.diagnostics(law, norm_indices, ts), out_dir / "index.csv")


def write_convergence(result: PicardResult, path: PathLike) -> Path:
    return write_frame(result.convergence_frame(), path)


def write_positions(ens: ParticleEnsemble, path: PathLike) -> Path:
    frame = pd.DataFrame(ens.positions, columns=[f"x{i}" for i in range(ens.d)])
    return write_frame(frame, path)


def write_particle_snapshots(sim: ParticleTrajectory, out_dir: PathLike,
                             grid: Optional[Grid] = None) -> List[Path]:
    """positions_<k>.csv 与对应的分箱 Field 转储"""
    out_dir = Path(out_dir)
    grid = grid or sim.grid
    written = []
    for snapshot in sim.snapshots:
        k = snapshot.step_index
        written.append(write_positions(snapshot, out_dir / f"positions_{k}.csv"))
        written.append(write_field(empirical_density(snapshot, grid), out_dir / f"empirical_{k}.field"))
    return written


def write_summary(checks: Sequence[CheckRecord], out_dir: PathLike,
                  extra: Optional[Dict[str, object]] = None) -> Dict[str, Path]:
    """summary.json（序列化工具）与 summary.csv（check, status, detail）"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [c.as_dict() for c in checks]
    payload = serialize_report({"checks": rows, "all_passed": all(r["status"] for r in rows),
                                **(extra or {})})
    json_path = out_dir / "summary.json"
    json_path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True), encoding="utf-8")
    csv_path = write_frame(pd.DataFrame(rows, columns=["check", "status", "detail"]), out_dir / "summary.csv")
    return {"json": json_path, "csv": csv_path}
