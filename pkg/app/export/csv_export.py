"""
CSV and text writers for run results

Floats are written with Python's shortest round-trip repr, `.` as the
decimal separator and LF line endings.
"""

from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from sirsv.analysis.metrics import Comparison
from sirsv.analysis.study import StudyResult
from sirsv.analysis.sweep import SweepResult
from sirsv.numerics.grid import Trajectory

PathLike = Union[str, Path]

TRAJECTORY_COLUMNS = ["t", "S", "V", "I", "R", "rate"]
SWEEP_COLUMNS = ["axis1", "axis2", "ne_it", "ne_vt", "ne_asp", "so_it", "so_vt", "so_asp", "sed", "status"]
STUDY_COLUMNS = ["value", "ne_it", "ne_vt", "ne_asp", "so_it", "so_vt", "so_asp", "sed",
                 "ne_converged", "so_converged"]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    return pd.DataFrame({
        "t": traj.t,
        "S": traj.s,
        "V": traj.v,
        "I": traj.i,
        "R": traj.r,
        "rate": traj.rates,
    }, columns=TRAJECTORY_COLUMNS)


def write_trajectory(traj: Trajectory, path: PathLike) -> Path:
    """One row per grid node: t,S,V,I,R,rate"""
    return _write(trajectory_frame(traj), path)


def format_summary_value(key: str, value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if key == "r0":
        return f"{value:.2f}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary(entries: Dict[str, Any], path: PathLike) -> Path:
    """`key = value` lines in insertion order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key} = {format_summary_value(key, value)}" for key, value in entries.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def comparison_frame(comparison: Comparison) -> pd.DataFrame:
    ne, so = comparison.ne, comparison.so
    rows = [
        {"quantity": "it", "ne": ne.it, "so": so.it},
        {"quantity": "vt", "ne": ne.vt, "so": so.vt},
        {"quantity": "asp", "ne": ne.asp, "so": so.asp},
        # sed is a single number; it goes in the so column
        {"quantity": "sed", "ne": None, "so": comparison.sed},
    ]
    return pd.DataFrame(rows, columns=["quantity", "ne", "so"])


def write_comparison(comparison: Comparison, path: PathLike) -> Path:
    return _write(comparison_frame(comparison), path)


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """Long format, one row per cell; cells without values leave the metrics empty."""
    rows = []
    for cell in result.iter_cells():
        row = {"axis1": cell.value1, "axis2": cell.value2, "status": cell.status}
        for name in SWEEP_COLUMNS[2:-1]:
            row[name] = getattr(cell, name) if cell.has_values else None
        rows.append(row)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep(result: SweepResult, path: PathLike) -> Path:
    return _write(sweep_frame(result), path)


def study_frame(result: StudyResult) -> pd.DataFrame:
    """One row per studied value, in the order given."""
    rows = []
    for point in result.points:
        comparison = point.comparison
        rows.append({
            "value": point.value,
            "ne_it": comparison.ne.it, "ne_vt": comparison.ne.vt, "ne_asp": comparison.ne.asp,
            "so_it": comparison.so.it, "so_vt": comparison.so.vt, "so_asp": comparison.so.asp,
            "sed": comparison.sed,
            "ne_converged": comparison.ne_run.converged,
            "so_converged": comparison.so_run.converged,
        })
    frame = pd.DataFrame(rows, columns=STUDY_COLUMNS)
    frame.insert(0, result.parameter, frame.pop("value"))
    return frame


def write_study(result: StudyResult, out_dir: PathLike, prefix: str = "study") -> List[Path]:
    """
    `<prefix>.csv` plus `<prefix>_<parameter>_<index>_ne.csv` / `_so.csv`
    trajectories; the index is the value's position in study.csv.
    """
    out_dir = Path(out_dir)
    written = [_write(study_frame(result), out_dir / f"{prefix}.csv")]
    for point in result.points:
        stem = f"{prefix}_{result.parameter}_{point.index}"
        written.append(write_trajectory(point.comparison.ne_run.trajectory, out_dir / f"{stem}_ne.csv"))
        written.append(write_trajectory(point.comparison.so_run.states, out_dir / f"{stem}_so.csv"))
    return written
