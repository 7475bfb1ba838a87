"""
One-Parameter Studies

Runs the NE/SO comparison once per value of a single model parameter and
keeps the full trajectories, so the time series of each regime can be
set side by side.
"""

import logging
import multiprocessing
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from sirsv.analysis.metrics import Comparison, compare
from sirsv.errors import ConfigurationError
from sirsv.model.params import EpidemicState, ModelParams, parse_number
from sirsv.numerics.grid import TimeGrid
from sirsv.solvers.behavior_solver import DEFAULT_EQ_TOL
from sirsv.solvers.control_solver import FbsConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StudyPoint:
    index: int
    value: float
    params: ModelParams
    comparison: Comparison


@dataclass(frozen=True, eq=False)
class StudyResult:
    parameter: str
    points: List[StudyPoint]
    base: ModelParams

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(point.value for point in self.points)

    def metric(self, name: str) -> List[float]:
        """One value per point; name is ne_<m>, so_<m> (m in it, vt, asp) or sed."""
        if name == "sed":
            return [point.comparison.sed for point in self.points]
        regime, _, metric = name.partition("_")
        if regime not in ("ne", "so") or metric not in ("it", "vt", "asp"):
            raise KeyError(name)
        return [getattr(getattr(point.comparison, regime), metric) for point in self.points]

    @property
    def all_converged(self) -> bool:
        return all(p.comparison.ne_run.converged and p.comparison.so_run.converged for p in self.points)


def parse_values(text: str) -> Tuple[float, ...]:
    """Comma separated numbers; fractions such as 1/90 are accepted."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(float(parse_number(part)))
        except ValueError as e:
            raise ConfigurationError(f"study value {part!r}: {e}") from e
    if not values:
        raise ConfigurationError(f"no study values in {text!r}")
    return tuple(values)


def _run_point(job: Dict[str, Any]) -> StudyPoint:
    comparison = compare(job["params"], job["init"], job["horizon"], job["fbs"], job["eq_tol"])
    return StudyPoint(job["index"], job["value"], job["params"], comparison)


def run_study(
    base: ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    fbs: Optional[FbsConfig],
    parameter: str,
    values: Sequence[float],
    workers: int = 1,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> StudyResult:
    """
    Compare NE and SO at each value of `parameter`, other parameters from `base`.

    Every value is validated before anything runs; an invalid one raises
    ConfigurationError naming it. Points come back in the given order.
    """
    if parameter not in ModelParams.model_fields:
        raise ConfigurationError(f"unknown study parameter {parameter!r}")
    if not values:
        raise ConfigurationError("a study needs at least one value")
    if workers < 1:
        raise ConfigurationError(f"workers must be at least 1, got {workers}")

    fbs = fbs or FbsConfig(grid=horizon)
    jobs = []
    for index, value in enumerate(values):
        try:
            params = base.with_overrides(**{parameter: float(value)})
        except ValidationError as e:
            raise ConfigurationError(f"{parameter}={value!r}: {e.errors()[0].get('msg')}") from e
        jobs.append({
            "index": index,
            "value": float(value),
            "params": params,
            "init": init,
            "horizon": horizon,
            "fbs": fbs,
            "eq_tol": eq_tol,
        })

    logger.info("study of %s over %d value(s) with %d worker(s)", parameter, len(jobs), workers)
    if workers == 1 or len(jobs) == 1:
        points = [_run_point(job) for job in jobs]
    else:
        with multiprocessing.Pool(min(workers, len(jobs))) as pool:
            points = pool.map(_run_point, jobs)

    for point in points:
        if not point.comparison.so_run.converged:
            logger.warning("%s=%g: control iteration not converged", parameter, point.value)
    return StudyResult(parameter=parameter, points=points, base=base)
