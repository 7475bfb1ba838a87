"""
Two-Parameter Sweeps

Evaluates the NE/SO comparison on a grid over two model parameters. Cells
are independent; with more than one worker they are farmed out to a
process pool and collected in grid order, so the result does not depend
on scheduling.
"""

import logging
import multiprocessing
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from sirsv.analysis.metrics import compare
from sirsv.errors import ConfigurationError, SimulationError
from sirsv.model.params import EpidemicState, ModelParams, parse_number
from sirsv.numerics.grid import TimeGrid
from sirsv.solvers.behavior_solver import DEFAULT_EQ_TOL
from sirsv.solvers.control_solver import FbsConfig

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_SKIPPED = "skipped"
STATUS_FAILED = "failed"
STATUS_UNCONVERGED = "unconverged"

# Tolerance when comparing a swept value against its coupled bound
COUPLING_SLACK = 1e-12

METRIC_FIELDS = ("ne_it", "ne_vt", "ne_asp", "so_it", "so_vt", "so_asp", "sed")


@dataclass(frozen=True)
class AxisSpec:
    """
    One sweep axis over a ModelParams field.

    With `coupled_hi` set, cells where this parameter exceeds the current
    value of the named parameter are skipped (triangular domains); `hi`
    may then be omitted and defaults to the other axis' upper bound.
    """

    parameter: str
    lo: float
    hi: Optional[float]
    steps: int
    coupled_hi: Optional[str] = None

    def __post_init__(self):
        fields = ModelParams.model_fields
        if self.parameter not in fields:
            raise ConfigurationError(f"unknown sweep parameter {self.parameter!r}")
        if self.steps < 2:
            raise ConfigurationError(f"axis {self.parameter}: steps must be at least 2, got {self.steps}")
        if self.coupled_hi is not None:
            if self.coupled_hi not in fields:
                raise ConfigurationError(f"unknown coupled parameter {self.coupled_hi!r}")
            if self.coupled_hi == self.parameter:
                raise ConfigurationError(f"axis {self.parameter} cannot be coupled to itself")
        elif self.hi is None:
            raise ConfigurationError(f"axis {self.parameter}: hi is required unless coupled")
        if self.hi is not None and self.lo > self.hi:
            raise ConfigurationError(f"axis {self.parameter}: lo={self.lo} exceeds hi={self.hi}")

    def values(self, fallback_hi: Optional[float] = None) -> np.ndarray:
        hi = self.hi if self.hi is not None else fallback_hi
        if hi is None:
            raise ConfigurationError(f"axis {self.parameter}: no upper bound available")
        if self.lo > hi:
            raise ConfigurationError(f"axis {self.parameter}: lo={self.lo} exceeds hi={hi}")
        return np.linspace(self.lo, hi, self.steps)

    def describe(self) -> str:
        hi = "" if self.hi is None else repr(self.hi)
        text = f"{self.parameter}:{self.lo!r}:{hi}:{self.steps}"
        return f"{text}:{self.coupled_hi}" if self.coupled_hi else text


def parse_axis(text: str) -> AxisSpec:
    """Parse `name:lo:hi:steps[:coupled]`; numbers may be fractions like 1/90."""
    parts = [part.strip() for part in text.split(":")]
    if len(parts) not in (4, 5):
        raise ConfigurationError(f"axis {text!r}: expected name:lo:hi:steps[:coupled]")
    name, lo, hi, steps = parts[:4]
    coupled = parts[4] if len(parts) == 5 and parts[4] else None
    try:
        lo_value = float(parse_number(lo))
        hi_value = float(parse_number(hi)) if hi else None
        steps_value = int(steps)
    except ValueError as e:
        raise ConfigurationError(f"axis {text!r}: {e}") from e
    return AxisSpec(name, lo_value, hi_value, steps_value, coupled)


@dataclass(frozen=True)
class SweepCell:
    index1: int
    index2: int
    value1: float
    value2: float
    status: str
    message: str = ""
    ne_it: float = float("nan")
    ne_vt: float = float("nan")
    ne_asp: float = float("nan")
    so_it: float = float("nan")
    so_vt: float = float("nan")
    so_asp: float = float("nan")
    sed: float = float("nan")
    ne_converged: bool = False
    so_converged: bool = False

    @property
    def has_values(self) -> bool:
        return self.status in (STATUS_OK, STATUS_UNCONVERGED)


@dataclass(frozen=True, eq=False)
class SweepResult:
    axis1: AxisSpec
    axis2: AxisSpec
    values1: np.ndarray
    values2: np.ndarray
    cells: List[List[SweepCell]]
    base: ModelParams
    settings: Dict[str, Any] = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.values1), len(self.values2))

    def iter_cells(self):
        for row in self.cells:
            yield from row

    def metric(self, name: str) -> np.ndarray:
        """steps1 x steps2 matrix of a metric; NaN where the cell has no values."""
        if name not in METRIC_FIELDS:
            raise KeyError(name)
        return np.array([[getattr(cell, name) if cell.has_values else np.nan for cell in row]
                         for row in self.cells])

    def status_counts(self) -> Dict[str, int]:
        counts = {STATUS_OK: 0, STATUS_SKIPPED: 0, STATUS_FAILED: 0, STATUS_UNCONVERGED: 0}
        for cell in self.iter_cells():
            counts[cell.status] += 1
        return counts


# ============================================================================
# Cell evaluation (module level so worker processes can pickle it)
# ============================================================================


def _evaluate_cell(job: Dict[str, Any]) -> SweepCell:
    i, j = job["index"]
    name1, name2 = job["names"]
    value1, value2 = job["values"]
    coupling = job["coupling"]

    position = dict(index1=i, index2=j, value1=value1, value2=value2)
    for parameter, bound in coupling:
        current = value1 if parameter == name1 else value2
        limit = value1 if bound == name1 else value2
        if current > limit + COUPLING_SLACK:
            return SweepCell(status=STATUS_SKIPPED, message=f"{parameter} > {bound}", **position)

    try:
        params = job["base"].with_overrides(**{name1: value1, name2: value2})
    except ValidationError as e:
        return SweepCell(status=STATUS_SKIPPED, message=_first_error(e), **position)

    try:
        result = compare(params, job["init"], job["horizon"], job["fbs"], job["eq_tol"])
    except (SimulationError, ArithmeticError, ValueError) as e:
        return SweepCell(status=STATUS_FAILED, message=str(e), **position)

    # a finite horizon may end before the behavior model settles; only the
    # control solver decides the status
    return SweepCell(
        status=STATUS_OK if result.so_run.converged else STATUS_UNCONVERGED,
        message=_convergence_note(result),
        ne_it=result.ne.it, ne_vt=result.ne.vt, ne_asp=result.ne.asp,
        so_it=result.so.it, so_vt=result.so.vt, so_asp=result.so.asp,
        sed=result.sed,
        ne_converged=result.ne_run.converged, so_converged=result.so_run.converged,
        **position,
    )


def _first_error(error: ValidationError) -> str:
    detail = error.errors()[0]
    location = ".".join(str(part) for part in detail.get("loc", ()))
    return f"{location}: {detail.get('msg', 'invalid value')}"


def _convergence_note(result) -> str:
    notes = []
    if not result.ne_run.converged:
        notes.append("equilibrium not reached")
    if not result.so_run.converged:
        notes.append("control iteration not converged")
    return "; ".join(notes)


def run_sweep(
    base: ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    fbs: Optional[FbsConfig],
    axis1: AxisSpec,
    axis2: AxisSpec,
    workers: int = 1,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> SweepResult:
    """Evaluate `compare` on every (axis1, axis2) cell; per-cell errors never abort."""
    if axis1.parameter == axis2.parameter:
        raise ConfigurationError(f"both axes sweep {axis1.parameter!r}")
    for axis, other in ((axis1, axis2), (axis2, axis1)):
        if axis.coupled_hi is not None and axis.coupled_hi != other.parameter:
            raise ConfigurationError(
                f"axis {axis.parameter} is coupled to {axis.coupled_hi!r}, "
                f"which is not the other swept parameter"
            )
    if axis1.hi is None and axis2.hi is None:
        raise ConfigurationError("at least one axis needs an explicit upper bound")
    if workers < 1:
        raise ConfigurationError(f"workers must be at least 1, got {workers}")

    values1 = axis1.values(axis2.hi)
    values2 = axis2.values(axis1.hi)
    fbs = fbs or FbsConfig(grid=horizon)
    coupling = tuple((axis.parameter, axis.coupled_hi) for axis in (axis1, axis2) if axis.coupled_hi)

    jobs = [
        {
            "index": (i, j),
            "names": (axis1.parameter, axis2.parameter),
            "values": (float(value1), float(value2)),
            "coupling": coupling,
            "base": base,
            "init": init,
            "horizon": horizon,
            "fbs": fbs,
            "eq_tol": eq_tol,
        }
        for i, value1 in enumerate(values1)
        for j, value2 in enumerate(values2)
    ]

    logger.info("sweeping %d cells (%s x %s) with %d worker(s)",
                len(jobs), axis1.parameter, axis2.parameter, workers)
    if workers == 1:
        flat = [_evaluate_cell(job) for job in jobs]
    else:
        with multiprocessing.Pool(min(workers, len(jobs))) as pool:
            flat = pool.map(_evaluate_cell, jobs)

    steps2 = len(values2)
    cells = [flat[row * steps2:(row + 1) * steps2] for row in range(len(values1))]
    for cell in flat:
        if cell.status == STATUS_FAILED:
            logger.warning("cell (%s=%g, %s=%g) failed: %s",
                           axis1.parameter, cell.value1, axis2.parameter, cell.value2, cell.message)
        elif cell.status == STATUS_UNCONVERGED:
            logger.warning("cell (%s=%g, %s=%g): %s",
                           axis1.parameter, cell.value1, axis2.parameter, cell.value2, cell.message)

    result = SweepResult(
        axis1=axis1,
        axis2=axis2,
        values1=values1,
        values2=values2,
        cells=cells,
        base=base,
        settings={
            "t0": horizon.t0,
            "t_end": horizon.t_end,
            "dt": horizon.dt,
            "eq_tol": eq_tol,
            "relaxation": fbs.relaxation,
            "conv_tol": fbs.conv_tol,
            "max_iters": fbs.max_iters,
            "workers": workers,
        },
    )
    skipped = result.status_counts()[STATUS_SKIPPED]
    if skipped:
        logger.warning("%d cell(s) skipped", skipped)
    return result
