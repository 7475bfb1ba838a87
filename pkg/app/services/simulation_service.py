"""
Simulation service wrapper

Async facade over the sirsv library. Solver calls are CPU bound and run
in a worker thread so callers can await them.
"""

import asyncio
from dataclasses import dataclass
from typing import List, Sequence

from app.config import SimConfig
from sirsv.analysis.metrics import Comparison, OutcomeMetrics, compare, ne_metrics, r0, so_metrics
from sirsv.analysis.oracle import DiagnosticResult, run_diagnostics
from sirsv.analysis.study import StudyResult, run_study
from sirsv.analysis.sweep import AxisSpec, SweepResult, run_sweep
from sirsv.solvers.behavior_solver import NeRun, run_ne
from sirsv.solvers.control_solver import SoRun, solve_fbs


@dataclass(frozen=True, eq=False)
class BehaviorOutcome:
    run: NeRun
    metrics: OutcomeMetrics
    r0: float


@dataclass(frozen=True, eq=False)
class ControlOutcome:
    run: SoRun
    metrics: OutcomeMetrics
    r0: float


class SimulationService:
    """
    Entry point used by the command line front end
    """

    async def run_behavior(self, cfg: SimConfig) -> BehaviorOutcome:
        """Behavior model to equilibrium (or horizon end) plus its metrics"""
        run = await asyncio.to_thread(run_ne, cfg.params, cfg.init, cfg.horizon(), cfg.eq_tol)
        return BehaviorOutcome(run, ne_metrics(run, cfg.params), r0(cfg.params))

    async def run_control(self, cfg: SimConfig) -> ControlOutcome:
        """Optimal vaccination schedule plus its metrics"""
        run = await asyncio.to_thread(solve_fbs, cfg.params, cfg.init, cfg.fbs_config())
        return ControlOutcome(run, so_metrics(run, cfg.params), r0(cfg.params))

    async def run_comparison(self, cfg: SimConfig) -> Comparison:
        return await asyncio.to_thread(
            compare, cfg.params, cfg.init, cfg.horizon(), cfg.fbs_config(), cfg.eq_tol
        )

    async def run_parameter_sweep(self, cfg: SimConfig, axis1: AxisSpec, axis2: AxisSpec) -> SweepResult:
        return await asyncio.to_thread(
            run_sweep, cfg.params, cfg.init, cfg.horizon(), cfg.fbs_config(),
            axis1, axis2, cfg.workers, cfg.eq_tol,
        )

    async def run_parameter_study(self, cfg: SimConfig, parameter: str, values: Sequence[float]) -> StudyResult:
        """NE vs SO once per value of one parameter"""
        return await asyncio.to_thread(
            run_study, cfg.params, cfg.init, cfg.horizon(), cfg.fbs_config(),
            parameter, tuple(values), cfg.workers, cfg.eq_tol,
        )

    async def verify(self, cfg: SimConfig, seed: int = 0) -> List[DiagnosticResult]:
        """Oracle checks against the configured parameters"""
        return await asyncio.to_thread(run_diagnostics, cfg.params, cfg.init, seed)


simulation_service = SimulationService()
