"""
Solvers for the two vaccination regimes:
- behavior_solver: individuals imitate better-paid strategies (Nash equilibrium)
- control_solver: a planner minimizes the social cost (social optimum)
"""

from .behavior_solver import NeRun, detect_equilibrium, run_ne
from .control_solver import (
    FbsConfig,
    OptimalityResidual,
    SoRun,
    evaluate_objective,
    optimality_residual,
    solve_fbs,
)

__all__ = [
    'FbsConfig',
    'NeRun',
    'OptimalityResidual',
    'SoRun',
    'detect_equilibrium',
    'evaluate_objective',
    'optimality_residual',
    'run_ne',
    'solve_fbs',
]
