"""
Analysis: outcome metrics, parameter studies and sweeps, reference oracles
"""

from .metrics import (
    Comparison,
    OutcomeMetrics,
    asp,
    compare,
    cumulative_infections,
    cumulative_vaccinations,
    ne_metrics,
    r0,
    sed,
    so_metrics,
)
from .oracle import (
    BruteForceResult,
    DiagnosticResult,
    EndemicEquilibrium,
    brute_force_control,
    fd_hamiltonian_grad,
    run_diagnostics,
    sirs_equilibrium,
)
from .study import StudyPoint, StudyResult, parse_values, run_study
from .sweep import AxisSpec, SweepCell, SweepResult, parse_axis, run_sweep

__all__ = [
    'AxisSpec',
    'BruteForceResult',
    'Comparison',
    'DiagnosticResult',
    'EndemicEquilibrium',
    'OutcomeMetrics',
    'StudyPoint',
    'StudyResult',
    'SweepCell',
    'SweepResult',
    'asp',
    'brute_force_control',
    'compare',
    'cumulative_infections',
    'cumulative_vaccinations',
    'fd_hamiltonian_grad',
    'ne_metrics',
    'parse_axis',
    'parse_values',
    'r0',
    'run_diagnostics',
    'run_study',
    'run_sweep',
    'sed',
    'sirs_equilibrium',
    'so_metrics',
]
