"""
Model core: domain types and the pure SIRS/V kernels
"""

from .params import AdjointState, EpidemicState, ModelParams, StateDerivative
from .dynamics import (
    S_FLOOR,
    adjoint_rhs,
    behavior_rhs,
    control_rhs,
    hamiltonian,
    optimal_control_candidate,
    running_cost,
)

__all__ = [
    'AdjointState',
    'EpidemicState',
    'ModelParams',
    'StateDerivative',
    'S_FLOOR',
    'adjoint_rhs',
    'behavior_rhs',
    'control_rhs',
    'hamiltonian',
    'optimal_control_candidate',
    'running_cost',
]
