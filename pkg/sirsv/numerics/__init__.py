"""
Numerics: uniform grids, fixed-step integrators, quadrature
"""

from .grid import AdjointTrajectory, TimeGrid, Trajectory
from .integrators import euler_forward, rk4_backward, rk4_forward, trapezoid

__all__ = [
    'AdjointTrajectory',
    'TimeGrid',
    'Trajectory',
    'euler_forward',
    'rk4_backward',
    'rk4_forward',
    'trapezoid',
]
