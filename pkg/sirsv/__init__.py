"""
SIRS/V Vaccination Game

Compares voluntary vaccination driven by imitation dynamics (Nash
equilibrium) with the planner's optimal vaccination schedule (social
optimum) on a waning-immunity epidemic.
"""

__version__ = "1.0.0"
