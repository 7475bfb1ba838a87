"""
Behavior Model Solver

Runs the epidemic coupled with imitation dynamics until the vaccinating
fraction and the compartments stop moving (the Nash equilibrium of the
vaccination game) or the horizon ends.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from sirsv.errors import ConfigurationError
from sirsv.model.dynamics import behavior_field
from sirsv.model.params import EpidemicState, ModelParams
from sirsv.numerics.grid import TimeGrid, Trajectory
from sirsv.numerics.integrators import euler_until

logger = logging.getLogger(__name__)

DEFAULT_EQ_TOL = 1e-8


def default_horizon() -> TimeGrid:
    return TimeGrid(0.0, 2000.0, 0.1)


def _derivative_norm(derivative) -> float:
    return max(abs(component) for component in derivative)


@dataclass(frozen=True, eq=False)
class NeRun:
    """
    Result of a behavior-model run.

    The trajectory always spans the whole horizon; after the equilibrium
    node it repeats the equilibrium state.
    """

    trajectory: Trajectory
    equilibrium_time: Optional[float]
    equilibrium_node: Optional[int]
    converged: bool
    eq_tol: float

    @property
    def final_state(self) -> EpidemicState:
        return self.trajectory.final_state

    def truncated(self) -> Trajectory:
        """Trajectory cut at the equilibrium node (full trajectory if none)."""
        if self.equilibrium_node is None:
            return self.trajectory
        return self.trajectory.truncated(self.equilibrium_node)


def run_ne(
    p: ModelParams,
    init: EpidemicState,
    horizon: Optional[TimeGrid] = None,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> NeRun:
    """
    Integrate the behavior model with explicit Euler.

    At every node the full derivative (compartments and x) is checked
    against `eq_tol` in max-norm before stepping; the first node under the
    tolerance is the equilibrium. Reaching the horizon without it is
    reported with converged=False, not raised.
    """
    if not eq_tol > 0:
        raise ConfigurationError(f"eq_tol must be positive, got {eq_tol}")
    grid = horizon or default_horizon()

    def settled(derivative) -> bool:
        return _derivative_norm(derivative) < eq_tol

    trajectory, node = euler_until(behavior_field(p), init, grid, settled)

    if node is None:
        logger.warning(
            "behavior model did not reach equilibrium (tol %g) by t=%g", eq_tol, grid.t_end
        )
        return NeRun(trajectory, None, None, False, eq_tol)

    equilibrium_time = float(grid.times[node])
    logger.info("behavior model reached equilibrium at t=%g", equilibrium_time)
    return NeRun(trajectory, equilibrium_time, node, True, eq_tol)


def detect_equilibrium(traj: Trajectory, p: ModelParams, eq_tol: float = DEFAULT_EQ_TOL) -> Optional[float]:
    """Earliest node time where the recomputed derivative max-norm is below eq_tol."""
    field = behavior_field(p)
    rates = traj.rates.tolist()
    for node, (s, v, i, r) in enumerate(traj.compartments.tolist()):
        if _derivative_norm(field(s, v, i, r, rates[node])) < eq_tol:
            return float(traj.grid.times[node])
    return None
