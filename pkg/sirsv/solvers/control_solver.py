"""
Optimal Control Solver (forward-backward sweep)

Each sweep integrates the states forward with RK4 under the current
control, integrates the costates backward from a zero terminal value,
takes the pointwise Hamiltonian minimizer and blends it into the control.
A final forward/backward pass makes the returned states and costates
consistent with the returned control.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from sirsv.errors import ConfigurationError, ControlBoundsError
from sirsv.model.dynamics import S_FLOOR, adjoint_field, control_field
from sirsv.model.params import AdjointState, EpidemicState, ModelParams
from sirsv.numerics.grid import AdjointTrajectory, TimeGrid, Trajectory, check_length
from sirsv.numerics.integrators import rk4_backward, rk4_forward, trapezoid

logger = logging.getLogger(__name__)

# Slack for bounds checks on caller-supplied controls
BOUND_SLACK = 1e-12

DEFAULT_CONV_TOL = 1e-4

# Damping never takes the blend weight below relaxation * DAMPING_FLOOR
DAMPING_FLOOR = 2.0 ** -16


def default_grid() -> TimeGrid:
    return TimeGrid(0.0, 1000.0, 0.1)


@dataclass(frozen=True)
class FbsConfig:
    """Sweep settings; u_init is a constant or one value per node."""

    grid: TimeGrid = field(default_factory=default_grid)
    relaxation: float = 0.5
    conv_tol: float = DEFAULT_CONV_TOL
    max_iters: int = 5000
    u_init: Union[float, Sequence[float]] = 0.0

    def __post_init__(self):
        if not 0.0 < self.relaxation <= 1.0:
            raise ConfigurationError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if not self.conv_tol > 0:
            raise ConfigurationError(f"conv_tol must be positive, got {self.conv_tol}")
        if self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be at least 1, got {self.max_iters}")

    def initial_control(self, u_max: float) -> np.ndarray:
        if np.isscalar(self.u_init):
            control = np.full(self.grid.n, float(self.u_init))
        else:
            control = check_length(self.u_init, self.grid, "u_init").copy()
        return np.clip(control, 0.0, u_max)


@dataclass(frozen=True, eq=False)
class SoRun:
    states: Trajectory
    control: np.ndarray
    adjoints: AdjointTrajectory
    objective_j: float
    iterations: int
    converged: bool
    convergence_history: List[float]
    relaxation: float  # blend weight in force at the last sweep

    def truncated(self, node: int) -> Trajectory:
        return self.states.truncated(node)


@dataclass(frozen=True, eq=False)
class OptimalityResidual:
    """
    Projected first-order residual of the Hamiltonian in u, per node.

    Interior nodes contribute |dH/du|; nodes on u = 0 only a negative
    gradient; nodes on u = u_max only a positive one.
    """

    residual: np.ndarray
    scale: np.ndarray
    gradient: np.ndarray

    @property
    def worst(self) -> float:
        """Largest residual relative to its scale 1 + |lam_S| + |lam_V|."""
        return float(np.max(self.residual / self.scale))


def _candidate_control(states: Trajectory, adjoints: AdjointTrajectory, p: ModelParams) -> np.ndarray:
    s = states.s
    safe_s = np.where(s > S_FLOOR, s, 1.0)
    vertex = ((adjoints.lam_s - adjoints.lam_v) / (2.0 * p.c_v) - p.c * states.i) / (p.c_v * safe_s)
    vertex = np.where(s > S_FLOOR, vertex, 0.0)
    return np.clip(vertex, 0.0, p.u_max)


def _running_cost_samples(states: Trajectory, control: np.ndarray, p: ModelParams) -> np.ndarray:
    return (p.c * states.i + p.c_v * control * states.s) ** 2


def _snap_to_bounds(u: np.ndarray, candidate: np.ndarray, p: ModelParams, tol: float) -> np.ndarray:
    """Move nodes whose candidate sits on a bound, and that are within tol of it, onto the bound."""
    on_bound = (candidate <= 0.0) | (candidate >= p.u_max)
    near = np.abs(candidate - u) <= tol
    return np.where(on_bound & near, candidate, u)


def _check_bounds(control: np.ndarray, p: ModelParams) -> None:
    if control.min() < -BOUND_SLACK or control.max() > p.u_max + BOUND_SLACK:
        raise ControlBoundsError(
            f"control range [{control.min()}, {control.max()}] outside [0, {p.u_max}]"
        )


def solve_fbs(p: ModelParams, init: EpidemicState, cfg: Optional[FbsConfig] = None) -> SoRun:
    """
    Forward-backward sweep for the social-optimum vaccination schedule.

    Stops when max|u_new - u_old| <= conv_tol * max(1, max|u_new|) or after
    max_iters sweeps; the latter returns converged=False.

    The blend weight starts at cfg.relaxation and is halved whenever the
    control change grows from one sweep to the next, which breaks the
    cycles a fixed weight can fall into near a switching time. On
    convergence, nodes still approaching a bound are moved onto it.
    """
    if p.c_v == 0:
        raise ConfigurationError("optimality formula undefined: requires c_v != 0")
    cfg = cfg or FbsConfig()
    grid = cfg.grid
    forward = control_field(p)
    backward = adjoint_field(p)
    terminal = AdjointState.zero()

    u = cfg.initial_control(p.u_max)
    weight = cfg.relaxation
    min_weight = cfg.relaxation * DAMPING_FLOOR
    history: List[float] = []
    converged = False
    iterations = 0

    for sweep in range(cfg.max_iters):
        iterations = sweep + 1
        states = rk4_forward(forward, init, grid, u)
        adjoints = rk4_backward(backward, terminal, grid, states, u)
        candidate = _candidate_control(states, adjoints, p)
        u_new = np.clip(weight * candidate + (1.0 - weight) * u, 0.0, p.u_max)

        delta = float(np.max(np.abs(u_new - u)))
        scale = max(1.0, float(np.max(np.abs(u_new))))
        logger.debug("sweep %d: max control change %.3e (weight %.3g)", iterations, delta, weight)

        if delta <= cfg.conv_tol * scale:
            history.append(delta)
            u = _snap_to_bounds(u_new, candidate, p, cfg.conv_tol * scale / weight)
            converged = True
            break

        if history and delta > history[-1] and weight > min_weight:
            weight = max(0.5 * weight, min_weight)
            logger.debug("control change grew, blend weight lowered to %.3g", weight)
        history.append(delta)
        u = u_new

    # final pass so states and costates match the returned control
    states = rk4_forward(forward, init, grid, u)
    adjoints = rk4_backward(backward, terminal, grid, states, u)
    objective_j = trapezoid(_running_cost_samples(states, u, p), grid)

    if converged:
        logger.info(
            "sweep converged after %d iterations, J=%.6g (final weight %.3g)", iterations, objective_j, weight
        )
    else:
        logger.warning(
            "sweep did not converge within %d iterations (last change %.3e)",
            cfg.max_iters, history[-1],
        )

    control = u.copy()
    control.setflags(write=False)
    return SoRun(states, control, adjoints, objective_j, iterations, converged, history, weight)


def evaluate_objective(
    p: ModelParams,
    init: EpidemicState,
    grid: TimeGrid,
    control: Sequence[float],
) -> float:
    """J = integral of (c I + c_v u S)^2 along the RK4 trajectory under `control`."""
    control = check_length(control, grid, "control")
    _check_bounds(control, p)
    states = rk4_forward(control_field(p), init, grid, control)
    return trapezoid(_running_cost_samples(states, control, p), grid)


def optimality_residual(run: SoRun, p: ModelParams, bound_tol: Optional[float] = None) -> OptimalityResidual:
    """
    Nodes within bound_tol of 0 or u_max count as on that bound. The
    default, DEFAULT_CONV_TOL * u_max, matches the sweep stopping rule.
    """
    if bound_tol is None:
        bound_tol = DEFAULT_CONV_TOL * p.u_max
    states, adjoints, u = run.states, run.adjoints, run.control
    s = states.s
    gradient = (2.0 * (p.c * states.i + p.c_v * u * s) * p.c_v * s
                - (adjoints.lam_s - adjoints.lam_v) * s)
    at_zero = u <= bound_tol
    at_max = u >= p.u_max - bound_tol
    residual = np.abs(gradient)
    residual = np.where(at_zero, np.maximum(0.0, -gradient), residual)
    residual = np.where(at_max & ~at_zero, np.maximum(0.0, gradient), residual)
    residual = np.where(at_max & at_zero, 0.0, residual)
    scale = 1.0 + np.abs(adjoints.lam_s) + np.abs(adjoints.lam_v)
    return OptimalityResidual(residual, scale, gradient)
