"""
Outcome Metrics

Cumulative infections (IT), cumulative vaccinations (VT), average social
payoff (ASP) and the social efficiency deficit (SED) between the social
optimum and the behavior equilibrium.
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from sirsv.errors import HorizonRangeError
from sirsv.model.params import EpidemicState, ModelParams
from sirsv.numerics.grid import GRID_EXACTNESS, TimeGrid, Trajectory
from sirsv.numerics.integrators import trapezoid
from sirsv.solvers.behavior_solver import DEFAULT_EQ_TOL, NeRun, run_ne
from sirsv.solvers.control_solver import FbsConfig, SoRun, solve_fbs


@dataclass(frozen=True)
class OutcomeMetrics:
    it: float
    vt: float
    asp: float
    horizon_used: float
    j: Optional[float] = None
    it_eq: Optional[float] = None
    vt_eq: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Comparison:
    ne: OutcomeMetrics
    so: OutcomeMetrics
    sed: float
    ne_run: NeRun
    so_run: SoRun


def r0(p: ModelParams) -> float:
    """Basic reproduction number beta / gamma."""
    return p.beta / p.gamma


def _integrate_until(samples: np.ndarray, traj: Trajectory, upto: Optional[float]) -> float:
    grid = traj.grid
    if upto is None:
        return trapezoid(samples, grid)
    if upto > grid.t_end + GRID_EXACTNESS * grid.dt or upto < grid.t0:
        raise HorizonRangeError(f"upto={upto} outside trajectory [{grid.t0}, {grid.t_end}]")
    node = min(grid.node_at(upto), grid.steps)
    if node == 0:
        return 0.0
    sub = grid.prefix(node)
    return trapezoid(samples[:sub.n], sub)


def cumulative_infections(traj: Trajectory, p: ModelParams, upto: Optional[float] = None) -> float:
    """Integral of beta S I + (1 - eta) beta V I from t0 to `upto` (default: end)."""
    incidence = p.beta * traj.s * traj.i + (1.0 - p.eta) * p.beta * traj.v * traj.i
    return _integrate_until(incidence, traj, upto)


def cumulative_vaccinations(traj: Trajectory, upto: Optional[float] = None) -> float:
    """Integral of rate * S from t0 to `upto` (default: end)."""
    return _integrate_until(traj.rates * traj.s, traj, upto)


def asp(it: float, vt: float, p: ModelParams) -> float:
    return -it * p.c - vt * p.c_v


def sed(asp_so: float, asp_ne: float) -> float:
    return asp_so - asp_ne


def ne_metrics(run: NeRun, p: ModelParams) -> OutcomeMetrics:
    """Metrics over the full horizon, plus equilibrium-truncated IT/VT when detected."""
    traj = run.trajectory
    it = cumulative_infections(traj, p)
    vt = cumulative_vaccinations(traj)
    it_eq = vt_eq = None
    if run.converged:
        it_eq = cumulative_infections(traj, p, run.equilibrium_time)
        vt_eq = cumulative_vaccinations(traj, run.equilibrium_time)
    return OutcomeMetrics(
        it=it, vt=vt, asp=asp(it, vt, p), horizon_used=traj.grid.t_end,
        it_eq=it_eq, vt_eq=vt_eq,
    )


def so_metrics(run: SoRun, p: ModelParams) -> OutcomeMetrics:
    traj = run.states
    it = cumulative_infections(traj, p)
    vt = cumulative_vaccinations(traj)
    return OutcomeMetrics(
        it=it, vt=vt, asp=asp(it, vt, p), horizon_used=traj.grid.t_end, j=run.objective_j,
    )


def compare(
    p: ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    fbs: Optional[FbsConfig] = None,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> Comparison:
    """
    Run both regimes on `horizon` and compare their payoffs.

    The sweep settings keep their tolerances but always use `horizon` as
    the grid, so both metrics integrate over the same interval.
    """
    fbs = dataclasses.replace(fbs, grid=horizon) if fbs is not None else FbsConfig(grid=horizon)
    ne_run = run_ne(p, init, horizon, eq_tol)
    so_run = solve_fbs(p, init, fbs)
    ne = ne_metrics(ne_run, p)
    so = so_metrics(so_run, p)
    return Comparison(ne=ne, so=so, sed=sed(so.asp, ne.asp), ne_run=ne_run, so_run=so_run)
