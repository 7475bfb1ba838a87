"""
Uniform time grids and the trajectories sampled on them
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from sirsv.errors import DimensionError, GridError
from sirsv.model.params import AdjointState, EpidemicState

GRID_EXACTNESS = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t0, t0 + dt, ..., t_end; (t_end - t0)/dt must be an integer."""

    t0: float
    t_end: float
    dt: float
    n: int = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.t_end) and np.isfinite(self.dt)):
            raise GridError("grid bounds and step must be finite")
        if self.t_end <= self.t0:
            raise GridError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if self.dt <= 0:
            raise GridError(f"dt must be positive, got {self.dt}")
        steps = (self.t_end - self.t0) / self.dt
        if abs(steps - round(steps)) > GRID_EXACTNESS:
            raise GridError(f"dt={self.dt} does not divide [{self.t0}, {self.t_end}] exactly")
        object.__setattr__(self, "n", int(round(steps)) + 1)

    @property
    def steps(self) -> int:
        return self.n - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def node_at(self, t: float) -> int:
        """Index of the last node with time <= t."""
        return int(np.floor((t - self.t0) / self.dt + GRID_EXACTNESS))

    def prefix(self, node: int) -> "TimeGrid":
        """Grid over nodes 0..node (at least one step)."""
        node = max(1, min(node, self.steps))
        return TimeGrid(self.t0, self.t0 + node * self.dt, self.dt)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def check_length(values, grid: TimeGrid, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.shape[0] != grid.n:
        raise DimensionError(f"{what} has {array.shape[0]} samples, grid has {grid.n} nodes")
    return array


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States and rates on a grid.

    `compartments` has shape (n, 4) with columns S, V, I, R; `rates` holds x
    (behavior model) or u (control model) per node.
    """

    grid: TimeGrid
    compartments: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        compartments = check_length(self.compartments, self.grid, "compartments")
        if compartments.ndim != 2 or compartments.shape[1] != 4:
            raise DimensionError(f"compartments must have shape (n, 4), got {compartments.shape}")
        object.__setattr__(self, "compartments", _frozen(compartments))
        object.__setattr__(self, "rates", _frozen(check_length(self.rates, self.grid, "rates")))

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    @property
    def s(self) -> np.ndarray:
        return self.compartments[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.compartments[:, 1]

    @property
    def i(self) -> np.ndarray:
        return self.compartments[:, 2]

    @property
    def r(self) -> np.ndarray:
        return self.compartments[:, 3]

    def state_at(self, node: int) -> EpidemicState:
        s, v, i, r = self.compartments[node]
        return EpidemicState.unchecked(s, v, i, r, self.rates[node])

    @property
    def states(self) -> List[EpidemicState]:
        return [self.state_at(k) for k in range(self.grid.n)]

    @property
    def final_state(self) -> EpidemicState:
        return self.state_at(self.grid.n - 1)

    def truncated(self, node: int) -> "Trajectory":
        grid = self.grid.prefix(node)
        return Trajectory(grid, self.compartments[:grid.n], self.rates[:grid.n])


@dataclass(frozen=True, eq=False)
class AdjointTrajectory:
    """Costates on a grid; the terminal node is zero."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = check_length(self.values, self.grid, "adjoint values")
        if values.ndim != 2 or values.shape[1] != 4:
            raise DimensionError(f"adjoint values must have shape (n, 4), got {values.shape}")
        if np.any(values[-1] != 0.0):
            raise GridError("adjoint terminal node must be zero")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def lam_s(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def lam_v(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def lam_i(self) -> np.ndarray:
        return self.values[:, 2]

    @property
    def lam_r(self) -> np.ndarray:
        return self.values[:, 3]

    def at(self, node: int) -> AdjointState:
        return AdjointState(*(float(value) for value in self.values[node]))
