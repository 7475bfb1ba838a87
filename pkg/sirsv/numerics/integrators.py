"""
Fixed-step integrators on uniform grids

Vector fields are plain callables on floats:
- forward:  rhs(s, v, i, r, rate) -> (ds, dv, di, dr[, drate])
- backward: rhs(lam_s, lam_v, lam_i, lam_r, s, v, i, r, u) -> (dlam_s, ..., dlam_r)

Loops run on Python floats; results are packed into numpy arrays once.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid as _scipy_trapezoid

from sirsv.errors import ConfigurationError, IntegrationInstabilityError
from sirsv.model.params import AdjointState, EpidemicState
from sirsv.numerics.grid import AdjointTrajectory, TimeGrid, Trajectory, check_length

# Integrator abort threshold for negative compartments
INSTABILITY_SLACK = 1e-6


def _check_stable(values: np.ndarray, grid: TimeGrid, allow_negative: bool = False) -> None:
    finite = np.isfinite(values).all(axis=1)
    if not finite.all():
        node = int(np.argmin(finite))
        raise IntegrationInstabilityError("non-finite value", node, float(grid.times[node]))
    if not allow_negative:
        low = values.min(axis=1) < -INSTABILITY_SLACK
        if low.any():
            node = int(np.argmax(low))
            raise IntegrationInstabilityError(
                f"compartment below -{INSTABILITY_SLACK}", node, float(grid.times[node])
            )


def euler_forward(rhs: Callable, init: EpidemicState, grid: TimeGrid) -> Trajectory:
    """
    Explicit Euler for a system whose rate evolves with the state.

    The rate (fifth component) is clamped to [0, 1] after each step;
    compartments are never clamped.
    """
    return euler_until(rhs, init, grid)[0]


def euler_until(
    rhs: Callable,
    init: EpidemicState,
    grid: TimeGrid,
    settled: Optional[Callable[[tuple], bool]] = None,
) -> Tuple[Trajectory, Optional[int]]:
    """
    Euler with an optional stopping rule.

    `settled` sees the derivative at node k before the step from k is taken.
    When it returns True the remaining nodes repeat node k and k is returned
    as the stop node; otherwise the stop node is None.
    """
    dt = grid.dt
    s, v, i, r, x = init.s, init.v, init.i, init.r, init.rate
    rows = [(s, v, i, r)]
    rates = [x]
    stop = None
    for k in range(grid.steps):
        derivative = rhs(s, v, i, r, x)
        if settled is not None and settled(derivative):
            stop = k
            break
        ds, dv, di, dr, dx = derivative
        s += dt * ds
        v += dt * dv
        i += dt * di
        r += dt * dr
        x += dt * dx
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
        rows.append((s, v, i, r))
        rates.append(x)
    else:
        if settled is not None and settled(rhs(s, v, i, r, x)):
            stop = grid.steps

    padding = grid.n - len(rows)
    if padding:
        rows.extend([(s, v, i, r)] * padding)
        rates.extend([x] * padding)

    compartments = np.array(rows)
    _check_stable(compartments, grid)
    return Trajectory(grid, compartments, np.array(rates)), stop


def rk4_forward(rhs: Callable, init: EpidemicState, grid: TimeGrid, control: Sequence[float]) -> Trajectory:
    """Classical RK4 with an exogenous rate; half-step rates are node averages."""
    control = check_length(control, grid, "control")
    u_nodes = control.tolist()
    dt = grid.dt
    half = 0.5 * dt
    sixth = dt / 6.0
    s, v, i, r = init.s, init.v, init.i, init.r
    rows = [(s, v, i, r)]
    for k in range(grid.steps):
        u0 = u_nodes[k]
        u1 = u_nodes[k + 1]
        um = 0.5 * (u0 + u1)
        a = rhs(s, v, i, r, u0)
        b = rhs(s + half * a[0], v + half * a[1], i + half * a[2], r + half * a[3], um)
        c = rhs(s + half * b[0], v + half * b[1], i + half * b[2], r + half * b[3], um)
        d = rhs(s + dt * c[0], v + dt * c[1], i + dt * c[2], r + dt * c[3], u1)
        s += sixth * (a[0] + 2.0 * (b[0] + c[0]) + d[0])
        v += sixth * (a[1] + 2.0 * (b[1] + c[1]) + d[1])
        i += sixth * (a[2] + 2.0 * (b[2] + c[2]) + d[2])
        r += sixth * (a[3] + 2.0 * (b[3] + c[3]) + d[3])
        rows.append((s, v, i, r))

    compartments = np.array(rows)
    _check_stable(compartments, grid)
    return Trajectory(grid, compartments, control.copy())


def rk4_backward(
    rhs: Callable,
    terminal: AdjointState,
    grid: TimeGrid,
    states: Trajectory,
    control: Sequence[float],
) -> AdjointTrajectory:
    """
    Classical RK4 from t_end down to t0 for the costate system.

    State and control at half-steps are averages of the adjacent nodes.
    """
    if not terminal.is_zero():
        raise ConfigurationError("terminal costate must be zero")
    control = check_length(control, grid, "control")
    check_length(states.compartments, grid, "states")
    u_nodes = control.tolist()
    y = states.compartments.tolist()
    dt = grid.dt
    half = 0.5 * dt
    sixth = dt / 6.0

    n = grid.n
    values = [None] * n
    ls = lv = li = lr = 0.0
    values[n - 1] = (0.0, 0.0, 0.0, 0.0)
    for k in range(n - 1, 0, -1):
        s1, v1, i1, r1 = y[k]
        s0, v0, i0, r0 = y[k - 1]
        sm, vm, im, rm = 0.5 * (s0 + s1), 0.5 * (v0 + v1), 0.5 * (i0 + i1), 0.5 * (r0 + r1)
        u1 = u_nodes[k]
        u0 = u_nodes[k - 1]
        um = 0.5 * (u0 + u1)
        a = rhs(ls, lv, li, lr, s1, v1, i1, r1, u1)
        b = rhs(ls - half * a[0], lv - half * a[1], li - half * a[2], lr - half * a[3], sm, vm, im, rm, um)
        c = rhs(ls - half * b[0], lv - half * b[1], li - half * b[2], lr - half * b[3], sm, vm, im, rm, um)
        d = rhs(ls - dt * c[0], lv - dt * c[1], li - dt * c[2], lr - dt * c[3], s0, v0, i0, r0, u0)
        ls -= sixth * (a[0] + 2.0 * (b[0] + c[0]) + d[0])
        lv -= sixth * (a[1] + 2.0 * (b[1] + c[1]) + d[1])
        li -= sixth * (a[2] + 2.0 * (b[2] + c[2]) + d[2])
        lr -= sixth * (a[3] + 2.0 * (b[3] + c[3]) + d[3])
        values[k - 1] = (ls, lv, li, lr)

    adjoints = np.array(values)
    _check_stable(adjoints, grid, allow_negative=True)
    return AdjointTrajectory(grid, adjoints)


def trapezoid(samples: Sequence[float], grid: TimeGrid) -> float:
    """Trapezoidal rule on the grid nodes."""
    samples = check_length(samples, grid, "samples")
    return float(_scipy_trapezoid(samples, dx=grid.dt))
