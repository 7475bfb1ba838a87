"""
Independent Reference Computations

Closed-form SIRS equilibrium, finite-difference Hamiltonian gradients and
an exhaustive piecewise-constant control search. None of these share code
paths with the solvers they are used to check.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sirsv.errors import ConfigurationError
from sirsv.model.dynamics import adjoint_terms, candidate_terms, dh_du_terms, hamiltonian_terms
from sirsv.model.params import AdjointState, EpidemicState, ModelParams
from sirsv.numerics.grid import TimeGrid
from sirsv.solvers.behavior_solver import run_ne
from sirsv.solvers.control_solver import FbsConfig, evaluate_objective, solve_fbs

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10 ** 6
DEFAULT_FD_STEP = 1e-6


@dataclass(frozen=True)
class EndemicEquilibrium:
    s_star: float
    i_star: float
    r_star: float
    disease_free: bool = False
    note: str = ""


def sirs_equilibrium(p: ModelParams) -> EndemicEquilibrium:
    """
    Steady state of the SIRS reduction (no vaccination, V = 0).

    S* = gamma/beta, I* = omega (1 - gamma/beta) / (omega + gamma),
    R* = gamma I* / omega. Subcritical transmission and omega = 0 have no
    endemic state and return the disease-free point (1, 0, 0).
    """
    if p.beta <= p.gamma:
        return EndemicEquilibrium(1.0, 0.0, 0.0, disease_free=True, note="beta/gamma <= 1")
    if p.omega == 0:
        return EndemicEquilibrium(1.0, 0.0, 0.0, disease_free=True,
                                  note="omega = 0: SIR without an endemic state")
    s_star = p.gamma / p.beta
    i_star = p.omega * (1.0 - s_star) / (p.omega + p.gamma)
    r_star = p.gamma * i_star / p.omega
    return EndemicEquilibrium(s_star, i_star, r_star)


def fd_hamiltonian_grad(
    state: EpidemicState,
    adj: AdjointState,
    u: float,
    p: ModelParams,
    h: float = DEFAULT_FD_STEP,
) -> Tuple[float, float, float, float, float]:
    """Central differences of H in (S, V, I, R, u)."""
    if not h > 0:
        raise ConfigurationError(f"finite-difference step must be positive, got {h}")
    theta = p.as_tuple()
    lam = adj.as_tuple()
    point = [state.s, state.v, state.i, state.r, u]
    grad = []
    for k in range(5):
        up = list(point)
        down = list(point)
        up[k] += h
        down[k] -= h
        grad.append((hamiltonian_terms(*up, *lam, theta) - hamiltonian_terms(*down, *lam, theta)) / (2.0 * h))
    return tuple(grad)


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    control: np.ndarray
    objective_j: float
    levels: Tuple[float, ...]
    evaluations: int


def piecewise_control(grid: TimeGrid, intervals: int, levels: Sequence[float]) -> np.ndarray:
    """Node values of a control that is constant on `intervals` equal pieces."""
    width = (grid.t_end - grid.t0) / intervals
    pieces = np.minimum(((grid.times - grid.t0) / width).astype(int), intervals - 1)
    return np.asarray(levels, dtype=float)[pieces]


def brute_force_control(
    p: ModelParams,
    init: EpidemicState,
    grid: TimeGrid,
    intervals: int,
    levels: Sequence[float],
) -> BruteForceResult:
    """
    Evaluate every piecewise-constant control with values from `levels`.

    Ties go to the lexicographically smallest level sequence.
    """
    if intervals < 1:
        raise ConfigurationError(f"intervals must be at least 1, got {intervals}")
    levels = sorted(float(level) for level in levels)
    if not levels:
        raise ConfigurationError("levels must not be empty")
    budget = len(levels) ** intervals
    if budget > MAX_ENUMERATION:
        raise ConfigurationError(
            f"{len(levels)}^{intervals} = {budget} candidates exceeds the limit of {MAX_ENUMERATION}"
        )

    best_j = np.inf
    best_levels: Tuple[float, ...] = ()
    evaluations = 0
    for choice in itertools.product(levels, repeat=intervals):
        j = evaluate_objective(p, init, grid, piecewise_control(grid, intervals, choice))
        evaluations += 1
        if j < best_j:
            best_j = j
            best_levels = choice

    return BruteForceResult(
        control=piecewise_control(grid, intervals, best_levels),
        objective_j=float(best_j),
        levels=best_levels,
        evaluations=evaluations,
    )


# ============================================================================
# Diagnostics
# ============================================================================


@dataclass(frozen=True)
class DiagnosticResult:
    name: str
    passed: bool
    detail: str


def _random_point(rng: np.random.Generator, p: ModelParams):
    s, v, i, r = rng.dirichlet(np.ones(4))
    state = EpidemicState.unchecked(s, v, i, r, 0.0)
    adj = AdjointState(*rng.normal(0.0, 1.0, size=4))
    u = float(rng.uniform(0.0, p.u_max))
    return state, adj, u


def check_adjoint_gradients(p: ModelParams, samples: int = 200, seed: int = 0,
                            rtol: float = 1e-4, atol: float = 1e-8) -> DiagnosticResult:
    rng = np.random.default_rng(seed)
    theta = p.as_tuple()
    worst = 0.0
    for _ in range(samples):
        state, adj, u = _random_point(rng, p)
        fd = np.array(fd_hamiltonian_grad(state, adj, u, p))
        analytic = np.array(
            [-value for value in adjoint_terms(*adj.as_tuple(), state.s, state.v, state.i, state.r, u, theta)]
            + [dh_du_terms(state.s, state.i, u, adj.lam_s, adj.lam_v, theta)]
        )
        excess = np.abs(analytic - fd) / (atol + rtol * np.abs(fd))
        worst = max(worst, float(excess.max()))
    return DiagnosticResult(
        "adjoint vs finite differences", worst <= 1.0,
        f"{samples} random points, worst error {worst:.3g} x tolerance",
    )


def check_candidate_stationarity(p: ModelParams, samples: int = 200, seed: int = 1,
                                 tol: float = 1e-8) -> DiagnosticResult:
    """dH/du vanishes at every interior candidate control."""
    if p.c_v == 0:
        return DiagnosticResult("candidate stationarity", False, "c_v = 0: candidate undefined")
    rng = np.random.default_rng(seed)
    theta = p.as_tuple()
    worst = 0.0
    interior = 0
    for _ in range(samples):
        state, adj, _ = _random_point(rng, p)
        u = candidate_terms(state.s, state.i, adj.lam_s, adj.lam_v, theta)
        if 0.0 < u < p.u_max:
            interior += 1
            worst = max(worst, abs(dh_du_terms(state.s, state.i, u, adj.lam_s, adj.lam_v, theta)))
    return DiagnosticResult(
        "candidate stationarity", worst < tol,
        f"{interior} interior candidates, max |dH/du| {worst:.3g}",
    )


def check_sirs_reduction(p: ModelParams, t_end: float = 5000.0, tol: float = 1e-3) -> DiagnosticResult:
    """Behavior model without vaccination settles at the closed-form SIRS point."""
    expected = sirs_equilibrium(p)
    init = EpidemicState(s=0.99, v=0.0, i=0.01, r=0.0, rate=0.0)
    run = run_ne(p, init, TimeGrid(0.0, t_end, 0.1))
    final = run.final_state
    error = max(abs(final.s - expected.s_star), abs(final.i - expected.i_star))
    return DiagnosticResult(
        "SIRS reduction", error < tol,
        f"final (s, i) = ({final.s:.5f}, {final.i:.5f}), "
        f"closed form ({expected.s_star:.5f}, {expected.i_star:.5f})",
    )


def check_brute_force_dominance(p: ModelParams, init: EpidemicState, intervals: int = 4,
                                level_count: int = 5, slack: float = 1e-2) -> DiagnosticResult:
    """Sweep solution within 1% of the best piecewise-constant control on a tiny grid."""
    grid = TimeGrid(0.0, 10.0, 0.5)
    levels = np.linspace(0.0, p.u_max, level_count)
    best = brute_force_control(p, init, grid, intervals, levels)
    run = solve_fbs(p, init, FbsConfig(grid=grid))
    passed = run.converged and run.objective_j <= (1.0 + slack) * best.objective_j
    return DiagnosticResult(
        "brute-force dominance", passed,
        f"J_sweep = {run.objective_j:.6g}, best of {best.evaluations} = {best.objective_j:.6g}",
    )


def run_diagnostics(p: ModelParams, init: Optional[EpidemicState] = None, seed: int = 0) -> List[DiagnosticResult]:
    """Run every oracle check against the given parameters."""
    init = init or EpidemicState()
    results = [
        check_adjoint_gradients(p, seed=seed),
        check_candidate_stationarity(p, seed=seed + 1),
        check_sirs_reduction(p),
    ]
    if p.c_v > 0:
        results.append(check_brute_force_dominance(p, init))
    else:
        results.append(DiagnosticResult("brute-force dominance", False, "c_v = 0: sweep undefined"))
    for result in results:
        log = logger.info if result.passed else logger.warning
        log("%s: %s (%s)", result.name, "passed" if result.passed else "FAILED", result.detail)
    return results
