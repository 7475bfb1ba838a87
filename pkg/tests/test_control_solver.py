import logging

import numpy as np
import pytest

from sirsv.errors import ConfigurationError, ControlBoundsError, DimensionError
from sirsv.model.dynamics import control_field
from sirsv.model.params import EpidemicState, ModelParams
from sirsv.numerics.integrators import rk4_forward, trapezoid
from sirsv.solvers import control_solver
from sirsv.solvers.control_solver import (
    FbsConfig,
    evaluate_objective,
    optimality_residual,
    solve_fbs,
)


@pytest.fixture
def short_fbs(short_grid) -> FbsConfig:
    return FbsConfig(grid=short_grid)


class TestFbsConfig:
    @pytest.mark.parametrize("kwargs", [
        {"relaxation": 0.0},
        {"relaxation": 1.5},
        {"conv_tol": 0.0},
        {"max_iters": 0},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            FbsConfig(**kwargs)

    def test_defaults(self):
        cfg = FbsConfig()
        assert (cfg.relaxation, cfg.conv_tol, cfg.max_iters) == (0.5, 1e-4, 5000)
        assert cfg.grid.t_end == 1000.0 and cfg.grid.dt == 0.1

    def test_initial_control_sequence(self, short_grid):
        cfg = FbsConfig(grid=short_grid, u_init=np.full(short_grid.n, 0.5))
        assert np.all(cfg.initial_control(0.1) == 0.1)
        with pytest.raises(DimensionError):
            FbsConfig(grid=short_grid, u_init=[0.0, 0.1]).initial_control(0.1)


class TestSolveFbs:
    def test_zero_infection_cost_gives_zero_control(self, init, short_fbs):
        run = solve_fbs(ModelParams(c=0.0), init, short_fbs)
        assert run.converged
        assert np.all(run.control == 0.0)
        assert run.objective_j == 0.0

    def test_zero_capacity(self, init, short_fbs):
        p = ModelParams(u_max=0.0)
        run = solve_fbs(p, init, short_fbs)
        grid = short_fbs.grid
        uncontrolled = rk4_forward(control_field(p), init, grid, np.zeros(grid.n))
        assert np.all(run.control == 0.0)
        np.testing.assert_array_equal(run.states.compartments, uncontrolled.compartments)
        assert run.objective_j == pytest.approx(trapezoid((p.c * uncontrolled.i) ** 2, grid))
        assert run.objective_j > 0.0

    def test_requires_vaccination_cost(self, init, short_fbs):
        with pytest.raises(ConfigurationError, match="c_v"):
            solve_fbs(ModelParams(c_v=0.0), init, short_fbs)

    def test_standard_short_horizon(self, params, init, short_fbs):
        run = solve_fbs(params, init, short_fbs)
        assert run.converged
        assert run.iterations == len(run.convergence_history)
        assert np.all(np.isfinite(run.convergence_history))
        assert run.convergence_history[-1] <= short_fbs.conv_tol * max(1.0, run.control.max())
        assert run.control.min() >= 0.0 and run.control.max() <= params.u_max
        assert np.all(run.adjoints.values[-1] == 0.0)
        assert run.objective_j >= 0.0
        assert optimality_residual(run, params).worst <= 1e-3

    def test_objective_matches_evaluation(self, params, init, short_fbs):
        run = solve_fbs(params, init, short_fbs)
        assert run.objective_j == pytest.approx(
            evaluate_objective(params, init, short_fbs.grid, run.control), rel=1e-12
        )

    def test_beats_constant_controls(self, params, init, short_fbs):
        run = solve_fbs(params, init, short_fbs)
        grid = short_fbs.grid
        for level in (0.0, 0.025, 0.05, 0.075, 0.1):
            assert run.objective_j <= evaluate_objective(params, init, grid, np.full(grid.n, level))

    def test_local_perturbations_do_not_improve(self, params, init, short_fbs):
        run = solve_fbs(params, init, short_fbs)
        grid = short_fbs.grid
        third = grid.n // 3
        for start in (0, third, 2 * third):
            perturbed = np.array(run.control)
            perturbed[start:start + third] = np.minimum(perturbed[start:start + third] + 0.01, params.u_max)
            assert run.objective_j <= evaluate_objective(params, init, grid, perturbed) * (1.0 + 1e-9)

    def test_saturated_nodes_sit_exactly_on_the_cap(self, params, init, short_fbs):
        # early on the candidate is u_max; relaxation alone only approaches it
        run = solve_fbs(params, init, short_fbs)
        assert run.control[0] == params.u_max
        assert optimality_residual(run, params, bound_tol=1e-12).worst <= 1e-3

    def test_non_convergence_is_reported(self, params, init, short_grid, caplog):
        cfg = FbsConfig(grid=short_grid, max_iters=1)
        with caplog.at_level(logging.WARNING, logger="sirsv.solvers.control_solver"):
            run = solve_fbs(params, init, cfg)
        assert not run.converged
        assert run.iterations == 1
        assert "did not converge" in caplog.text

    def test_deterministic(self, params, init, short_fbs):
        first = solve_fbs(params, init, short_fbs)
        second = solve_fbs(params, init, short_fbs)
        np.testing.assert_array_equal(first.control, second.control)
        assert first.objective_j == second.objective_j


class TestEvaluateObjective:
    def test_no_infection_no_control(self, params, short_grid):
        init = EpidemicState(s=0.9, v=0.1, i=0.0, r=0.0, rate=0.0)
        assert evaluate_objective(params, init, short_grid, np.zeros(short_grid.n)) == 0.0

    def test_vaccination_only_cost(self, init, short_grid):
        p = ModelParams(c=0.0)
        assert evaluate_objective(p, init, short_grid, np.zeros(short_grid.n)) == 0.0
        assert evaluate_objective(p, init, short_grid, np.full(short_grid.n, p.u_max)) > 0.0

    def test_rejects_out_of_bounds(self, params, init, short_grid):
        with pytest.raises(ControlBoundsError):
            evaluate_objective(params, init, short_grid, np.full(short_grid.n, 0.2))


def test_optimality_residual_flags_suboptimal_control(params, init, short_fbs):
    run = solve_fbs(params, init, FbsConfig(grid=short_fbs.grid, max_iters=1))
    assert optimality_residual(run, params).worst > optimality_residual(
        solve_fbs(params, init, short_fbs), params
    ).worst


def test_truncated_states(params, init, short_fbs):
    run = solve_fbs(params, init, short_fbs)
    head = run.truncated(50)
    assert head.grid.n == 51
    np.testing.assert_array_equal(head.compartments, run.states.compartments[:51])


class TestDamping:
    @pytest.fixture
    def switching_candidate(self, monkeypatch):
        """Bang-bang candidate: u_max below half the cap, 0 above, so a fixed weight never settles."""

        def candidate(states, adjoints, p):
            return np.where(states.rates < 0.5 * p.u_max, p.u_max, 0.0)

        monkeypatch.setattr(control_solver, "_candidate_control", candidate)

    def test_cycling_candidate_converges_with_lower_weight(self, params, init, tiny_grid, switching_candidate, caplog):
        cfg = FbsConfig(grid=tiny_grid, max_iters=500)
        with caplog.at_level(logging.DEBUG, logger="sirsv.solvers.control_solver"):
            run = solve_fbs(params, init, cfg)
        assert run.converged
        assert run.relaxation < cfg.relaxation
        assert run.convergence_history[-1] <= cfg.conv_tol
        assert "blend weight lowered" in caplog.text

    def test_monotone_sweep_keeps_configured_weight(self, init, short_fbs):
        run = solve_fbs(ModelParams(c=0.0), init, short_fbs)
        assert run.relaxation == short_fbs.relaxation

    def test_weight_stops_at_floor(self, params, init, tiny_grid, switching_candidate):
        cfg = FbsConfig(grid=tiny_grid, relaxation=0.8, conv_tol=1e-300, max_iters=200)
        run = solve_fbs(params, init, cfg)
        assert not run.converged
        assert run.relaxation == cfg.relaxation * control_solver.DAMPING_FLOOR
