import logging

import numpy as np
import pytest

from sirsv.analysis.oracle import sirs_equilibrium
from sirsv.errors import ConfigurationError
from sirsv.model.params import EpidemicState, ModelParams
from sirsv.numerics.grid import TimeGrid
from sirsv.solvers.behavior_solver import detect_equilibrium, run_ne


def test_standard_run_keeps_invariants(params, init):
    run = run_ne(params, init, TimeGrid(0.0, 500.0, 0.1))
    traj = run.trajectory
    assert traj.grid.n == 5001
    assert np.all((traj.rates >= 0.0) & (traj.rates <= 1.0))
    assert np.max(np.abs(traj.compartments.sum(axis=1) - 1.0)) < 1e-9
    assert traj.rates[1] < traj.rates[0]


def test_no_vaccination_reduces_to_sirs(params, sirs_init):
    run = run_ne(params, sirs_init, TimeGrid(0.0, 5000.0, 0.1))
    expected = sirs_equilibrium(params)
    assert np.all(run.trajectory.rates == 0.0)
    assert run.final_state.s == pytest.approx(expected.s_star, abs=1e-3)
    assert run.final_state.i == pytest.approx(expected.i_star, abs=1e-3)


def test_equilibrium_detection_matches_run(params, sirs_init):
    run = run_ne(params, sirs_init, TimeGrid(0.0, 5000.0, 0.1))
    assert run.converged
    assert detect_equilibrium(run.trajectory, params, run.eq_tol) == run.equilibrium_time


def test_padding_after_equilibrium(params, sirs_init):
    run = run_ne(params, sirs_init, TimeGrid(0.0, 5000.0, 0.1))
    node = run.equilibrium_node
    tail = run.trajectory.compartments[node:]
    assert np.all(tail == tail[0])
    truncated = run.truncated()
    assert truncated.grid.n == node + 1
    assert truncated.grid.t_end == pytest.approx(run.equilibrium_time)


def test_no_infection_vaccination_decays(params):
    init = EpidemicState(s=0.9, v=0.1, i=0.0, r=0.0, rate=0.5)
    run = run_ne(params, init, TimeGrid(0.0, 100.0, 0.1))
    assert np.all(run.trajectory.i == 0.0)
    assert np.all(np.diff(run.trajectory.rates) < 0.0)


def test_stationary_start_converges_at_first_node(params):
    init = EpidemicState(s=1.0, v=0.0, i=0.0, r=0.0, rate=0.0)
    run = run_ne(params, init, TimeGrid(0.0, 10.0, 0.1))
    assert run.converged
    assert run.equilibrium_time == 0.0
    assert run.equilibrium_node == 0
    assert detect_equilibrium(run.trajectory, params) == 0.0


def test_unconverged_run_is_reported(params, init, caplog):
    with caplog.at_level(logging.WARNING, logger="sirsv.solvers.behavior_solver"):
        run = run_ne(params, init, TimeGrid(0.0, 50.0, 0.1))
    assert not run.converged
    assert run.equilibrium_time is None
    assert run.truncated() is run.trajectory
    assert "did not reach equilibrium" in caplog.text


def test_detect_equilibrium_none_while_moving(params, init):
    run = run_ne(params, init, TimeGrid(0.0, 50.0, 0.1))
    assert detect_equilibrium(run.trajectory, params) is None


def test_default_horizon(params):
    init = EpidemicState(s=1.0, v=0.0, i=0.0, r=0.0, rate=0.0)
    run = run_ne(params, init)
    assert run.trajectory.grid.t_end == 2000.0
    assert run.trajectory.grid.dt == 0.1


def test_rejects_nonpositive_tolerance(params, init):
    with pytest.raises(ConfigurationError):
        run_ne(params, init, TimeGrid(0.0, 1.0, 0.1), eq_tol=0.0)


@pytest.mark.parametrize("rate", [0.0, 1.0])
def test_absorbing_strategies(params, rate):
    init = EpidemicState(s=0.9, v=0.05, i=0.05, r=0.0, rate=rate)
    run = run_ne(params, init, TimeGrid(0.0, 50.0, 0.1))
    assert np.all(run.trajectory.rates == rate)


def test_eta_irrelevant_without_vaccination(sirs_init):
    grid = TimeGrid(0.0, 200.0, 0.1)
    low = run_ne(ModelParams(eta=0.1), sirs_init, grid)
    high = run_ne(ModelParams(eta=0.9), sirs_init, grid)
    np.testing.assert_array_equal(low.trajectory.compartments, high.trajectory.compartments)
