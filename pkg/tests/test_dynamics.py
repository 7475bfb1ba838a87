import numpy as np
import pytest

from sirsv.errors import ConfigurationError, ControlBoundsError
from sirsv.model.dynamics import (
    adjoint_rhs,
    behavior_rhs,
    control_rhs,
    hamiltonian,
    optimal_control_candidate,
    running_cost,
)
from sirsv.model.params import AdjointState, EpidemicState, ModelParams


class TestBehaviorRhs:
    def test_standard_state(self, params, init):
        d = behavior_rhs(init, params)
        assert d.ds == pytest.approx(-0.1061634, abs=1e-10)
        assert d.dv == pytest.approx(0.09797501, abs=1e-10)
        assert d.di == pytest.approx(0.00485839, abs=1e-10)
        assert d.dr == pytest.approx(0.00333, abs=1e-10)
        assert d.dx == pytest.approx(-0.0036, abs=1e-12)

    def test_compartments_conserved(self, params, init):
        assert abs(behavior_rhs(init, params).compartment_sum()) < 1e-15

    def test_absorbing_rates(self, params):
        for rate in (0.0, 1.0):
            state = EpidemicState(s=0.9, v=0.05, i=0.05, r=0.0, rate=rate)
            assert behavior_rhs(state, params).dx == 0.0

    def test_disease_free_no_vaccination_is_stationary(self, params):
        state = EpidemicState(s=1.0, v=0.0, i=0.0, r=0.0, rate=0.0)
        assert behavior_rhs(state, params).max_norm() == 0.0


class TestControlRhs:
    def test_rate_is_exogenous(self, params, init):
        d = control_rhs(init, 0.05, params)
        assert d.dx == 0.0
        assert d.dv == pytest.approx(0.05 * 0.98 - 0.3 * 0.833 * 0.01 * 0.01)
        assert abs(d.compartment_sum()) < 1e-15

    @pytest.mark.parametrize("u", [-0.01, 0.11])
    def test_bounds(self, params, init, u):
        with pytest.raises(ControlBoundsError):
            control_rhs(init, u, params)

    def test_bounds_are_inclusive(self, params, init):
        control_rhs(init, 0.0, params)
        control_rhs(init, params.u_max, params)


class TestCostAndHamiltonian:
    def test_running_cost(self, params, init):
        assert running_cost(init, 0.1, params) == pytest.approx(0.059 ** 2)

    def test_running_cost_zero_without_infection_or_vaccination(self, params):
        state = EpidemicState(s=0.9, v=0.1, i=0.0, r=0.0)
        assert running_cost(state, 0.0, params) == 0.0

    def test_hamiltonian_reduces_to_cost_with_zero_adjoint(self, params, init):
        assert hamiltonian(init, AdjointState.zero(), 0.05, params) == running_cost(init, 0.05, params)

    def test_hamiltonian_adds_adjoint_weighted_dynamics(self, params, init):
        adj = AdjointState(1.0, 2.0, 3.0, 4.0)
        d = control_rhs(init, 0.05, params)
        expected = running_cost(init, 0.05, params) + d.ds + 2 * d.dv + 3 * d.di + 4 * d.dr
        assert hamiltonian(init, adj, 0.05, params) == pytest.approx(expected)


class TestAdjointRhs:
    def test_zero_adjoint_without_cost(self, init):
        p = ModelParams(c=0.0)
        assert adjoint_rhs(init, AdjointState.zero(), 0.0, p).is_zero()

    def test_recovered_equation(self, params, init):
        adj = AdjointState(0.3, 0.0, 0.0, 0.1)
        assert adjoint_rhs(init, adj, 0.0, params).lam_r == pytest.approx((0.1 - 0.3) * params.omega)

    def test_vaccinated_equation(self, params, init):
        adj = AdjointState(0.0, 0.5, 0.2, 0.0)
        expected = (0.5 - 0.2) * 0.3 * 0.833 * 0.01
        assert adjoint_rhs(init, adj, 0.0, params).lam_v == pytest.approx(expected)


class TestOptimalControlCandidate:
    def test_interior(self, params, init):
        adj = AdjointState(lam_s=0.05, lam_v=0.0)
        u = optimal_control_candidate(init, adj, params)
        assert u == pytest.approx((0.05 - 0.01) / (0.5 * 0.98))
        assert 0.0 < u < params.u_max

    def test_clamped_high(self, params, init):
        assert optimal_control_candidate(init, AdjointState(lam_s=1.0), params) == params.u_max

    def test_clamped_low(self, params, init):
        assert optimal_control_candidate(init, AdjointState.zero(), params) == 0.0

    def test_empty_susceptible_pool(self, params):
        state = EpidemicState(s=0.0, v=0.5, i=0.5, r=0.0)
        assert optimal_control_candidate(state, AdjointState(lam_s=5.0), params) == 0.0

    def test_requires_vaccination_cost(self, init):
        with pytest.raises(ConfigurationError, match="c_v"):
            optimal_control_candidate(init, AdjointState.zero(), ModelParams(c_v=0.0))

    def test_minimizes_hamiltonian(self, params, init):
        adj = AdjointState(lam_s=0.05, lam_v=0.0, lam_i=0.3, lam_r=-0.1)
        u_star = optimal_control_candidate(init, adj, params)
        grid = np.linspace(0.0, params.u_max, 201)
        values = [hamiltonian(init, adj, u, params) for u in grid]
        assert hamiltonian(init, adj, u_star, params) <= min(values) + 1e-15


class TestRandomStates:
    @staticmethod
    def draw_state(rng, rate=0.0):
        s, v, i, r = rng.dirichlet(np.ones(4))
        return EpidemicState(s=s, v=v, i=i, r=r, rate=rate)

    def test_compartment_derivatives_sum_to_zero(self, rng, random_params):
        for _ in range(1000):
            p = random_params()
            state = self.draw_state(rng, rate=rng.uniform(0.0, 1.0))
            assert abs(behavior_rhs(state, p).compartment_sum()) <= 1e-14
            u = rng.uniform(0.0, p.u_max)
            assert abs(control_rhs(state, u, p).compartment_sum()) <= 1e-14

    def test_hamiltonian_is_convex_in_the_rate(self, rng, params):
        h = 0.05
        for _ in range(50):
            state = self.draw_state(rng)
            adj = AdjointState(*rng.uniform(-1.0, 1.0, 4))
            values = [hamiltonian(state, adj, u, params) for u in (0.0, h, 2 * h)]
            curvature = (values[0] - 2 * values[1] + values[2]) / h ** 2
            assert curvature == pytest.approx(2 * params.c_v ** 2 * state.s ** 2, rel=1e-6, abs=1e-12)
            assert curvature > 0.0

    def test_perfect_vaccine_keeps_vaccinated_out_of_infection(self, rng):
        p = ModelParams(eta=1.0)
        for _ in range(20):
            state = self.draw_state(rng)
            u = rng.uniform(0.0, p.u_max)
            assert control_rhs(state, u, p).dv == u * state.s
