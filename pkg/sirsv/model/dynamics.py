"""
SIRS/V Dynamics, Cost and Pontryagin Kernels

Two layers:
- scalar kernels on plain floats (`*_terms`), called in the integrator loops
- typed operations on EpidemicState / AdjointState for library callers

The adjoint system and the optimality formula are derived from the
Hamiltonian

    H = (c I + c_v u S)^2 + lam_S S' + lam_V V' + lam_I I' + lam_R R'

and checked against finite differences of H in the oracle module.
"""

from typing import Callable, Tuple

from sirsv.errors import ConfigurationError, ControlBoundsError
from sirsv.model.params import AdjointState, EpidemicState, ModelParams, ParamTuple, StateDerivative

# Below this susceptible fraction the control has nothing to act on
S_FLOOR = 1e-9

Vector4 = Tuple[float, float, float, float]
Vector5 = Tuple[float, float, float, float, float]

# ============================================================================
# Scalar kernels
# ============================================================================


def behavior_terms(s: float, v: float, i: float, r: float, x: float, theta: ParamTuple) -> Vector5:
    """Right-hand side of the epidemic + imitation system."""
    beta, gamma, omega, eta, m, c, k, c_v, _ = theta
    infect_s = beta * s * i
    infect_v = (1.0 - eta) * beta * v * i
    vaccinate = x * s
    wane = omega * r
    recover = gamma * i
    return (
        -infect_s - vaccinate + wane,
        vaccinate - infect_v,
        infect_s + infect_v - recover,
        recover - wane,
        m * x * (1.0 - x) * (c * i - k * c_v),
    )


def control_terms(s: float, v: float, i: float, r: float, u: float, theta: ParamTuple) -> Vector5:
    """Right-hand side of the controlled system; the rate is exogenous."""
    beta, gamma, omega, eta = theta[0], theta[1], theta[2], theta[3]
    infect_s = beta * s * i
    infect_v = (1.0 - eta) * beta * v * i
    vaccinate = u * s
    wane = omega * r
    recover = gamma * i
    return (
        -infect_s - vaccinate + wane,
        vaccinate - infect_v,
        infect_s + infect_v - recover,
        recover - wane,
        0.0,
    )


def running_cost_value(s: float, i: float, u: float, theta: ParamTuple) -> float:
    social_cost = theta[5] * i + theta[7] * u * s
    return social_cost * social_cost


def hamiltonian_terms(
    s: float, v: float, i: float, r: float, u: float,
    lam_s: float, lam_v: float, lam_i: float, lam_r: float,
    theta: ParamTuple,
) -> float:
    ds, dv, di, dr, _ = control_terms(s, v, i, r, u, theta)
    return (running_cost_value(s, i, u, theta)
            + lam_s * ds + lam_v * dv + lam_i * di + lam_r * dr)


def adjoint_terms(
    lam_s: float, lam_v: float, lam_i: float, lam_r: float,
    s: float, v: float, i: float, r: float, u: float,
    theta: ParamTuple,
) -> Vector4:
    """Negated partial derivatives of the Hamiltonian w.r.t. S, V, I, R."""
    beta, gamma, omega, eta, _, c, _, c_v, _ = theta
    twice_cost = 2.0 * (c * i + c_v * u * s)
    leak = (1.0 - eta) * beta
    return (
        -twice_cost * c_v * u + lam_s * (beta * i + u) - lam_v * u - lam_i * beta * i,
        (lam_v - lam_i) * leak * i,
        (-twice_cost * c + lam_s * beta * s + lam_v * leak * v
         - lam_i * (beta * s + leak * v - gamma) - lam_r * gamma),
        (lam_r - lam_s) * omega,
    )


def dh_du_terms(s: float, i: float, u: float, lam_s: float, lam_v: float, theta: ParamTuple) -> float:
    """Analytic dH/du."""
    c, c_v = theta[5], theta[7]
    return 2.0 * (c * i + c_v * u * s) * c_v * s - (lam_s - lam_v) * s


def candidate_terms(s: float, i: float, lam_s: float, lam_v: float, theta: ParamTuple) -> float:
    """Clamped vertex of H(u)."""
    c, c_v, u_max = theta[5], theta[7], theta[8]
    if s <= S_FLOOR:
        return 0.0
    vertex = ((lam_s - lam_v) / (2.0 * c_v) - c * i) / (c_v * s)
    return min(max(vertex, 0.0), u_max)


# ============================================================================
# Bound vector fields for the integrators
# ============================================================================


def behavior_field(p: ModelParams) -> Callable[..., Vector5]:
    theta = p.as_tuple()

    def field(s, v, i, r, x):
        return behavior_terms(s, v, i, r, x, theta)

    return field


def control_field(p: ModelParams) -> Callable[..., Vector5]:
    """control_terms with the parameters bound as closure locals (one call per stage)."""
    beta, gamma, omega, eta = p.beta, p.gamma, p.omega, p.eta
    leak = 1.0 - eta

    def field(s, v, i, r, u):
        infect_s = beta * s * i
        infect_v = leak * beta * v * i
        vaccinate = u * s
        wane = omega * r
        recover = gamma * i
        return (
            -infect_s - vaccinate + wane,
            vaccinate - infect_v,
            infect_s + infect_v - recover,
            recover - wane,
            0.0,
        )

    return field


def adjoint_field(p: ModelParams) -> Callable[..., Vector4]:
    """adjoint_terms with the parameters bound as closure locals."""
    beta, gamma, omega, eta, c, c_v = p.beta, p.gamma, p.omega, p.eta, p.c, p.c_v
    leak = (1.0 - eta) * beta

    def field(lam_s, lam_v, lam_i, lam_r, s, v, i, r, u):
        twice_cost = 2.0 * (c * i + c_v * u * s)
        return (
            -twice_cost * c_v * u + lam_s * (beta * i + u) - lam_v * u - lam_i * beta * i,
            (lam_v - lam_i) * leak * i,
            (-twice_cost * c + lam_s * beta * s + lam_v * leak * v
             - lam_i * (beta * s + leak * v - gamma) - lam_r * gamma),
            (lam_r - lam_s) * omega,
        )

    return field


# ============================================================================
# Typed operations
# ============================================================================


def _check_control(u: float, p: ModelParams) -> None:
    if not 0.0 <= u <= p.u_max:
        raise ControlBoundsError(f"control {u!r} outside [0, {p.u_max!r}]")


def behavior_rhs(state: EpidemicState, p: ModelParams) -> StateDerivative:
    return StateDerivative(*behavior_terms(state.s, state.v, state.i, state.r, state.rate, p.as_tuple()))


def control_rhs(state: EpidemicState, u: float, p: ModelParams) -> StateDerivative:
    _check_control(u, p)
    return StateDerivative(*control_terms(state.s, state.v, state.i, state.r, u, p.as_tuple()))


def running_cost(state: EpidemicState, u: float, p: ModelParams) -> float:
    """(c I + c_v u S)^2"""
    return running_cost_value(state.s, state.i, u, p.as_tuple())


def hamiltonian(state: EpidemicState, adj: AdjointState, u: float, p: ModelParams) -> float:
    return hamiltonian_terms(state.s, state.v, state.i, state.r, u, *adj.as_tuple(), p.as_tuple())


def adjoint_rhs(state: EpidemicState, adj: AdjointState, u: float, p: ModelParams) -> AdjointState:
    return AdjointState(*adjoint_terms(*adj.as_tuple(), state.s, state.v, state.i, state.r, u, p.as_tuple()))


def optimal_control_candidate(state: EpidemicState, adj: AdjointState, p: ModelParams) -> float:
    """
    Pointwise minimizer of H over [0, u_max].

    Raises ConfigurationError when c_v = 0 (the vertex is undefined);
    returns 0 when the susceptible pool is empty.
    """
    if p.c_v == 0:
        raise ConfigurationError("optimality formula undefined: requires c_v != 0")
    return candidate_terms(state.s, state.i, adj.lam_s, adj.lam_v, p.as_tuple())
