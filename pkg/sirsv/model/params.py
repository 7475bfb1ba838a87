"""
Domain Types for the SIRS/V Vaccination Game

ModelParams and EpidemicState are validated on construction (pydantic);
derivative and costate records are plain frozen dataclasses.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Compartment slack tolerated on validated states
NEGATIVE_SLACK = 1e-9
SIMPLEX_TOLERANCE = 1e-6

ParamTuple = Tuple[float, float, float, float, float, float, float, float, float]


def parse_number(value: Any) -> Any:
    """Accept fractions written as text ("1/90") wherever a float is expected."""
    if isinstance(value, str) and "/" in value:
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            return value
    return value


class ModelParams(BaseModel):
    """
    Epidemiological and economic constants.

    Defaults are the standard values; eta has no published standard value
    and defaults to 0.7.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    beta: float = Field(0.833, ge=0, description="transmission rate, 1/day")
    gamma: float = Field(0.333, gt=0, description="recovery rate, 1/day")
    omega: float = Field(1.0 / 90.0, ge=0, description="waning-immunity rate, 1/day")
    eta: float = Field(0.7, ge=0, le=1, description="vaccine efficacy")
    m: float = Field(1.0, ge=0, description="imitation inertia")
    c: float = Field(1.0, ge=0, description="infection cost")
    k: float = Field(0.1, ge=0, description="relative sensitivity to vaccination cost")
    c_v: float = Field(0.5, ge=0, description="vaccination cost")
    u_max: float = Field(0.1, ge=0, le=1, description="maximum control rate, 1/day")

    @field_validator("*", mode="before")
    @classmethod
    def _accept_fractions(cls, value: Any) -> Any:
        return parse_number(value)

    def as_tuple(self) -> ParamTuple:
        """Positional form consumed by the scalar kernels."""
        return (self.beta, self.gamma, self.omega, self.eta, self.m,
                self.c, self.k, self.c_v, self.u_max)

    def with_overrides(self, **overrides: float) -> "ModelParams":
        """New validated instance with some fields replaced."""
        return ModelParams(**{**self.model_dump(), **overrides})


class EpidemicState(BaseModel):
    """One time point of (S, V, I, R) plus the vaccination rate (x or u)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    s: float = 0.98
    v: float = 0.01
    i: float = 0.01
    r: float = 0.0
    rate: float = 0.1

    @field_validator("*", mode="before")
    @classmethod
    def _accept_fractions(cls, value: Any) -> Any:
        return parse_number(value)

    @model_validator(mode="after")
    def _check_simplex(self) -> "EpidemicState":
        for name in ("s", "v", "i", "r"):
            if getattr(self, name) < -NEGATIVE_SLACK:
                raise ValueError(f"compartment {name} is negative: {getattr(self, name)}")
        total = self.s + self.v + self.i + self.r
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise ValueError(f"compartments must sum to 1, got {total!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate!r}")
        return self

    @property
    def compartments(self) -> Tuple[float, float, float, float]:
        return (self.s, self.v, self.i, self.r)

    @classmethod
    def unchecked(cls, s: float, v: float, i: float, r: float, rate: float) -> "EpidemicState":
        """Build from integrator output without re-validating."""
        return cls.model_construct(s=float(s), v=float(v), i=float(i), r=float(r), rate=float(rate))


@dataclass(frozen=True)
class StateDerivative:
    """Time derivatives of the compartments (and of x for the behavior model)."""

    ds: float
    dv: float
    di: float
    dr: float
    dx: float = 0.0

    def max_norm(self) -> float:
        return max(abs(self.ds), abs(self.dv), abs(self.di), abs(self.dr), abs(self.dx))

    def compartment_sum(self) -> float:
        return self.ds + self.dv + self.di + self.dr


@dataclass(frozen=True)
class AdjointState:
    """Costates, one per compartment equation."""

    lam_s: float = 0.0
    lam_v: float = 0.0
    lam_i: float = 0.0
    lam_r: float = 0.0

    @classmethod
    def zero(cls) -> "AdjointState":
        return cls()

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.lam_s, self.lam_v, self.lam_i, self.lam_r)

    def is_zero(self) -> bool:
        return self.as_tuple() == (0.0, 0.0, 0.0, 0.0)
