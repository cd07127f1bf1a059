"""
Linear-world primitives: parameters, state records, remoteness, trade cost,
border first-order conditions and welfare.

The world is the line [-1, 1]. Right-hemisphere formulas are written once;
left-hemisphere states are evaluated by mirroring t -> -t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Protocol

logger = logging.getLogger(__name__)


class GeolineError(Exception):
    """Numerical failure in the model."""

    exit_code = 2


class ValidationError(GeolineError, ValueError):
    """Invalid input or document."""

    exit_code = 1


class InfeasibleCentralState(GeolineError):
    pass


class DegenerateEquality(ValidationError):
    pass


class StateCountChanged(GeolineError):
    pass


class SameState(ValidationError):
    pass


class PolarState(ValidationError):
    pass


class UnknownState(ValidationError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Primitive constants of the model plus solver tolerances."""

    tau: float = 1.0
    h: float = 0.2
    gamma: float = 2.0
    alpha: float = 0.5
    psi: float = 1.0
    eps_border: float = 1e-12
    eps_size: float = 1e-6
    fd_step: float = 1e-4

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.tau <= 0:
            raise ValidationError(f"tau must be > 0, got {self.tau}")
        if self.h <= 0:
            raise ValidationError(f"h must be > 0, got {self.h}")
        if self.gamma <= 1:
            raise ValidationError(f"gamma must be > 1, got {self.gamma}")
        if not 0 < self.alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.psi <= 0:
            raise ValidationError(f"psi must be > 0, got {self.psi}")
        if not 0 < self.eps_border < self.eps_size < 1:
            raise ValidationError(
                f"need 0 < eps_border < eps_size < 1, got {self.eps_border}, {self.eps_size}"
            )
        if self.fd_step <= 0:
            raise ValidationError(f"fd_step must be > 0, got {self.fd_step}")

    @property
    def k(self) -> float:
        """tau * (gamma - 1), the exponent scale shared by every FOC."""
        return self.tau * (self.gamma - 1.0)

    @property
    def h_max(self) -> float:
        """Governance cost at which the first inch of state 0 stops paying."""
        return self.tau * math.exp(self.k)

    def with_changes(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NormalizationConstants:
    kappa: float
    zeta: float
    p: float
    y: float
    land_income: float
    labor_income: float
    l0: float


@dataclass(frozen=True)
class StateRecord:
    index: int
    left: float
    right: float
    size: float
    remoteness: float
    is_polar: bool = False

    @property
    def right_form(self) -> tuple[float, float]:
        """(proximal, distal) borders in right-hemisphere coordinates."""
        if self.index < 0:
            return -self.right, -self.left
        return self.left, self.right

    def contains(self, t: float) -> bool:
        return self.left <= t <= self.right


@dataclass(frozen=True)
class WelfareBundle:
    c_lord: float
    c_labor: float
    u_lord: float
    v_labor: float
    w_weighted: float
    phi: float = 0.0


class Locator(Protocol):
    def locate(self, t: float) -> StateRecord: ...


def log_remoteness(left: float, right: float, tau: float) -> float:
    return 0.5 * tau * ((1.0 + left) ** 2 + (1.0 - right) ** 2)


def _check_coordinate(name: str, value: float) -> None:
    if not -1.0 <= value <= 1.0:
        raise ValidationError(f"{name}={value!r} lies outside the world [-1, 1]")


def remoteness(left_border: float, right_border: float, params: ModelParams) -> float:
    """Remoteness of a state spanning [left_border, right_border]."""
    _check_coordinate("left_border", left_border)
    _check_coordinate("right_border", right_border)
    if not left_border < right_border:
        raise ValidationError(f"inverted borders: {left_border} >= {right_border}")
    return math.exp(log_remoteness(left_border, right_border, params.tau))


def trade_cost(t: float, s: float, partition: Locator, params: ModelParams) -> float:
    """Cost factor paid at t for goods from s; 1 inside t's own state."""
    _check_coordinate("t", t)
    _check_coordinate("s", s)
    home = partition.locate(t)
    if partition.locate(s) == home:
        return 1.0
    gap = home.left - s if s < home.left else s - home.right
    return math.exp(params.tau * max(gap, 0.0))


def foc_residual(b_prev: float, size: float, h_eff: float, params: ModelParams) -> float:
    """tau R^(gamma-1) (1 - b_prev - size) - h_eff for a right-hemisphere state."""
    if b_prev < 0 or size < 0 or b_prev + size > 1.0:
        raise ValidationError(f"state [{b_prev}, {b_prev + size}] is not admissible")
    x = 1.0 - b_prev - size
    log_r = log_remoteness(b_prev, b_prev + size, params.tau)
    return params.tau * math.exp((params.gamma - 1.0) * log_r) * x - h_eff


def foc0_residual(size: float, h_eff: float, params: ModelParams) -> float:
    """Central-state condition: tau exp(k (1 - S/2)^2) (1 - S) - h_eff."""
    if not 0 <= size <= 2.0:
        raise ValidationError(f"central state size {size} is not admissible")
    return params.tau * math.exp(params.k * (1.0 - size / 2.0) ** 2) * (1.0 - size) - h_eff


def state_foc_residual(state: StateRecord, h_eff: float, params: ModelParams) -> float:
    if state.is_polar:
        raise PolarState(f"state {state.index} is a polar semi-state")
    if state.index == 0:
        return foc0_residual(state.size, h_eff, params)
    proximal, _ = state.right_form
    return foc_residual(proximal, state.size, h_eff, params)


def normalization(params: ModelParams) -> NormalizationConstants:
    kappa = 1.0
    return NormalizationConstants(
        kappa=kappa,
        zeta=kappa / 2.0,
        p=params.alpha / 2.0,
        y=2.0 / params.alpha,
        land_income=params.alpha * kappa,
        labor_income=(1.0 - params.alpha) * kappa,
        l0=1.0,
    )


def consumption_bundle(state: StateRecord, params: ModelParams, phi: float = 0.0) -> WelfareBundle:
    if state.remoteness <= 0 or not math.isfinite(state.remoteness):
        raise ValidationError(f"state {state.index} has invalid remoteness {state.remoteness}")
    if phi < 0:
        raise ValidationError(f"phi must be >= 0, got {phi}")
    g = params.gamma
    c_lord = 1.0 / state.remoteness
    c_labor = ((1.0 - params.alpha) / params.alpha) ** 2 / state.remoteness
    u_lord = c_lord ** (1.0 - g) / (1.0 - g) - params.h * state.size
    v_labor = params.psi * c_labor ** (1.0 - g) / (1.0 - g)
    return WelfareBundle(
        c_lord=c_lord,
        c_labor=c_labor,
        u_lord=u_lord,
        v_labor=v_labor,
        w_weighted=u_lord + phi * v_labor,
        phi=phi,
    )


def locale_welfare(partition: Locator, t: float, params: ModelParams, phi: float = 0.0) -> WelfareBundle:
    """Welfare at locale t; every locale of a state shares its remoteness."""
    _check_coordinate("t", t)
    return consumption_bundle(partition.locate(t), params, phi)
