"""Interstate migration under free labor mobility between two states."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from core import PolarState, SameState, StateRecord, ValidationError, normalization
from solver import Partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MigrationResult:
    from_state: int
    to_state: int
    flow: float
    phi_from: float
    phi_to: float
    residual: float
    flow_half_gravity: float
    wage_from: float
    wage_to: float


def phi_factor(b_k: float, gamma: float) -> float:
    """Locational advantage (1 - b_k)^(1/(gamma-1)) of a state with distal border b_k."""
    if not 0 <= b_k < 1:
        raise ValidationError(f"b_k={b_k} must lie in [0, 1)")
    if gamma <= 1:
        raise ValidationError(f"gamma must be > 1, got {gamma}")
    return (1.0 - b_k) ** (1.0 / (gamma - 1.0))


def _state_phi(state: StateRecord, gamma: float) -> float:
    # state 0's border condition pins R_0^(gamma-1) (1 - S_0), not (1 - b_0)
    if state.index == 0:
        return phi_factor(state.size, gamma)
    _, distal = state.right_form
    return phi_factor(distal, gamma)


def migration_flow(partition: Partition, m: int, n: int) -> MigrationResult:
    """Labor flow from state m to state n once their common border opens.

    Positive when n is proximal to m. Left-hemisphere states are mirrored.
    """
    if m == n:
        raise SameState(f"migration needs two distinct states, got {m} twice")
    sm, sn = partition.state(m), partition.state(n)
    for s in (sm, sn):
        if s.is_polar:
            raise PolarState(f"polar semi-state {s.index} does not take part in migration")

    params = partition.params
    phi_m, phi_n = _state_phi(sm, params.gamma), _state_phi(sn, params.gamma)
    size_m, size_n = sm.size, sn.size

    # the border condition gives R_n / R_m = Phi_m / Phi_n
    flow = size_m * size_n * (phi_n - phi_m) / (size_n * phi_n + size_m * phi_m)
    half_gravity = size_m * size_n * (phi_n - phi_m) / (phi_n + phi_m)

    residual = (size_n / size_m) * (size_m - flow) / (size_n + flow) - sn.remoteness / sm.remoteness

    pay = normalization(params).labor_income
    wage_from = pay * size_m / (size_m - flow)
    wage_to = pay * size_n / (size_n + flow)
    logger.debug("migration %d -> %d: flow=%g residual=%g", m, n, flow, residual)
    return MigrationResult(
        from_state=m,
        to_state=n,
        flow=flow,
        phi_from=phi_m,
        phi_to=phi_n,
        residual=residual,
        flow_half_gravity=half_gravity,
        wage_from=wage_from,
        wage_to=wage_to,
    )
