"""
Comparative statics and ideology measures over solved partitions.

Derivatives of the border condition
    F(S; b_prev, tau, h) = tau R^(gamma-1) (1 - b_prev - S) - h
are evaluated in closed form; the central state uses its own condition
    F0(S; tau, h) = tau exp(tau (gamma-1) (1 - S/2)^2) (1 - S) - h.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import pandas as pd

from core import (
    DegenerateEquality,
    InfeasibleCentralState,
    ModelParams,
    PolarState,
    StateCountChanged,
    StateRecord,
    ValidationError,
    log_remoteness,
)
from solver import Partition, solve_partition, solve_partition_given_b0, solve_state0
from trade import Shock
from workers import run_parallel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FocPartials:
    index: int
    f_s: float
    f_tau: float
    f_h: float = -1.0
    f_b: float | None = None


@dataclass(frozen=True)
class SizeResponse:
    index: int
    dsn_dbprev_analytic: float
    f_b: float
    f_b_positive: bool
    taurange_holds: bool


@dataclass(frozen=True)
class ShockRow:
    index: int
    db_db0_fd: float
    db_db0_analytic: float
    ds_db0_fd: float
    ds_db0_analytic: float
    ds_dbprev_analytic: float
    f_b: float
    f_b_positive: bool
    premise_holds: bool
    agrees: bool


@dataclass(frozen=True)
class ShockTable:
    b0: float
    delta_b0: float
    rows: tuple[ShockRow, ...]
    premise_prefix: int
    increasing_in_n: bool

    @property
    def all_agree(self) -> bool:
        return all(r.agrees for r in self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows], columns=[f.name for f in fields(ShockRow)])


@dataclass(frozen=True)
class OpinionStats:
    opinions: dict[int, float]
    mean: float
    variance: float
    n_per_hemisphere: int


@dataclass(frozen=True)
class VarianceSensitivity:
    parameter: str
    delta: float
    variance_before: float
    variance_after: float
    d_var: float
    size_partials: dict[int, float] = field(default_factory=dict)
    state_partials_ok: bool = True


@dataclass(frozen=True)
class SeparatismPoint:
    index: int
    t: float
    sigma: float
    overlap: float
    ideal_left: float
    ideal_right: float
    dsigma_dtau: float
    dsigma_dR: float


def border_effect(b_k: float) -> float:
    """Distal-over-proximal remoteness impact of a border at b_k."""
    if not 0 <= b_k < 1:
        raise ValidationError(f"b_k={b_k} must lie in [0, 1)")
    return (1.0 + b_k) / (1.0 - b_k)


def _interior(partition: Partition, n: int) -> StateRecord:
    state = partition.state(n)
    if state.is_polar:
        raise PolarState(f"state {n} is a polar semi-state")
    return state


def foc_partials(partition: Partition, n: int) -> FocPartials:
    params = partition.params
    state = _interior(partition, n)
    g1, tau = params.gamma - 1.0, params.tau
    if state.index == 0:
        s = state.size
        r_g = math.exp(params.k * (1.0 - s / 2.0) ** 2)
        f_s = -tau * r_g * (1.0 + params.k * (1.0 - s) * (1.0 - s / 2.0))
        f_tau = r_g * (1.0 - s) * (1.0 + params.k * (1.0 - s / 2.0) ** 2)
        return FocPartials(0, f_s, f_tau)

    b_prev, b_n = state.right_form
    s, x = state.size, 1.0 - b_n
    log_r = log_remoteness(b_prev, b_n, tau)
    r_g = math.exp(g1 * log_r)
    f_s = -g1 * r_g * tau**2 * x**2 - tau * r_g
    f_b = g1 * r_g * tau**2 * (2.0 * b_prev + s) * x - tau * r_g
    f_tau = r_g * x * (1.0 + g1 * log_r)
    return FocPartials(state.index, f_s, f_tau, f_b=f_b)


def stability_compensation(partition: Partition, n: int) -> float:
    """dh/dtau keeping state n's borders in place (equals F_tau since F_h = -1)."""
    return foc_partials(partition, n).f_tau


def local_size_response(partition: Partition, n: int) -> SizeResponse:
    if n == 0:
        raise ValidationError("the size response to b_prev is defined for states n != 0")
    p = foc_partials(partition, n)
    params = partition.params
    b0 = partition.state(0).right
    threshold = 1.0 / ((params.gamma - 1.0) * b0 * (1.0 - b0))
    return SizeResponse(
        index=p.index,
        dsn_dbprev_analytic=-p.f_b / p.f_s,
        f_b=p.f_b,
        f_b_positive=p.f_b > 0,
        taurange_holds=params.tau > threshold,
    )


def _agree(analytic: float, fd: float) -> bool:
    return abs(analytic - fd) <= 1e-4 * abs(fd) + 1e-7


def state0_shock(params: ModelParams, delta_b0: float) -> ShockTable:
    """Propagation of a shift in the central border through the outward recursion."""
    if abs(delta_b0) > 10.0 * params.fd_step:
        raise ValidationError(f"|delta_b0|={abs(delta_b0)} exceeds 10*fd_step={10.0 * params.fd_step}")
    b0 = solve_state0(params) / 2.0
    base = solve_partition_given_b0(params, b0)
    if delta_b0:
        up = solve_partition_given_b0(params, b0 + delta_b0)
        down = solve_partition_given_b0(params, b0 - delta_b0)
        if not up.n_interior == down.n_interior == base.n_interior:
            raise StateCountChanged(
                f"central shift of {delta_b0} changes the state count "
                f"({down.n_interior}, {base.n_interior}, {up.n_interior})"
            )

    rows = []
    chain = 1.0
    premise = True
    prefix = 0
    for state in base.interior_states:
        n = state.index
        local = local_size_response(base, n)
        ds_analytic = chain * local.dsn_dbprev_analytic
        chain *= 1.0 + local.dsn_dbprev_analytic
        if delta_b0:
            db_fd = (up.state(n).right - down.state(n).right) / (2.0 * delta_b0)
            ds_fd = (up.state(n).size - down.state(n).size) / (2.0 * delta_b0)
        else:
            db_fd = ds_fd = 0.0
        premise = premise and local.f_b_positive
        prefix += premise
        agrees = not delta_b0 or (_agree(chain, db_fd) and _agree(ds_analytic, ds_fd))
        rows.append(
            ShockRow(n, db_fd, chain, ds_fd, ds_analytic, local.dsn_dbprev_analytic,
                     local.f_b, local.f_b_positive, premise, agrees)
        )

    head = [r.ds_db0_analytic for r in rows[:prefix]]
    increasing = all(a < b for a, b in zip(head, head[1:]))
    logger.info("state-0 shock: %d rows, F_b > 0 on the first %d", len(rows), prefix)
    return ShockTable(b0, delta_b0, tuple(rows), prefix, increasing)


def national_opinions(partition: Partition) -> OpinionStats:
    """National opinion G_n is held by the state's median locale."""
    opinions = {s.index: 0.5 * (s.left + s.right) for s in partition.states}
    total = opinions[0]
    for s in partition.right_hemisphere:
        total += opinions[s.index] + opinions[-s.index]
    right = [opinions[s.index] for s in partition.right_hemisphere]
    variance = sum(g * g for g in right) / len(right) if right else 0.0
    return OpinionStats(opinions, total / len(opinions), variance, len(right))


def opinion_variance_sensitivity(params: ModelParams, shock: Shock) -> VarianceSensitivity:
    before = solve_partition(params)
    after = solve_partition(shock.apply(params))
    if before.n_interior != after.n_interior:
        raise StateCountChanged(
            f"{shock.parameter} shock of {shock.delta} changes the state count "
            f"{before.n_interior} -> {after.n_interior}"
        )
    var0 = national_opinions(before).variance
    var1 = national_opinions(after).variance

    partials: dict[int, float] = {}
    ok = True
    for state in before.interior_states:
        p = foc_partials(before, state.index)
        d_tau, d_h = -p.f_tau / p.f_s, -p.f_h / p.f_s
        ok = ok and d_tau > 0 and d_h < 0
        partials[state.index] = d_tau if shock.parameter == "tau" else d_h
    return VarianceSensitivity(shock.parameter, shock.delta, var0, var1, var1 - var0, partials, ok)


def separatism(t: float, state: StateRecord) -> float:
    """Share of a locale's ideal state lying outside its actual state."""
    if not state.contains(t):
        raise ValidationError(f"locale {t} is outside state {state.index}")
    if state.index < 0:
        return (t - state.left) / state.size
    return (state.right - t) / state.size


def separatism_profile(partition: Partition, samples_per_state: int = 16) -> list[SeparatismPoint]:
    if samples_per_state < 2:
        raise ValidationError(f"samples_per_state must be >= 2, got {samples_per_state}")
    params = partition.params
    points: list[SeparatismPoint] = []
    for state in partition.interior_states:
        lo, hi = state.left, state.right
        size = state.size
        r_g = state.remoteness ** (params.gamma - 1.0)
        ds_dtau = partition.h_eff / (params.tau**2 * r_g)
        ds_dr = (params.gamma - 1.0) * partition.h_eff / (params.tau * r_g * state.remoteness)
        mirror = partition.state(-state.index)
        for k in range(samples_per_state):
            t = lo + size * k / samples_per_state
            sigma = separatism(t, state)
            weight = (t - lo) / size**2
            right_point = SeparatismPoint(
                state.index, t, sigma, 1.0 - sigma, t - size, t, weight * ds_dtau, weight * ds_dr
            )
            points.append(right_point)
            points.append(
                SeparatismPoint(mirror.index, -t, separatism(-t, mirror), 1.0 - sigma, -t, size - t,
                                right_point.dsigma_dtau, right_point.dsigma_dR)
            )
    points.sort(key=lambda p: p.t)
    return points


def _count_cell(cell: tuple[ModelParams, float, float]) -> dict:
    params, tau, h = cell
    params = params.with_changes(tau=tau, h=h)
    row = {"tau": tau, "h": h, "feasible": False, "n_interior": None, "b0": None, "truncated": None}
    try:
        partition = solve_partition(params)
    except (InfeasibleCentralState, DegenerateEquality) as exc:
        logger.debug("sweep cell tau=%g h=%g skipped: %s", tau, h, exc)
        return row
    row.update(
        feasible=True,
        n_interior=partition.n_interior,
        b0=partition.state(0).right,
        truncated=partition.truncated_at_accumulation,
    )
    return row


def state_count_sweep(
    params: ModelParams, taus: Sequence[float], hs: Sequence[float], threads: int | None = None
) -> pd.DataFrame:
    """Interior state count over a (tau, h) grid.

    Columns: tau, h, feasible, n_interior, b0, truncated.
    """
    cells = [(params, float(tau), float(h)) for tau in taus for h in hs]
    rows = run_parallel(_count_cell, cells, threads)
    frame = pd.DataFrame(rows, columns=["tau", "h", "feasible", "n_interior", "b0", "truncated"])
    return frame.astype({"n_interior": "Int64", "truncated": "boolean"})
