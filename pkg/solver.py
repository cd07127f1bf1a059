"""
Equilibrium partition solver.

Borders are built outward from the world's geometric center. State 0 comes
from the central first-order condition; each further state solves the border
condition given its proximal border, until the marginal first inch no longer
pays (a polar semi-state) or the states shrink below eps_size next to the
accumulation point.
"""

from __future__ import annotations

import bisect as _bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, optimize

from core import (
    DegenerateEquality,
    GeolineError,
    InfeasibleCentralState,
    ModelParams,
    StateRecord,
    UnknownState,
    ValidationError,
    foc0_residual,
    foc_residual,
    log_remoteness,
    remoteness,
)

logger = logging.getLogger(__name__)

Side = Literal["auto", "lower", "upper"]


@dataclass(frozen=True)
class PolarTermination:
    """No admissible interior state starts at b_prev."""

    b_prev: float
    reason: Literal["gate", "accumulation"]


@dataclass(frozen=True)
class Partition:
    params: ModelParams
    states: tuple[StateRecord, ...]
    n_interior: int
    truncated_at_accumulation: bool
    h_eff: float
    _by_index: dict = field(init=False, repr=False, compare=False)
    _rights: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_index", {s.index: s for s in self.states})
        object.__setattr__(self, "_rights", tuple(s.right for s in self.states))

    @classmethod
    def from_right_borders(
        cls,
        params: ModelParams,
        borders: Sequence[float],
        h_eff: float | None = None,
        truncated_at_accumulation: bool = False,
    ) -> "Partition":
        """Mirror-symmetric partition from right borders b_0 < b_1 < ... < b_N.

        [b_N, 1] becomes the polar semi-state when b_N < 1.
        """
        borders = [float(b) for b in borders]
        if not borders:
            raise ValidationError("at least the central border b_0 is required")
        if not 0 < borders[0] <= 1.0:
            raise ValidationError(f"b_0={borders[0]} must lie in (0, 1]")
        for prev, nxt in zip(borders, borders[1:]):
            if not prev < nxt <= 1.0:
                raise ValidationError(f"borders must increase strictly inside the world: {prev} -> {nxt}")

        right: list[StateRecord] = []
        b0 = borders[0]
        center = StateRecord(0, -b0, b0, b0 - (-b0), remoteness(-b0, b0, params))
        for n, (lo, hi) in enumerate(zip(borders, borders[1:]), start=1):
            right.append(StateRecord(n, lo, hi, hi - lo, remoteness(lo, hi, params)))
        n_interior = len(right)
        last = borders[-1]
        if last < 1.0:
            right.append(StateRecord(n_interior + 1, last, 1.0, 1.0 - last, remoteness(last, 1.0, params), True))

        left = [
            StateRecord(-s.index, -s.right, -s.left, s.size, s.remoteness, s.is_polar)
            for s in reversed(right)
        ]
        return cls(
            params=params,
            states=tuple(left + [center] + right),
            n_interior=n_interior,
            truncated_at_accumulation=truncated_at_accumulation,
            h_eff=params.h if h_eff is None else h_eff,
        )

    def state(self, index: int) -> StateRecord:
        try:
            return self._by_index[index]
        except KeyError:
            raise UnknownState(f"partition has no state {index}") from None

    def locate(self, t: float, side: Side = "auto") -> StateRecord:
        """State owning locale t.

        "upper" picks the state with left <= t < right, "lower" the one with
        left < t <= right; "auto" uses upper for t >= 0 and lower for t < 0.
        """
        if not -1.0 <= t <= 1.0:
            raise ValidationError(f"t={t!r} lies outside the world [-1, 1]")
        if side == "auto":
            side = "upper" if t >= 0 else "lower"
        if side == "upper":
            i = _bisect.bisect_right(self._rights, t)
        else:
            i = _bisect.bisect_left(self._rights, t)
        return self.states[min(i, len(self.states) - 1)]

    @property
    def borders(self) -> tuple[float, ...]:
        return (self.states[0].left,) + self._rights

    @property
    def right_borders(self) -> tuple[float, ...]:
        """b_0, b_1, ..., up to the polar semi-state's proximal border."""
        return tuple(s.right for s in self.states if s.index >= 0 and not s.is_polar)

    @property
    def right_hemisphere(self) -> tuple[StateRecord, ...]:
        return tuple(s for s in self.states if s.index >= 1)

    @property
    def interior_states(self) -> tuple[StateRecord, ...]:
        return tuple(s for s in self.states if s.index >= 1 and not s.is_polar)


@dataclass
class EquilibriumAudit:
    max_foc_residual: float
    overlord_unimodality_ok: dict[int, bool]
    locale_remoteness_minimal_ok: dict[int, bool]
    grid_step: float
    locales_checked: int = 0

    @property
    def passed(self) -> bool:
        return (
            all(self.overlord_unimodality_ok.values())
            and all(self.locale_remoteness_minimal_ok.values())
            and self.max_foc_residual < 1e-9
        )

    @property
    def failing_states(self) -> set[int]:
        bad = {i for i, ok in self.overlord_unimodality_ok.items() if not ok}
        return bad | {i for i, ok in self.locale_remoteness_minimal_ok.items() if not ok}


def _check_h_eff(h_eff: float) -> None:
    if not h_eff > 0 or not math.isfinite(h_eff):
        raise ValidationError(f"h_eff must be a positive finite number, got {h_eff}")


def _bisect_log_distance(f, u_lo: float, u_hi: float, params: ModelParams) -> float:
    f_lo, f_hi = f(u_lo), f(u_hi)
    if not (f_lo < 0 < f_hi):
        raise GeolineError(f"invalid bracket: f({u_lo})={f_lo}, f({u_hi})={f_hi}")
    return optimize.bisect(f, u_lo, u_hi, xtol=params.eps_border, maxiter=500)


def solve_state0(params: ModelParams, h_eff: float | None = None) -> float:
    """Size S_0 of the central state."""
    h_eff = params.h if h_eff is None else h_eff
    _check_h_eff(h_eff)
    bound = params.h_max
    if math.isclose(h_eff, bound, rel_tol=1e-12):
        raise DegenerateEquality(f"h_eff={h_eff} equals tau*exp(tau*(gamma-1))={bound}; state 0 collapses")
    if h_eff > bound:
        raise InfeasibleCentralState(
            f"infeasible central state: h_eff={h_eff} exceeds tau*exp(tau*(gamma-1))={bound}"
        )

    # x = 1 - S; log of the marginal benefit is increasing in u = ln x
    k, log_tau, log_h = params.k, math.log(params.tau), math.log(h_eff)

    def f(u: float) -> float:
        return log_tau + u + 0.25 * k * (1.0 + math.exp(u)) ** 2 - log_h

    u_lo = min(0.0, log_h - log_tau - k) - 1.0
    x = math.exp(_bisect_log_distance(f, u_lo, 0.0, params))
    return 1.0 - x


def _next_border(b_prev: float, params: ModelParams, h_eff: float) -> float | PolarTermination:
    if not 0 <= b_prev < 1:
        raise ValidationError(f"b_prev={b_prev} must lie in [0, 1)")
    _check_h_eff(h_eff)
    k, log_tau, log_h = params.k, math.log(params.tau), math.log(h_eff)
    anchor = 0.5 * k * (1.0 + b_prev) ** 2

    def f(u: float) -> float:
        return log_tau + u + anchor + 0.5 * k * math.exp(2.0 * u) - log_h

    u_hi = math.log1p(-b_prev)
    if f(u_hi) <= 0:
        return PolarTermination(b_prev, "gate")
    u_lo = min(u_hi, log_h - log_tau - anchor - 0.5 * k) - 1.0
    b_next = 1.0 - math.exp(_bisect_log_distance(f, u_lo, u_hi, params))
    if b_next - b_prev < params.eps_size:
        return PolarTermination(b_prev, "accumulation")
    return b_next


def solve_next_state(b_prev: float, params: ModelParams, h_eff: float | None = None) -> float | PolarTermination:
    """Size of the state whose proximal border is b_prev, or PolarTermination."""
    nxt = _next_border(b_prev, params, params.h if h_eff is None else h_eff)
    if isinstance(nxt, PolarTermination):
        return nxt
    return nxt - b_prev


def _extend(params: ModelParams, borders: list[float], h_eff: float) -> Partition:
    truncated = False
    while True:
        nxt = _next_border(borders[-1], params, h_eff)
        if isinstance(nxt, PolarTermination):
            truncated = nxt.reason == "accumulation"
            break
        logger.debug("state %d: [%.12g, %.12g]", len(borders), borders[-1], nxt)
        borders.append(nxt)
    partition = Partition.from_right_borders(params, borders, h_eff, truncated)
    logger.info(
        "partition solved: %d interior states per hemisphere%s",
        partition.n_interior,
        " (truncated at accumulation)" if truncated else "",
    )
    return partition


def solve_partition(params: ModelParams, h_eff: float | None = None) -> Partition:
    h_eff = params.h if h_eff is None else h_eff
    s0 = solve_state0(params, h_eff)
    return _extend(params, [s0 / 2.0], h_eff)


def solve_partition_given_b0(params: ModelParams, b0: float) -> Partition:
    """Partition with state 0 imposed as (-b0, b0)."""
    if not 0 < b0 < 1:
        raise ValidationError(f"b0={b0} must lie in (0, 1)")
    return _extend(params, [float(b0)], params.h)


def solve_partition_given_prefix(
    params: ModelParams, borders: Sequence[float], h_eff: float | None = None
) -> Partition:
    """Impose right borders b_0 < ... < b_k, then continue the recursion."""
    prefix = [float(b) for b in borders]
    if not prefix or not 0 < prefix[0] < 1:
        raise ValidationError("prefix must start with b_0 in (0, 1)")
    for prev, nxt in zip(prefix, prefix[1:]):
        if not prev < nxt < 1:
            raise ValidationError(f"prefix borders must increase strictly below 1: {prev} -> {nxt}")
    return _extend(params, prefix, params.h if h_eff is None else h_eff)


def suffrage_theta(params: ModelParams) -> float:
    """Relative weight of labor's marginal utility in the border setter's FOC."""
    return params.psi * (params.alpha / (1.0 - params.alpha)) ** (2.0 * params.gamma)


def solve_partition_se(params: ModelParams, phi: float) -> Partition:
    """Partition drawn under the weighted objective U + phi V."""
    if phi < 0 or not math.isfinite(phi):
        raise ValidationError(f"phi must be a finite number >= 0, got {phi}")
    h_eff = params.h / (1.0 + phi * suffrage_theta(params))
    return solve_partition(params, h_eff)


def _unimodal_argmax(grid: np.ndarray, values: np.ndarray) -> tuple[bool, float]:
    i = int(np.argmax(values))
    steps = np.diff(values)
    tol = 1e-13 * max(1.0, float(np.max(np.abs(values))))
    rising = bool(np.all(steps[:i] >= -tol))
    falling = bool(np.all(steps[i:] <= tol))
    return rising and falling, float(grid[i])


def _overlord_grid(start: float, border: float, grid_step: float) -> np.ndarray:
    stop = min(border + 10.0 * grid_step, 1.0)
    count = int(math.floor((stop - start) / grid_step))
    grid = start + grid_step * np.arange(1, count + 1)
    grid = np.append(grid[grid <= stop], [border, stop])
    return np.unique(grid)


def _central_ok(partition: Partition, grid_step: float) -> bool:
    """Integrate the central first-order marginal from 0 and check it peaks within a step of b0.

    The marginal is the one the solver zeroes, so this restates its condition on a grid
    rather than checking the closed-form utility independently.
    """
    params, b0 = partition.params, partition.state(0).right
    stop = min(b0 + 10.0 * grid_step, 1.0)
    grid = np.unique(np.append(grid_step * np.arange(0, int(stop / grid_step) + 1), [b0, stop]))
    grid = grid[grid <= stop]
    s = 2.0 * grid
    marginal = 2.0 * (params.tau * np.exp(params.k * (1.0 - s / 2.0) ** 2) * (1.0 - s) - partition.h_eff)
    utility = integrate.cumulative_trapezoid(marginal, grid, initial=0.0)
    unimodal, argmax = _unimodal_argmax(grid, utility)
    return unimodal and abs(argmax - b0) <= grid_step


def _state_ok(partition: Partition, state: StateRecord, grid_step: float) -> bool:
    params = partition.params
    lo, hi = state.right_form
    grid = _overlord_grid(lo, hi, grid_step)
    log_r = log_remoteness(lo, grid, params.tau)
    utility = np.exp((params.gamma - 1.0) * log_r) / (1.0 - params.gamma) - partition.h_eff * (grid - lo)
    unimodal, argmax = _unimodal_argmax(grid, utility)
    return unimodal and abs(argmax - hi) <= grid_step


def _locales_ok(partition: Partition, state: StateRecord, samples: int) -> tuple[bool, int]:
    tau = partition.params.tau
    lo, hi = state.right_form
    if state.index == 0:
        lo = 0.0
    inner = lo + (hi - lo) * (np.arange(samples) + 0.5) / samples
    ts = np.concatenate(([lo], inner, [hi]))
    own = math.log(state.remoteness) * (1.0 - 1e-12) - 1e-15
    secede = log_remoteness(ts, hi, tau)
    same_size = log_remoteness(ts, np.minimum(ts + state.size, 1.0), tau)
    ok = bool(np.all(own <= secede) and np.all(own <= same_size))
    return ok, len(ts)


def audit_equilibrium(partition: Partition, grid_step: float = 1e-3, samples_per_state: int = 64) -> EquilibriumAudit:
    """Deviation battery: overlord unimodality, locale remoteness, FOC residuals."""
    if not 0 < grid_step < 1:
        raise ValidationError(f"grid_step must lie in (0, 1), got {grid_step}")
    params = partition.params
    unimodal: dict[int, bool] = {}
    minimal: dict[int, bool] = {}
    worst = 0.0
    checked = 0
    for state in partition.states:
        if state.index < 0:
            continue
        ok, n = _locales_ok(partition, state, samples_per_state)
        minimal[state.index] = ok
        checked += n
        if state.is_polar:
            continue
        if state.index == 0:
            unimodal[0] = _central_ok(partition, grid_step)
            worst = max(worst, abs(foc0_residual(state.size, partition.h_eff, params)))
        else:
            unimodal[state.index] = _state_ok(partition, state, grid_step)
            worst = max(worst, abs(foc_residual(state.left, state.size, partition.h_eff, params)))
    for index in list(unimodal):
        if index:
            unimodal[-index] = unimodal[index]
    for index in list(minimal):
        if index:
            minimal[-index] = minimal[index]
    audit = EquilibriumAudit(worst, unimodal, minimal, grid_step, checked)
    if not audit.passed:
        logger.warning("equilibrium audit failed for states %s", sorted(audit.failing_states))
    return audit
