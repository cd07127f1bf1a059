"""Gravity trade between states and fixed areas, and shock decompositions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import pandas as pd

from core import ModelParams, SameState, StateCountChanged, ValidationError, normalization
from solver import Partition, solve_partition

logger = logging.getLogger(__name__)

ShockParameter = Literal["tau", "h"]


@dataclass(frozen=True)
class Shock:
    parameter: ShockParameter
    delta: float

    def __post_init__(self):
        if self.parameter not in ("tau", "h"):
            raise ValidationError(f"shock parameter must be 'tau' or 'h', got {self.parameter!r}")
        if not math.isfinite(self.delta):
            raise ValidationError(f"shock delta must be finite, got {self.delta}")

    def apply(self, params: ModelParams) -> ModelParams:
        return params.with_changes(**{self.parameter: getattr(params, self.parameter) + self.delta})


@dataclass(frozen=True)
class TradeFlow:
    exporter: int
    importer: int
    distance: float
    x_newton: float | None = None
    x_exact: float | None = None


@dataclass(frozen=True)
class FixedArea:
    lo: float
    hi: float

    def __post_init__(self):
        if not -1.0 <= self.lo < self.hi <= 1.0:
            raise ValidationError(f"fixed area [{self.lo}, {self.hi}] must satisfy -1 <= lo < hi <= 1")

    @property
    def size(self) -> float:
        return self.hi - self.lo

    def overlaps(self, other: "FixedArea") -> bool:
        return self.lo < other.hi and other.lo < self.hi


@dataclass(frozen=True)
class GravityDecomposition:
    parameter: ShockParameter
    delta: float
    exporter: int
    importer: int
    size_effect: float
    direct_effect: float
    location_effect: float
    total: float


def shortest_distance(partition: Partition, m: int, n: int) -> float:
    """Gap between the facing borders of states m and n."""
    a, b = partition.state(m), partition.state(n)
    if m == n:
        return 0.0
    if a.right <= b.left:
        return b.left - a.right
    return a.left - b.right


def _pair(partition: Partition, m: int, n: int):
    if m == n:
        raise SameState(f"exporter and importer are both state {m}")
    return partition.state(m), partition.state(n), shortest_distance(partition, m, n)


def gravity_newton(partition: Partition, m: int, n: int) -> TradeFlow:
    sm, sn, d = _pair(partition, m, n)
    zeta = normalization(partition.params).zeta
    x = zeta * sm.size * sn.size * math.exp(-partition.params.tau * d)
    return TradeFlow(m, n, d, x_newton=x)


def gravity_exact(partition: Partition, m: int, n: int) -> TradeFlow:
    """Flow before the small-state approximation of the importer integral."""
    sm, sn, d = _pair(partition, m, n)
    tau = partition.params.tau
    kappa = normalization(partition.params).kappa
    x = kappa / (2.0 * tau) * sm.size * math.exp(-tau * d) * -math.expm1(-tau * sn.size)
    return TradeFlow(m, n, d, x_exact=x)


def gravity_fixed_area(partition: Partition, u: FixedArea, v: FixedArea) -> float:
    """Trade between two coordinate-anchored areas.

    The areas are placed in the states holding their inner-facing endpoints.
    """
    if u.overlaps(v):
        raise ValidationError(f"fixed areas [{u.lo}, {u.hi}] and [{v.lo}, {v.hi}] overlap")
    near, far = (u, v) if u.hi <= v.lo else (v, u)
    m = partition.locate(near.hi, side="lower")
    n = partition.locate(far.lo, side="upper")
    d = shortest_distance(partition, m.index, n.index)
    zeta = normalization(partition.params).zeta
    return zeta * u.size * v.size * math.exp(-partition.params.tau * d)


def state_free_gravity(u: FixedArea, v: FixedArea, params: ModelParams) -> float:
    """Limit of fixed-area trade when every locale between them is its own state."""
    if u.overlaps(v):
        raise ValidationError("fixed areas overlap")
    gap = v.lo - u.hi if u.hi <= v.lo else u.lo - v.hi
    return normalization(params).zeta * u.size * v.size * math.exp(-params.tau * gap)


def decompose_change(params: ModelParams, shock: Shock, m: int, n: int) -> GravityDecomposition:
    """Split the log change of Newtonian trade into size, direct and location effects."""
    before = solve_partition(params)
    after = solve_partition(shock.apply(params))
    if before.n_interior != after.n_interior:
        raise StateCountChanged(
            f"{shock.parameter} shock of {shock.delta} changes the state count "
            f"{before.n_interior} -> {after.n_interior}"
        )
    x0, x1 = gravity_newton(before, m, n), gravity_newton(after, m, n)
    size = (
        math.log(after.state(m).size) - math.log(before.state(m).size)
        + math.log(after.state(n).size) - math.log(before.state(n).size)
    )
    tau0, tau1 = before.params.tau, after.params.tau
    d0, d1 = x0.distance, x1.distance
    # midpoint split: tau1*d1 - tau0*d0 == d_bar*dtau + tau_bar*dd
    direct = -0.5 * (d0 + d1) * (tau1 - tau0)
    location = -0.5 * (tau0 + tau1) * (d1 - d0)
    total = math.log(x1.x_newton) - math.log(x0.x_newton)
    logger.debug("decomposition %s: size=%g direct=%g location=%g total=%g", shock, size, direct, location, total)
    return GravityDecomposition(shock.parameter, shock.delta, m, n, size, direct, location, total)


def trade_matrix(partition: Partition, exact: bool = True) -> pd.DataFrame:
    """Bilateral flows for every ordered pair, domestic flows on the diagonal.

    Columns: exporter, importer, distance, flow.
    """
    zeta = normalization(partition.params).zeta
    flow = gravity_exact if exact else gravity_newton
    rows = []
    for a in partition.states:
        for b in partition.states:
            if a.index == b.index:
                rows.append((a.index, b.index, 0.0, zeta * a.size * a.size))
                continue
            f = flow(partition, a.index, b.index)
            rows.append((a.index, b.index, f.distance, f.x_exact if exact else f.x_newton))
    frame = pd.DataFrame(rows, columns=["exporter", "importer", "distance", "flow"])
    return frame.astype({"exporter": np.int64, "importer": np.int64})
