import math

import numpy as np
import pytest

from core import (
    ModelParams,
    StateRecord,
    ValidationError,
    consumption_bundle,
    foc0_residual,
    foc_residual,
    locale_welfare,
    normalization,
    remoteness,
    trade_cost,
)


def test_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(tau=0)
    with pytest.raises(ValidationError):
        ModelParams(gamma=1.0)
    with pytest.raises(ValidationError):
        ModelParams(alpha=1.0)
    with pytest.raises(ValidationError):
        ModelParams(eps_border=1e-5, eps_size=1e-6)
    assert ModelParams().h_max == pytest.approx(math.e)


def test_remoteness_examples(params):
    assert remoteness(-1.0, 1.0, params) == 1.0
    assert remoteness(-0.4279, 0.4279, params) == pytest.approx(1.3872, abs=1e-4)
    assert remoteness(0.4279, 0.9280, params) == pytest.approx(2.7789, abs=1e-4)


@pytest.mark.parametrize("left, right", [(0.5, 0.2), (-1.2, 0.0), (0.0, 1.5), (0.3, 0.3)])
def test_remoteness_rejects_bad_borders(params, left, right):
    with pytest.raises(ValidationError):
        remoteness(left, right, params)


def test_remoteness_monotonicity():
    rng = np.random.default_rng(11)
    eps = 1e-6
    for _ in range(100):
        tau = rng.uniform(0.1, 3.0)
        p = ModelParams(tau=tau)
        left = rng.uniform(0.0, 0.6)
        size = rng.uniform(0.05, 0.3)
        base = remoteness(left, left + size, p)
        assert remoteness(left, left + size + eps, p) < base
        assert remoteness(left + eps, left + eps + size, p) > base
        assert remoteness(left, left + size, ModelParams(tau=tau + eps)) > base


def test_foc_residual_limits(params):
    assert foc_residual(0.4, 0.6, 0.2, params) == pytest.approx(-0.2)
    r0 = math.exp(0.5 * (1.4**2 + 0.6**2))
    assert foc_residual(0.4, 0.0, 0.2, params) == pytest.approx(r0 * 0.6 - 0.2)


def test_foc_residual_decreasing_in_size(params):
    for b_prev in (0.0, 0.43, 0.9):
        sizes = np.linspace(1e-6, 1 - b_prev - 1e-6, 200)
        values = [foc_residual(b_prev, s, 0.2, params) for s in sizes]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_foc0_residual_at_bounds(params):
    assert foc0_residual(0.0, params.h_max, params) == pytest.approx(0.0, abs=1e-12)
    assert foc0_residual(1.0, 0.2, params) == pytest.approx(-0.2)


def test_normalization_identities():
    for alpha in (0.25, 0.5, 0.8):
        c = normalization(ModelParams(alpha=alpha))
        assert c.zeta == c.kappa / 2
        assert c.p * c.y == pytest.approx(c.kappa)
        assert c.land_income + c.labor_income == pytest.approx(c.kappa)
    c = normalization(ModelParams(alpha=0.25))
    assert (c.p, c.y) == (0.125, 8.0)


def test_consumption_bundle_unit_remoteness(params):
    state = StateRecord(0, -0.5, 0.5, 1.0, 1.0)
    bundle = consumption_bundle(state, params, phi=1.0)
    assert bundle.c_lord == 1.0
    assert bundle.u_lord == pytest.approx(1 / (1 - params.gamma) - params.h * 1.0)
    assert bundle.c_labor == bundle.c_lord
    assert bundle.w_weighted == pytest.approx(bundle.u_lord + bundle.v_labor)


def test_consumption_bundle_canonical_center(partition, params):
    center = partition.state(0)
    bundle = consumption_bundle(center, params)
    assert bundle.c_lord == pytest.approx(0.7209, abs=1e-4)
    assert bundle.u_lord == pytest.approx(-center.remoteness - params.h * center.size)
    assert bundle.u_lord == pytest.approx(-1.3872 - 0.17116, abs=1e-3)


def test_lord_consumption_times_remoteness(partition, params):
    for state in partition.states:
        assert consumption_bundle(state, params).c_lord * state.remoteness == pytest.approx(1.0, rel=1e-14)


def test_trade_cost(partition, params):
    b0 = partition.state(0).right
    assert trade_cost(0.1, -0.2, partition, params) == 1.0
    assert trade_cost(0.6, 0.3, partition, params) == pytest.approx(math.exp(b0 - 0.3))
    assert trade_cost(0.6, b0, partition, params) == 1.0
    assert trade_cost(0.6, b0 - 1e-9, partition, params) == pytest.approx(1.0, abs=1e-8)


def test_trade_cost_is_one_only_at_home(partition, params):
    grid = np.linspace(-1, 1, 41)
    for t in grid:
        for s in grid:
            cost = trade_cost(t, s, partition, params)
            same = partition.locate(t) == partition.locate(s)
            assert cost >= 1.0
            if same:
                assert cost == 1.0


def test_locale_welfare_uses_owner_state(partition, params):
    state = partition.state(1)
    bundle = locale_welfare(partition, 0.5 * (state.left + state.right), params)
    assert bundle.c_lord == pytest.approx(1 / state.remoteness)
    with pytest.raises(ValidationError):
        locale_welfare(partition, 1.5, params)
