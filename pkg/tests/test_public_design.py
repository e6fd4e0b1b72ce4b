import numpy as np
import pytest

from infodesign import (
    DesignError,
    PublicPolicy,
    bne_indirect,
    canonical_policy,
    evaluate_public,
    lift_public_to_private,
    obedience_residuals,
    optimize_diagonal,
    optimize_public,
    public_residuals,
)

PRIOR_COST = 113 + 1 / 3


def test_canonical_policies():
    np.testing.assert_array_equal(canonical_policy("full", 3).weights, np.eye(3))
    np.testing.assert_array_equal(canonical_policy("no-info", 2, m=3).weights, [[1, 0, 0], [1, 0, 0]])
    with pytest.raises(DesignError):
        canonical_policy("full", 2, m=3)
    with pytest.raises(DesignError):
        canonical_policy("partial", 2)


def test_policy_rows_must_be_stochastic():
    with pytest.raises(DesignError):
        PublicPolicy([[0.87, 0.0], [0.13, 1.0]])
    assert PublicPolicy([[0.87, 0.13], [0.0, 1.0]]).m == 2


def test_no_information_cost_is_prior_cost(affine):
    for nu in (0.0, 0.3, 1.0):
        sol = evaluate_public(affine, canonical_policy("no", 2), nu, m=2)
        assert sol.cost == pytest.approx(PRIOR_COST, abs=1e-6)
        assert sol.feasible


def test_equilibrium_flows_have_zero_residual(wheat_quad):
    W = np.array([[0.7, 0.3], [0.2, 0.8]])
    eq = bne_indirect(wheat_quad, W, 0.6)
    ob, na = public_residuals(wheat_quad, W, eq.atoms, eq.y)
    assert max(ob.max(), na.max()) <= 1e-7


def test_off_equilibrium_flows_have_positive_residual(affine):
    ob, _ = public_residuals(affine, np.eye(2), np.array([[0.0, 5.0], [0.0, 5.0]]), np.zeros(2))
    # message 1 is sent only in w1 (weight 0.6): 5 travellers, 35 against 5
    assert ob[0, 1, 0] == pytest.approx(0.6 * 5 * 30)


def test_single_message_is_no_information(affine):
    sol = optimize_public(affine, 0.5, m=1, starts=3)
    assert sol.cost == pytest.approx(PRIOR_COST, abs=1e-6)


def test_zero_participation(affine):
    sol = optimize_public(affine, 0.0, starts=3)
    assert sol.cost == pytest.approx(PRIOR_COST, abs=1e-6)


def test_public_design_ordering(affine):
    nu = 0.25
    pub = optimize_public(affine, nu, m=2, starts=25, seed=0)
    assert pub.feasible
    full = evaluate_public(affine, np.eye(2), nu).cost
    assert pub.cost <= min(full, PRIOR_COST) + 1e-9
    priv = optimize_diagonal(affine, nu, starts=25, seed=0)
    assert priv.cost <= pub.cost + 1e-6
    # a public equilibrium is an obedient private policy with the same cost
    pol, y = lift_public_to_private(affine, pub)
    ob, na = obedience_residuals(affine, pol, y)
    assert max(ob.max(), na.max()) <= 1e-6 * (1 + pub.cost)


def test_public_residual_dimension_check(affine):
    with pytest.raises(DesignError):
        public_residuals(affine, np.eye(2), np.zeros((3, 2)), np.zeros(2))
