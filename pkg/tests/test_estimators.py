import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from infodesign.estimators import (
    BayesNashFlow,
    DiagonalSignalDesigner,
    FirstBest,
    PrivateSignalDesigner,
    PublicSignalDesigner,
    check_scenario,
)


def test_params_round_trip():
    est = PrivateSignalDesigner(nu=0.5, n_atoms=3, starts=7, seed=2)
    params = est.get_params()
    assert params == {"nu": 0.5, "n_atoms": 3, "starts": 7, "seed": 2, "threads": None, "certify": False}
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    twin.set_params(nu=0.25)
    assert twin.nu == 0.25 and est.nu == 0.5


def test_unfitted_estimator():
    est = DiagonalSignalDesigner()
    with pytest.raises(NotFittedError):
        check_is_fitted(est)
    with pytest.raises(NotFittedError):
        est.score()


@pytest.mark.parametrize(
    "est",
    [DiagonalSignalDesigner(nu=1.5), DiagonalSignalDesigner(starts=0), PrivateSignalDesigner(n_atoms=0),
     PublicSignalDesigner(seed=-1), PublicSignalDesigner(nu="half")],
)
def test_invalid_parameters(est, affine):
    with pytest.raises((ValueError, TypeError)):
        est.fit(affine)


def test_diagonal_fit(affine):
    est = DiagonalSignalDesigner(nu=1.0, starts=20, certify=True).fit("two_link_affine")
    check_is_fitted(est)
    assert est.atoms_.shape == (2, 2)
    np.testing.assert_array_equal(est.weights_, np.eye(2))
    assert est.feasible_
    assert est.cost_ == pytest.approx(109.648162, abs=1e-5)
    assert est.gap_ <= 1e-3 * est.cost_
    assert est.score() == -est.cost_
    assert est.scenario_digest_ == affine.digest()


def test_private_and_public_fit(affine):
    priv = PrivateSignalDesigner(nu=0.25, n_atoms=3, starts=10).fit(affine)
    pub = PublicSignalDesigner(nu=0.25, n_messages=2, starts=10).fit(affine)
    assert priv.atoms_.shape == (3, 2)
    assert pub.weights_.shape == (2, 2)
    assert priv.cost_ <= pub.cost_ + 1e-6


def test_equilibrium_and_first_best(affine):
    eq = BayesNashFlow(policy="full-info", nu=1.0).fit(affine)
    np.testing.assert_allclose(eq.atoms_, [[5, 0], [5 / 3, 10 / 3]], atol=1e-7)
    assert eq.converged_
    fb = FirstBest().fit(affine)
    assert fb.cost_ <= eq.cost_
    nb = BayesNashFlow(policy=np.array([[1.0], [1.0]]), nu=0.5).fit(affine)
    assert nb.cost_ == pytest.approx(113 + 1 / 3, abs=1e-6)


def test_check_scenario(tmp_path, affine):
    assert check_scenario(affine) is affine
    assert check_scenario("two_link_affine").digest() == affine.digest()
    with pytest.raises(TypeError):
        check_scenario(3)
