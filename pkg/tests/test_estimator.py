import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tripledeck.estimator import TripleDeckSolver
from tripledeck.grid import RoughnessProfile
from tripledeck.linear import solve_linear

SMALL = dict(L=20.0, n_x=128, M=10.0, n_y=257)


@pytest.fixture(scope="module")
def fitted():
    return TripleDeckSolver(**SMALL).fit()


def _rows(est, amps):
    unit = RoughnessProfile.gaussian(est.grid_)
    return np.stack([a * unit.samples for a in amps])


def test_params_round_trip():
    est = TripleDeckSolver(**SMALL, tol=1e-9)
    params = est.get_params()
    assert params["tol"] == 1e-9 and params["n_x"] == 128
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(max_iter=7)
    assert est.max_iter == 7


def test_transform_before_fit():
    with pytest.raises(NotFittedError):
        TripleDeckSolver(**SMALL).transform(np.zeros((1, 128)))


def test_linear_transform_matches_direct_solve(fitted):
    est = clone(fitted).set_params(nonlinear=False).fit()
    X = _rows(est, [1e-4, -2e-4])
    out = est.transform(X)
    assert out.shape == (2, 128)
    direct = solve_linear(RoughnessProfile(X[0], est.grid_), est.grid_, est.table_, est.kernel_)
    np.testing.assert_array_equal(out[0], direct.a0)
    np.testing.assert_allclose(out[1], -2 * out[0], rtol=1e-12, atol=1e-18)


def test_nonlinear_transform(fitted):
    X = _rows(fitted, [1e-4, 0.0])
    out = fitted.fit_transform(X)
    assert np.all(out[1] == 0.0)
    assert np.max(np.abs(out[0])) > 0
    assert all(s.converged for s in fitted.states_)


def test_input_validation(fitted):
    with pytest.raises(ValueError):
        fitted.transform(np.zeros(128))
    with pytest.raises(ValueError):
        fitted.transform(np.zeros((1, 64)))
    with pytest.raises(ValueError):
        fitted.transform(np.full((1, 128), np.nan))
    with pytest.raises(ValueError):
        fitted.fit(np.zeros((2, 5)))
