import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from quditunruh import QuditDetector, build_su2_model, second_order_correction


def test_params_roundtrip_and_clone():
    est = QuditDetector(kind="hw", d=3, switching=20.0, coupling=0.05)
    params = est.get_params()
    assert params["kind"] == "hw" and params["coupling"] == 0.05
    twin = clone(est)
    assert twin.get_params() == params
    assert not hasattr(twin, "table_")


def test_transform_populations():
    est = QuditDetector(switching=20.0, coupling=0.05).fit()
    X = np.array([[0, 0, 1], [0.2, 0.3, 0.5], [1, 0, 0]])
    Y = est.transform(X)
    assert Y.shape == X.shape
    assert np.allclose(Y.sum(axis=1), 1.0, atol=1e-12)
    assert Y[0, 1] > 0
    assert Y[0, 0] == 0.0


def test_matches_engine():
    est = QuditDetector(switching=20.0, coupling=0.05).fit()
    rho = np.diag([0.2, 0.3, 0.5])
    ref = second_order_correction(build_su2_model(1, 1.0), rho, est.params_, 0.05).correction
    assert np.array_equal(est.correction(rho).correction, ref)
    assert np.allclose(est.evolve(rho).entries, rho + ref)


def test_errors():
    with pytest.raises(NotFittedError):
        QuditDetector().transform([[1, 0, 0]])
    with pytest.raises(ValueError):
        QuditDetector(kind="qubit").fit()
    with pytest.raises(ValueError):
        QuditDetector(regulator="hard").fit()
    est = QuditDetector(switching=20.0).fit()
    with pytest.raises(ValueError):
        est.transform([[0.5, 0.5]])
