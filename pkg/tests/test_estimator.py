import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from sptucker import (CooTensor, DecompConfig, RankError, ShapeError, SparseTucker,
                      gen_exact_lowrank, hooi_sparse)

from conftest import random_coo


def test_params_roundtrip():
    est = SparseTucker(ranks=(2, 2), max_iter=7, solver="svd")
    params = est.get_params()
    assert params["ranks"] == (2, 2) and params["max_iter"] == 7
    assert clone(est).get_params() == params
    est.set_params(tol=0.0)
    assert est.tol == 0.0


def test_fit_matches_driver(rng):
    x = random_coo(rng, (5, 6, 4), 30)
    est = SparseTucker(ranks=(2, 3, 2), max_iter=4, tol=0, random_state=3).fit(x)
    model, rep = hooi_sparse(x, DecompConfig((2, 3, 2), max_iters=4, tol=0, seed=3))
    assert np.array_equal(est.core_, model.core)
    assert est.n_iter_ == 4 and list(est.fit_history_) == list(rep.fits)
    assert est.model_.ranks == (2, 3, 2)


def test_transform_inverse_and_score(rng):
    x = gen_exact_lowrank((6, 5, 4), (2, 2, 2), seed=0)
    est = SparseTucker(ranks=(2, 2, 2))
    g = est.fit_transform(x)
    assert g.shape == (2, 2, 2)
    np.testing.assert_allclose(est.inverse_transform(g), x, atol=1e-9 * np.linalg.norm(x))
    assert est.score(x) == pytest.approx(1.0, abs=1e-9)
    assert est.score(np.zeros(x.shape)) == 1.0
    np.testing.assert_allclose(est.transform(CooTensor.from_dense(x)), g, atol=1e-12)


def test_dense_and_scipy_inputs(rng):
    m = sparse.random(8, 9, density=0.3, random_state=0, format="csr")
    a = SparseTucker(ranks=(3, 3), max_iter=5, tol=0).fit(m)
    b = SparseTucker(ranks=(3, 3), max_iter=5, tol=0, dense=True).fit(m.toarray())
    for u, v in zip(a.factors_, b.factors_):
        assert np.linalg.norm(u - v) <= 1e-10


def test_errors(rng):
    with pytest.raises(NotFittedError):
        SparseTucker(ranks=(1, 1)).transform(np.ones((2, 2)))
    with pytest.raises(ValueError):
        SparseTucker().fit(np.ones((2, 2)))
    with pytest.raises(RankError):
        SparseTucker(ranks=(3, 1)).fit(np.ones((2, 2)))
    est = SparseTucker(ranks=(1, 1)).fit(np.ones((2, 2)))
    with pytest.raises(ShapeError):
        est.transform(np.ones((3, 2)))
    with pytest.raises(ValueError):
        SparseTucker(ranks=(1, 1)).fit(np.array([[1.0, np.nan]]))
