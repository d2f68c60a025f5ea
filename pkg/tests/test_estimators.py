import numpy as np
import pytest
from sklearn.base import clone

from recon import manifolds as mf
from recon.errors import InvalidInput
from recon.estimators import ChainReconstruction, MoserTardosPerturbation
from recon.validation import check_point_cloud


def test_check_point_cloud():
    X = check_point_cloud([[0, 0], [1, 2]])
    assert X.dtype == float and X.shape == (2, 2)
    with pytest.raises(InvalidInput):
        check_point_cloud([[0, 0], [1]])
    with pytest.raises(InvalidInput):
        check_point_cloud([[0, np.nan]])
    with pytest.raises(InvalidInput):
        check_point_cloud([[0, 0]], dim=3)
    with pytest.raises(InvalidInput):
        check_point_cloud([[0, 0]], min_points=2)


def test_chain_reconstruction_params_roundtrip():
    est = ChainReconstruction(d=1, rho_mult=12.0, seed=3)
    params = est.get_params()
    assert params["rho_mult"] == 12.0
    cloned = clone(est)
    assert cloned.get_params() == params


def test_chain_reconstruction_fit_circle():
    m = mf.circle(1.0)
    X = mf.sample(m, mf.SampleSpec(count=32, delta=0.0, seed=1))
    est = ChainReconstruction(d=1, manifold=m, seed=2).fit(X)
    assert len(est.support_) == 32
    assert est.result_.matches_delloc
    assert est.certificate_["ok"]
    assert est.euler_characteristic_ == 0
    assert est.score() == -est.result_.energy


def test_chain_reconstruction_realistic_mode():
    m = mf.circle(1.0)
    X = mf.sample(m, mf.SampleSpec(count=32, delta=0.0, seed=4))
    eps = mf.verify_density(m, X).epsilon
    est = ChainReconstruction(
        d=1, epsilon=eps, normalization="realistic-p0", pca_scale=3 * eps,
        load_radius=4 * eps, seed=0,
    ).fit(X)
    assert len(est.support_) == 32


def test_chain_reconstruction_epsilon_required():
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(ValueError):
        ChainReconstruction(d=1).fit(X)


def test_moser_tardos_transformer():
    rng = np.random.default_rng(3)
    xs, ys = np.meshgrid(np.arange(5), np.arange(5), indexing="ij")
    X = np.stack([xs.ravel(), ys.ravel()], 1) + rng.uniform(-0.1, 0.1, (25, 2))
    tr = MoserTardosPerturbation(d=2, rho=0.45, r_pert=0.15, height_min=0.01,
                                 prot_min=1e-4, seed=1)
    out = tr.fit_transform(X)
    assert out.shape == X.shape
    assert tr.status_ == "ok"
    assert np.linalg.norm(out - X, axis=1).max() <= 0.15 + 1e-9
    # deterministic given the seed
    assert np.array_equal(out, clone(tr).fit_transform(X))
