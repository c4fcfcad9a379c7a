import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from interestrec import gmm
from interestrec.gmm import GmmConfig, GmmModel

from oracles import mixture_density


def blobs(seed, centers, n=200, scale=1.0):
    rng = np.random.default_rng(seed)
    return np.vstack([rng.normal(c, scale, size=(n, len(c))) for c in centers])


def random_model(rng, k, d):
    w = rng.random(k) + 0.1
    return GmmModel(w / w.sum(), rng.normal(0, 2, (k, d)), rng.uniform(0.2, 3.0, (k, d)))


def test_single_component_is_closed_form():
    x = np.random.default_rng(0).normal(3, 2, size=(50, 4))
    model = gmm.fit(x, GmmConfig(k=1))
    assert np.allclose(model.means[0], x.mean(axis=0), atol=1e-8)
    assert np.allclose(model.variances[0], x.var(axis=0) + 1e-6, atol=1e-8)
    assert model.weights.tolist() == [1.0]


def test_recovers_two_blobs():
    x = blobs(1, [(-5.0, 0.0), (5.0, 0.0)])
    model = gmm.fit(x, GmmConfig(k=2, seed=3))
    order = np.argsort(model.means[:, 0])
    assert np.allclose(model.means[order], [[-5, 0], [5, 0]], atol=0.3)
    assert np.allclose(model.weights, 0.5, atol=0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.sampled_from(["diagonal", "spherical"]))
def test_em_monotone(seed, k, cov):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(int(rng.integers(20, 80)), int(rng.integers(2, 6))))
    model = gmm.fit(x, GmmConfig(k=k, covariance=cov, seed=seed, n_init=1, tol=1e-8))
    h = np.array(model.history)
    assert np.all(np.diff(h) >= -1e-9 * np.abs(h[:-1]))


def test_model_invariants():
    x = blobs(2, [(0, 0, 0), (4, 4, 4)], n=30)
    for cov in ("diagonal", "spherical"):
        model = gmm.fit(x, GmmConfig(k=3, covariance=cov))
        assert abs(model.weights.sum() - 1) < 1e-12 and np.all(model.weights >= 0)
        assert np.all(model.variances >= 1e-6)
        assert np.all(np.isfinite(model.means))
    assert np.all(model.variances == model.variances[:, :1])


def test_responsibilities_sum_to_one():
    rng = np.random.default_rng(5)
    model = random_model(rng, 3, 4)
    r = gmm.responsibilities(model, rng.normal(size=(40, 4)) * 5)
    assert np.all(np.abs(r.sum(axis=1) - 1) < 1e-12)


def test_translation_equivariance():
    x = blobs(3, [(0, 0), (6, 1)], n=40)
    shift = np.array([100.0, -37.5])
    a = gmm.fit(x, GmmConfig(k=2, seed=9))
    b = gmm.fit(x + shift, GmmConfig(k=2, seed=9))
    assert np.allclose(b.means, a.means + shift, atol=1e-6)
    assert np.allclose(b.weights, a.weights, atol=1e-6)
    assert np.allclose(b.variances, a.variances, atol=1e-6)


def test_fit_errors():
    with pytest.raises(ValueError):
        gmm.fit(np.zeros((2, 3)), GmmConfig(k=3))
    with pytest.raises(ValueError):
        gmm.fit(np.zeros((5, 0)), GmmConfig(k=1))
    with pytest.raises(ValueError):
        GmmConfig(k=0)
    with pytest.raises(ValueError):
        GmmConfig(covariance="full")


def test_identical_points_do_not_blow_up():
    model = gmm.fit(np.ones((10, 2)), GmmConfig(k=2))
    assert np.all(np.isfinite(model.means)) and np.all(model.variances >= 1e-6)


def test_log_pdf_standard_normal():
    model = GmmModel(np.array([1.0]), np.zeros((1, 1)), np.ones((1, 1)))
    assert gmm.log_pdf(model, [0.0]) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-15)
    assert gmm.log_pdf(model, [0.0]) == pytest.approx(-0.9189, abs=1e-4)


def test_log_pdf_matches_direct_density():
    rng = np.random.default_rng(6)
    for _ in range(50):
        k, d = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        model = random_model(rng, k, d)
        x = rng.normal(0, 2, d)
        direct = mixture_density(x, model.weights, model.means, model.variances)
        assert gmm.log_pdf(model, x) == pytest.approx(math.log(direct), abs=1e-10)


def test_log_pdf_symmetry():
    m = np.array([[1.5, -2.0]])
    model = GmmModel(np.array([0.5, 0.5]), np.vstack([m, -m]), np.full((2, 2), 0.7))
    for x in np.random.default_rng(7).normal(size=(20, 2)):
        assert gmm.log_pdf(model, x) == pytest.approx(gmm.log_pdf(model, -x), abs=1e-12)


def test_log_pdf_dimension_mismatch():
    model = GmmModel(np.array([1.0]), np.zeros((1, 2)), np.ones((1, 2)))
    with pytest.raises(ValueError):
        gmm.log_pdf(model, [0.0, 1.0, 2.0])


def test_density_integrates_to_one():
    model = GmmModel(np.array([0.3, 0.7]), np.array([[-2.0], [1.0]]), np.array([[0.5], [2.0]]))
    sigma = math.sqrt(2.0)
    lo, hi = -2.0 - 20 * sigma, 1.0 + 20 * sigma
    total, _ = quad(lambda t: math.exp(gmm.log_pdf(model, [t])), lo, hi, points=[-2.0, 1.0], limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_sample_empty_and_deterministic():
    model = GmmModel(np.array([1.0]), np.zeros((1, 3)), np.ones((1, 3)))
    assert gmm.sample(model, 0, 1).shape == (0, 3)
    assert np.array_equal(gmm.sample(model, 10, 4), gmm.sample(model, 10, 4))


def test_sample_prefix_property():
    model = GmmModel(np.array([0.4, 0.6]), np.array([[0.0, 0.0, 0.0], [5.0, 5.0, 5.0]]), np.ones((2, 3)))
    assert np.array_equal(gmm.sample(model, 7, 12), gmm.sample(model, 20, 12)[:7])


def test_tight_samples_stay_near_means():
    reg = 1e-6
    means = np.array([[0.0, 0.0], [10.0, -3.0]])
    model = GmmModel(np.array([0.5, 0.5]), means, np.full((2, 2), reg))
    s = gmm.sample(model, 2000, 8)
    nearest = np.min(np.linalg.norm(s[:, None] - means[None], axis=2), axis=1)
    assert np.all(nearest < 6 * math.sqrt(reg) * math.sqrt(2))
    assert np.all(np.abs(s - means[np.argmin(np.linalg.norm(s[:, None] - means[None], axis=2), axis=1)]) < 6 * math.sqrt(reg))


def test_select_k():
    one = np.random.default_rng(1).normal(0, 0.5, size=(150, 2))
    assert gmm.select_k(one, [1, 2, 3]) == 1
    two = blobs(2, [(-10.0, 0.0), (10.0, 0.0)], n=100)
    assert gmm.select_k(two, [1, 2, 3]) == 2
    assert gmm.select_k(two, [1]) == 1
    with pytest.raises(ValueError):
        gmm.select_k(two, [])


def test_json_round_trip():
    model = gmm.fit(blobs(4, [(0, 0), (3, 3)], n=20), GmmConfig(k=2))
    text = model.to_json()
    obj = json.loads(text)
    assert set(obj) == {"k", "covariance", "weights", "means", "variances", "train_loglik"}
    back = GmmModel.from_json(text)
    assert np.array_equal(back.means, model.means)
    assert np.array_equal(back.variances, model.variances)
    assert back.train_loglik == model.train_loglik
