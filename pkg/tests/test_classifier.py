import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperflip.classifier import (
    LinearClassifier,
    TrainConfig,
    cross_validate,
    hyperplane_of,
    loss_and_grad,
    predict_label,
    predict_proba,
    property_reward,
    sigmoid,
    stratified_folds,
    train_logistic,
)


def random_instance(rng, n=None, m=None):
    n = int(rng.integers(1, 9)) if n is None else n
    m = int(rng.integers(5, 51)) if m is None else m
    X = rng.normal(size=(m, n))
    y = (rng.uniform(size=m) < 0.5).astype(float)
    y[0], y[1] = 0.0, 1.0
    return X, y


def numeric_grad(f, x, h=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(math.log(3)) == pytest.approx(0.75, rel=1e-15)
    assert sigmoid(-math.log(3)) == pytest.approx(0.25, rel=1e-15)
    assert sigmoid(1000.0) == 1.0 and sigmoid(-1000.0) == 0.0
    t = np.linspace(-30, 30, 601)
    np.testing.assert_allclose(sigmoid(-t), 1 - sigmoid(t), atol=1e-15)
    assert np.all(np.diff(sigmoid(t)) >= 0)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X, y = random_instance(rng)
        w, b, l2 = rng.normal(size=X.shape[1]), float(rng.normal()), float(rng.uniform(0, 0.1))
        _, gw, gb = loss_and_grad(w, b, X, y, l2)
        params = np.append(w, b)
        num = numeric_grad(lambda p: loss_and_grad(p[:-1], p[-1], X, y, l2)[0], params)
        ana = np.append(gw, gb)
        assert np.linalg.norm(ana - num) <= 1e-5 * max(np.linalg.norm(num), 1e-8)


def test_label_flip_negates_weights():
    rng = np.random.default_rng(1)
    for _ in range(5):
        X, y = random_instance(rng, n=4, m=40)
        c = train_logistic(list(zip(X, y.astype(int))))
        cf = train_logistic(list(zip(X, 1 - y.astype(int))))
        np.testing.assert_allclose(cf.w, -c.w, atol=1e-6)
        assert cf.b == pytest.approx(-c.b, abs=1e-6)


def test_two_point_problem():
    c = train_logistic([((1.0, 0.0), 1), ((-1.0, 0.0), 0)], TrainConfig(l2_penalty=1e-3))
    assert c.w[0] > 0
    assert predict_label(c, [1, 0]) == 1 and predict_label(c, [-1, 0]) == 0


def test_heavy_regularisation_drives_weights_to_zero():
    rng = np.random.default_rng(2)
    X, y = random_instance(rng, n=3, m=30)
    y[:] = np.r_[np.zeros(15), np.ones(15)]
    c = train_logistic(list(zip(X, y.astype(int))), TrainConfig(l2_penalty=1e6))
    assert np.abs(c.w).max() < 1e-5
    assert predict_proba(c, X[0]) == pytest.approx(0.5, abs=1e-5)


def test_loss_is_non_increasing():
    rng = np.random.default_rng(3)
    X, y = random_instance(rng, n=8, m=50)
    history = []
    train_logistic(list(zip(X, y.astype(int))), TrainConfig(max_iters=500), history=history)
    assert len(history) > 10
    assert all(b <= a for a, b in zip(history, history[1:]))


def test_training_is_deterministic():
    rng = np.random.default_rng(4)
    data = list(zip(*random_instance(rng, n=5, m=30)))
    data = [(z, int(y)) for z, y in data]
    a, b = train_logistic(data), train_logistic(data)
    assert a.w.tobytes() == b.w.tobytes() and a.b == b.b


def test_predict_examples():
    assert predict_proba(LinearClassifier(np.zeros(2), 0.0), [3, -1]) == 0.5
    c = LinearClassifier(np.array([1.0, 0.0]), 0.0)
    assert predict_proba(c, [math.log(3), 9]) == pytest.approx(0.75)
    assert predict_proba(LinearClassifier(np.array([1.0, 0.0]), -math.log(3)), [0, 0]) == pytest.approx(0.25)
    assert predict_label(c, [0.0, 5.0]) == 1
    assert predict_label(c, [-0.1, 5.0]) == 0
    with pytest.raises(ValueError):
        predict_proba(c, [1, 2, 3])


def test_property_reward():
    c = LinearClassifier(np.array([1.0, 0.0]), 0.0)
    assert property_reward(c, [0, 0], 1) == property_reward(c, [0, 0], 0) == 0.5
    assert property_reward(c, [math.log(3), 0], 1) == pytest.approx(0.75)
    assert property_reward(c, [math.log(3), 0], 0) == pytest.approx(0.25)
    rng = np.random.default_rng(5)
    for t in rng.normal(scale=10, size=1000):
        assert property_reward(c, [t, 0], 1) + property_reward(c, [t, 0], 0) == 1.0


@settings(max_examples=100, deadline=None)
@given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 2**32 - 1))
def test_label_invariant_under_positive_scaling(c, seed):
    rng = np.random.default_rng(seed)
    w, b, z = rng.normal(size=4), rng.normal(), rng.normal(size=4)
    assert predict_label(LinearClassifier(w, b), z) == predict_label(LinearClassifier(c * w, c * b), z)


def test_hyperplane_of():
    h = hyperplane_of(LinearClassifier(np.array([3.0, 4.0]), 1.0))
    np.testing.assert_array_equal(h.w, [3, 4])
    assert h.b == 1.0
    with pytest.raises(ValueError):
        hyperplane_of(LinearClassifier(np.zeros(2), 1.0))


def test_cross_validate_separable_and_random():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(200, 5))
    w = rng.normal(size=5)
    y = (X @ w > 0).astype(int)
    X += np.outer(np.where(y == 1, 1.0, -1.0), w) * 0.2
    assert cross_validate(list(zip(X, y)), k=5) == 1.0
    Xr = rng.normal(size=(600, 5))
    yr = rng.integers(0, 2, size=600)
    assert abs(cross_validate(list(zip(Xr, yr)), k=5) - 0.5) <= 0.1


def test_cross_validate_is_permutation_invariant():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + 0.8 * rng.normal(size=60) > 0).astype(int)
    data = list(zip(X, y))
    perm = rng.permutation(60)
    assert cross_validate(data) == cross_validate([data[i] for i in perm])


def test_folds_are_stratified():
    y = np.array([0] * 23 + [1] * 12)
    folds = stratified_folds(y, 5, seed=3)
    assert sorted(np.concatenate(folds).tolist()) == list(range(35))
    for f in folds:
        assert abs(int(np.sum(y[f] == 1)) - 12 / 5) <= 1
        assert abs(int(np.sum(y[f] == 0)) - 23 / 5) <= 1


def test_training_errors():
    with pytest.raises(ValueError):
        train_logistic([((1.0,), 1), ((2.0,), 1)])
    with pytest.raises(ValueError):
        train_logistic([((1.0,), 1), ((2.0, 1.0), 0)])
    with pytest.raises(ValueError):
        train_logistic([((np.inf,), 1), ((2.0,), 0)])
    with pytest.raises(ValueError):
        cross_validate([((float(i),), i % 2) for i in range(6)], k=5)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0)
