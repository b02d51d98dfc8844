import numpy as np
import pytest

from envs import learned_vs_random, shifting_optimum, grammar_learned_vs_random
from hyperflip.bandit import (
    BanditTrainLog,
    new_bandit,
    play,
    select_arm,
    select_lambda_greedy,
    train_bandit,
    ucb_scores,
    update,
)
from hyperflip.classifier import LinearClassifier
from hyperflip.geometry import DEFAULT_LAMBDA_GRID, transfer
from hyperflip.classifier import hyperplane_of, predict_label
from hyperflip.reward import total_reward


def seeded_episode(seed, n=8, k=5, steps=100):
    rng = np.random.default_rng(seed)
    s = new_bandit(np.arange(1.0, 1.0 + 0.5 * k, 0.5), n, alpha=1.0)
    history = [[] for _ in range(k)]
    for _ in range(steps):
        x = rng.normal(size=n)
        arm = select_arm(s, x)
        r = float(rng.uniform())
        update(s, arm, x, r)
        history[arm].append((x, r))
    return s, history


def ridge_oracle(history, n):
    # least squares on the stacked system [X; I] theta = [r; 0]
    if not history:
        return np.zeros(n)
    X = np.array([x for x, _ in history])
    r = np.array([v for _, v in history])
    return np.linalg.lstsq(np.vstack([X, np.eye(n)]), np.r_[r, np.zeros(n)], rcond=None)[0]


def test_new_bandit():
    s = new_bandit(DEFAULT_LAMBDA_GRID, 32, 4.0)
    assert s.n_arms == 13 and s.dim == 32
    assert all(np.array_equal(A, np.eye(32)) for A in s.A)
    assert not s.b.any()
    single = new_bandit((1.0,), 1)
    assert single.n_arms == 1 and single.dim == 1
    for args in (((), 4), ((1.0,), 0)):
        with pytest.raises(ValueError):
            new_bandit(*args)
    with pytest.raises(ValueError):
        new_bandit((1.0,), 4, alpha=-1)


def test_ucb_examples():
    s = new_bandit(DEFAULT_LAMBDA_GRID, 4, 4.0)
    x = np.array([0.6, 0.0, 0.8, 0.0])
    np.testing.assert_allclose(ucb_scores(s, x), 4.0, rtol=1e-15)
    assert select_arm(s, x) == 0
    assert select_lambda_greedy(s, x) == 1.0
    e1 = np.eye(4)[0]
    update(s, 3, e1, 1.0)
    np.testing.assert_array_equal(s.A[3], np.diag([2.0, 1, 1, 1]))
    np.testing.assert_array_equal(s.b[3], e1)
    assert ucb_scores(s, e1)[3] == pytest.approx(0.5 + 4 * np.sqrt(0.5), rel=1e-14)
    s.alpha = 0.0
    np.testing.assert_array_equal(ucb_scores(s, e1), [s.theta(a) @ e1 for a in range(13)])
    assert select_arm(s, e1) == 3


def test_zero_reward_grows_only_A():
    s = new_bandit((1.0, 2.0), 2)
    update(s, 1, [1.0, 1.0], 0.0)
    assert not s.b.any()
    np.testing.assert_array_equal(s.A[1], [[2, 1], [1, 2]])
    np.testing.assert_array_equal(s.A[0], np.eye(2))


def test_greedy_choice_follows_theta():
    s = new_bandit(DEFAULT_LAMBDA_GRID, 2)
    x = np.array([1.0, 0.0])
    target = list(s.arms).index(2.5)
    s.b[target] = [0.7, 0.0]
    assert select_lambda_greedy(s, x) == 2.5
    s.alpha = 0.0
    assert s.arms[select_arm(s, x)] == select_lambda_greedy(s, x)


def test_update_errors():
    s = new_bandit((1.0, 2.0), 2)
    with pytest.raises(IndexError):
        update(s, 2, [1, 0], 0.5)
    with pytest.raises(ValueError):
        update(s, 0, [1, 0], 1.5)
    with pytest.raises(ValueError):
        update(s, 0, [1, 0, 0], 0.5)
    with pytest.raises(ValueError):
        ucb_scores(s, [1.0])


@pytest.mark.parametrize("seed", range(5))
def test_ridge_equivalence(seed):
    s, history = seeded_episode(seed)
    for a in range(s.n_arms):
        expected = ridge_oracle(history[a], s.dim)
        assert np.linalg.norm(s.theta(a) - expected) <= 1e-9 * max(np.linalg.norm(expected), 1e-12)


def test_exploration_width_shrinks():
    rng = np.random.default_rng(0)
    s = new_bandit((1.0,), 6)
    x = rng.normal(size=6)
    widths = [float(x @ np.linalg.solve(s.A[0], x))]
    for _ in range(30):
        update(s, 0, rng.normal(size=6), 0.5)
        widths.append(float(x @ np.linalg.solve(s.A[0], x)))
        assert np.linalg.eigvalsh(s.A[0]).min() >= 1 - 1e-12
    assert widths[0] <= x @ x + 1e-12
    assert all(b <= a + 1e-12 for a, b in zip(widths, widths[1:]))


def test_episodes_are_deterministic():
    a, _ = seeded_episode(11)
    b, _ = seeded_episode(11)
    assert a.A.tobytes() == b.A.tobytes() and a.b.tobytes() == b.b.tobytes()


class ToyCodec:
    """Scalar sentences 'v <value>'; decoding rounds to one decimal."""

    def encode(self, x):
        return np.array([float(x.split()[1]), 1.0])

    def decode(self, z):
        return f"v {round(float(z[0]), 1)}"


def test_train_bandit_log_and_single_arm():
    codec = ToyCodec()
    clf = LinearClassifier(np.array([1.0, 0.0]), 0.0)
    corpus = [f"v {v:.1f}" for v in np.linspace(-2, 2, 9) if abs(v) > 1e-9]
    s = new_bandit((2.0,), 2)
    log = train_bandit(s, corpus, codec.encode, codec.decode, clf, epochs=2, seed=5)
    assert isinstance(log, BanditTrainLog) and len(log) == 16
    assert set(log.arms) == {0}
    assert all(0 <= r <= 1 for r in log.rewards)
    assert log.records[-1].mean_reward == pytest.approx(log.rewards.mean())
    h = hyperplane_of(clf)
    rng = np.random.default_rng(5)
    order = np.concatenate([rng.permutation(8), rng.permutation(8)])
    for rec, i in zip(log.records, order):
        x = corpus[i]
        z = codec.encode(x)
        xp = codec.decode(transfer(h, z, 2.0))
        assert rec.reward == total_reward(clf, codec.encode, x, xp, 1 - predict_label(clf, z))


def test_train_bandit_errors():
    codec = ToyCodec()
    clf = LinearClassifier(np.array([1.0, 0.0]), 0.0)
    with pytest.raises(ValueError):
        train_bandit(new_bandit((1.0,), 2), [], codec.encode, codec.decode, clf)
    with pytest.raises(ValueError):
        train_bandit(new_bandit((1.0,), 3), ["v 1"], codec.encode, codec.decode, clf)


def test_learns_context_dependent_shift():
    contexts, reward_fn = shifting_optimum(seed=0)
    learned, rand = learned_vs_random(new_bandit(n=2), contexts, reward_fn)
    assert learned >= rand + 0.02


def test_play_is_deterministic():
    contexts, reward_fn = shifting_optimum(rounds=300, seed=4)
    a = play(new_bandit(n=2), contexts, reward_fn)
    b = play(new_bandit(n=2), contexts, reward_fn)
    assert a.records == b.records


def test_final_fifth_beats_random_on_testbed():
    learned, rand = grammar_learned_vs_random()
    assert learned > rand
