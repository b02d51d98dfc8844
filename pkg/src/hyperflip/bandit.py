"""Disjoint LinUCB over a grid of shift distances.

Each arm keeps ``A = I + sum x x^T`` and ``b = sum r x`` over the contexts it
was played on; its reward estimate is ``theta = A^-1 b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hyperflip.classifier import LinearClassifier, hyperplane_of, predict_label
from hyperflip.geometry import DEFAULT_LAMBDA_GRID, TransferConfig, as_embedding, transfer
from hyperflip.reward import BleuConfig, total_reward

DEFAULT_ALPHA = 4.0


@dataclass
class BanditState:
    arms: np.ndarray
    A: np.ndarray  # (k, n, n)
    b: np.ndarray  # (k, n)
    alpha: float

    @property
    def dim(self) -> int:
        return self.b.shape[1]

    @property
    def n_arms(self) -> int:
        return self.arms.size

    def theta(self, arm: int) -> np.ndarray:
        return np.linalg.solve(self.A[arm], self.b[arm])

    def copy(self) -> "BanditState":
        return BanditState(self.arms.copy(), self.A.copy(), self.b.copy(), self.alpha)


@dataclass
class RoundRecord:
    round: int
    arm: int
    lam: float
    reward: float
    mean_reward: float


@dataclass
class BanditTrainLog:
    records: list[RoundRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r.reward for r in self.records])

    @property
    def arms(self) -> np.ndarray:
        return np.array([r.arm for r in self.records], dtype=int)


def new_bandit(lambda_grid=DEFAULT_LAMBDA_GRID, n: int = 32, alpha: float = DEFAULT_ALPHA) -> BanditState:
    arms = np.array(TransferConfig(tuple(lambda_grid)).lambda_grid)
    if n < 1:
        raise ValueError("context dimension must be >= 1")
    if not alpha >= 0:
        raise ValueError("alpha must be >= 0")
    k = arms.size
    return BanditState(arms, np.tile(np.eye(n), (k, 1, 1)), np.zeros((k, n)), float(alpha))


def _solve_all(s: BanditState, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # one batched SPD solve gives both A^-1 b and A^-1 x per arm
    rhs = np.stack([s.b, np.broadcast_to(x, s.b.shape)], axis=2)
    sol = np.linalg.solve(s.A, rhs)
    return sol[:, :, 0], sol[:, :, 1]


def ucb_scores(s: BanditState, x) -> np.ndarray:
    """``theta_a . x + alpha * sqrt(x^T A_a^-1 x)`` for every arm."""
    x = as_embedding(x, s.dim)
    theta, ainv_x = _solve_all(s, x)
    width = np.sqrt(np.maximum(ainv_x @ x, 0.0))
    return theta @ x + s.alpha * width


def _first_argmax(scores: np.ndarray) -> int:
    # arms are ascending, so the first maximum is the smallest lambda
    return int(np.flatnonzero(scores == scores.max())[0])


def select_arm(s: BanditState, x) -> int:
    return _first_argmax(ucb_scores(s, x))


def greedy_scores(s: BanditState, x) -> np.ndarray:
    x = as_embedding(x, s.dim)
    theta = np.linalg.solve(s.A, s.b[:, :, None])[:, :, 0]
    return theta @ x


def select_lambda_greedy(s: BanditState, x) -> float:
    """Exploitation-only choice: the arm maximising ``theta_a . x``."""
    return float(s.arms[_first_argmax(greedy_scores(s, x))])


def update(s: BanditState, arm: int, x, r: float) -> None:
    if not 0 <= arm < s.n_arms:
        raise IndexError(f"arm {arm} out of range for {s.n_arms} arms")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {r}")
    x = as_embedding(x, s.dim)
    s.A[arm] += np.outer(x, x)
    s.b[arm] += r * x


def play(s: BanditState, contexts, reward_fn, log: BanditTrainLog | None = None) -> BanditTrainLog:
    """Select, observe ``reward_fn(i, arm)`` and update for each context in order."""
    log = BanditTrainLog() if log is None else log
    total = sum(r.reward for r in log.records)
    for i, x in enumerate(contexts):
        arm = select_arm(s, x)
        r = float(reward_fn(i, arm))
        update(s, arm, x, r)
        total += r
        n = len(log) + 1
        log.records.append(RoundRecord(n - 1, arm, float(s.arms[arm]), r, total / n))
    return log


def random_policy(n_arms: int, contexts, reward_fn, seed: int = 0) -> np.ndarray:
    """Rewards of a uniform-random arm choice on the same contexts."""
    rng = np.random.default_rng(seed)
    return np.array([float(reward_fn(i, int(rng.integers(n_arms)))) for i in range(len(contexts))])


def transfer_reward_fn(sentences, enc, dec, c: LinearClassifier, arms, cfg: BleuConfig = BleuConfig()):
    """Reward of shifting ``sentences[i]`` by ``arms[arm]`` towards the opposite predicted label.

    Returns ``(contexts, reward_fn)``.
    """
    plane = hyperplane_of(c)
    contexts = [enc(x) for x in sentences]

    def reward_fn(i: int, arm: int) -> float:
        z = contexts[i]
        y_target = 1 - predict_label(c, z)
        x_prime = dec(transfer(plane, z, arms[arm]))
        return total_reward(c, enc, sentences[i], x_prime, y_target, cfg)

    return contexts, reward_fn


def training_order(n: int, epochs: int, seed: int) -> np.ndarray:
    """Seeded visiting order: a fresh permutation of ``range(n)`` per epoch."""
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.permutation(n) for _ in range(epochs)])


def train_bandit(s: BanditState, corpus, enc, dec, c: LinearClassifier, epochs: int = 1,
                 cfg: BleuConfig = BleuConfig(), seed: int = 0) -> BanditTrainLog:
    """Run the select / shift / decode / reward / update loop over ``corpus``.

    The target label of every sentence is the opposite of the classifier's
    prediction on its encoding, so no gold labels are needed. Sentences are
    visited in a fresh seeded order on every epoch.
    """
    sentences = list(corpus)
    if not sentences:
        raise ValueError("empty training corpus")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if c.dim != s.dim:
        raise ValueError(f"classifier dim {c.dim} != bandit dim {s.dim}")
    order = training_order(len(sentences), epochs, seed)
    stream = [sentences[i] for i in order]
    contexts, reward_fn = transfer_reward_fn(stream, enc, dec, c, s.arms, cfg)
    if contexts[0].size != s.dim:
        raise ValueError(f"encoder dim {contexts[0].size} != bandit dim {s.dim}")
    return play(s, contexts, reward_fn)
