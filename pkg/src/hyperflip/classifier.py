"""Logistic-regression property classifier over embeddings.

Training is full-batch gradient descent on the mean negative log-likelihood
plus ``l2_penalty / 2 * ||w||^2`` (the bias is not penalised), started from
zero weights. The solver is deterministic; ``TrainConfig.seed`` only drives
fold assignment in :func:`cross_validate`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperflip.geometry import Hyperplane, as_embedding


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2_penalty: float = 1e-4
    max_iters: int = 5000
    grad_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.l2_penalty >= 0:
            raise ValueError("l2_penalty must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")


@dataclass(frozen=True)
class LinearClassifier:
    w: np.ndarray
    b: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("classifier weights must be a non-empty vector")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.b)):
            raise ValueError("classifier weights must be finite")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.size

    def decision(self, z) -> float:
        return float(self.w @ as_embedding(z, self.dim) + self.b)


def sigmoid(t):
    """Numerically stable logistic function; works on scalars and arrays."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def _log1pexp(t: np.ndarray) -> np.ndarray:
    # log(1 + e^t) without overflow
    return np.logaddexp(0.0, t)


def stack_data(data) -> tuple[np.ndarray, np.ndarray]:
    """Turn an iterable of ``(z, y)`` pairs into a design matrix and label vector."""
    pairs = list(data)
    if not pairs:
        raise ValueError("no training examples")
    dims = {np.asarray(z).size for z, _ in pairs}
    if len(dims) != 1:
        raise ValueError(f"inconsistent embedding dimensions: {sorted(dims)}")
    X = np.array([np.asarray(z, dtype=np.float64) for z, _ in pairs])
    y = np.array([int(lbl) for _, lbl in pairs])
    if X.ndim != 2:
        raise ValueError("embeddings must be 1-D vectors")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data contains non-finite values")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return X, y.astype(np.float64)


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Regularised mean NLL and its gradient ``(dL/dw, dL/db)``."""
    t = X @ w + b
    # -[y log s(t) + (1-y) log(1-s(t))] = log(1+e^t) - y t
    loss = float(np.mean(_log1pexp(t) - y * t) + 0.5 * l2 * (w @ w))
    r = sigmoid(t) - y
    gw = X.T @ r / X.shape[0] + l2 * w
    gb = float(np.mean(r))
    return loss, gw, gb


def train_logistic(data, cfg: TrainConfig = TrainConfig(), history: list | None = None) -> LinearClassifier:
    """Fit a logistic classifier to ``(z, y)`` pairs.

    Stops once the gradient sup-norm drops below ``cfg.grad_tol`` or after
    ``cfg.max_iters`` steps. A step that would increase the loss is retried
    with half the step size, so the loss sequence (appended to ``history``
    when given) never increases.
    """
    X, y = stack_data(data)
    if y.min() == y.max():
        raise ValueError("training data contains a single class")
    w = np.zeros(X.shape[1])
    b = 0.0
    lr = cfg.learning_rate
    loss, gw, gb = loss_and_grad(w, b, X, y, cfg.l2_penalty)
    if history is not None:
        history.append(loss)
    for _ in range(cfg.max_iters):
        if max(np.max(np.abs(gw)), abs(gb)) <= cfg.grad_tol:
            break
        while True:
            w_new = w - lr * gw
            b_new = b - lr * gb
            new_loss, new_gw, new_gb = loss_and_grad(w_new, b_new, X, y, cfg.l2_penalty)
            if new_loss <= loss or lr < 1e-12:
                break
            lr *= 0.5
        if new_loss > loss:
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        if history is not None:
            history.append(loss)
    return LinearClassifier(w, b)


def predict_proba(c: LinearClassifier, z) -> float:
    return sigmoid(c.decision(z))


def predict_label(c: LinearClassifier, z) -> int:
    """1 iff the predicted probability is >= 0.5 (equivalently ``w.z + b >= 0``)."""
    return 1 if c.decision(z) >= 0.0 else 0


def hyperplane_of(c: LinearClassifier) -> Hyperplane:
    if not np.any(c.w):
        raise ValueError("classifier has zero weights; its decision boundary is undefined")
    return Hyperplane(c.w, c.b)


def property_reward(c: LinearClassifier, z_dec, y_target: int) -> float:
    """Predicted likelihood that the re-encoded output ``z_dec`` carries ``y_target``."""
    if y_target not in (0, 1):
        raise ValueError("target label must be 0 or 1")
    t = c.decision(z_dec)
    p = sigmoid(t)
    return p if y_target == 1 else 1.0 - p


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle each class's indices with ``seed`` and deal them round-robin into ``k`` folds."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        idx = idx[rng.permutation(idx.size)]
        for i, j in enumerate(idx):
            folds[i % k].append(int(j))
    return [np.array(sorted(f), dtype=int) for f in folds]


def cross_validate(data, k: int = 5, cfg: TrainConfig = TrainConfig()) -> float:
    """Mean held-out accuracy over stratified ``k`` folds.

    Examples are put into a canonical order before folding, so the result does
    not depend on the order of ``data``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    X, y = stack_data(data)
    counts = [int(np.sum(y == lbl)) for lbl in (0, 1)]
    if min(counts) < k:
        raise ValueError(f"each class needs at least k={k} examples, got counts {counts}")
    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    X, y = X[order], y[order]
    accs = []
    for fold in stratified_folds(y, k, cfg.seed):
        mask = np.ones(y.size, dtype=bool)
        mask[fold] = False
        clf = train_logistic(zip(X[mask], y[mask]), cfg)
        pred = (X[fold] @ clf.w + clf.b >= 0).astype(float)
        accs.append(float(np.mean(pred == y[fold])))
    return float(np.mean(accs))
