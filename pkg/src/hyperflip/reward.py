"""Sentence-level BLEU and the harmonic-mean transfer reward."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from hyperflip.classifier import LinearClassifier, property_reward


@dataclass(frozen=True)
class BleuConfig:
    max_n: int = 4
    smoothing_epsilon: float = 0.1

    def __post_init__(self):
        if not 1 <= self.max_n <= 4:
            raise ValueError("max_n must be in [1, 4]")
        if not 0 < self.smoothing_epsilon < 1:
            raise ValueError("smoothing_epsilon must be in (0, 1)")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace."""
    return text.lower().split()


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_ngram_precision(cand, ref, n: int) -> tuple[int, int]:
    """Clipped n-gram matches of ``cand`` against ``ref`` and the candidate n-gram count."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = max(len(cand) - n + 1, 0)
    ref_counts = _ngrams(ref, n)
    clipped = sum(min(c, ref_counts[g]) for g, c in _ngrams(cand, n).items())
    return clipped, total


def brevity_penalty(c_len: int, r_len: int) -> float:
    if c_len < 1 or r_len < 1:
        raise ValueError("lengths must be >= 1")
    if c_len >= r_len:
        return 1.0
    return math.exp(1.0 - r_len / c_len)


def bleu(cand: str, ref: str, cfg: BleuConfig = BleuConfig()) -> float:
    """Smoothed sentence BLEU of ``cand`` against a single reference ``ref``.

    The n-gram order is capped at the candidate length, and a zero clipped
    count is replaced by ``smoothing_epsilon`` before dividing by the total.
    """
    c_tok, r_tok = tokenize(cand), tokenize(ref)
    if not c_tok or not r_tok:
        raise ValueError("BLEU needs non-empty candidate and reference")
    order = min(cfg.max_n, len(c_tok))
    prod = 1.0
    for n in range(1, order + 1):
        clipped, total = modified_ngram_precision(c_tok, r_tok, n)
        prod *= (clipped if clipped > 0 else cfg.smoothing_epsilon) / total
    return brevity_penalty(len(c_tok), len(r_tok)) * prod ** (1.0 / order)


def harmonic_reward(r_prop: float, r_content: float) -> float:
    for v in (r_prop, r_content):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"reward components must lie in [0, 1], got {v}")
    if r_prop == 0.0 or r_content == 0.0:
        return 0.0
    lo, hi = sorted((float(r_prop), float(r_content)))
    # ordered and factored so the result is exactly symmetric and cannot underflow to 0
    return 2.0 * lo * (hi / (lo + hi))


def total_reward(c: LinearClassifier, enc, x: str, x_prime: str, y_target: int,
                 cfg: BleuConfig = BleuConfig()) -> float:
    """Harmonic mean of the property reward on ``enc(x_prime)`` and BLEU(x_prime vs x)."""
    r_prop = property_reward(c, enc(x_prime), y_target)
    r_content = bleu(x_prime, x, cfg)
    return harmonic_reward(r_prop, r_content)
