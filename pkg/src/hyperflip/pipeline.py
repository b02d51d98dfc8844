"""Transfer orchestration, evaluation and the seeded experiment runner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hyperflip.bandit import (
    DEFAULT_ALPHA,
    BanditState,
    BanditTrainLog,
    new_bandit,
    select_lambda_greedy,
    train_bandit,
)
from hyperflip.classifier import (
    LinearClassifier,
    TrainConfig,
    cross_validate,
    hyperplane_of,
    predict_label,
    train_logistic,
)
from hyperflip.geometry import DEFAULT_LAMBDA_GRID, TransferConfig, as_embedding, transfer
from hyperflip.reward import BleuConfig, bleu
from hyperflip.testbed import DUTCH, ENGLISH, PROPERTIES, Grammar, gold_flip, make_bilingual, make_codec, translate

BASELINE_LAMBDA = 1.0


@dataclass(frozen=True)
class PipelineConfig:
    dim: int = 32
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    alpha: float = DEFAULT_ALPHA
    bleu: BleuConfig = BleuConfig()
    train: TrainConfig = TrainConfig()
    seed: int = 0
    baseline: bool = False
    prop: str = "tense"
    coupling: float = 0.15
    noise_sigma: float = 0.0
    gain_range: tuple[float, float] = (0.5, 2.0)
    epochs: int = 1
    n_classifier: int = 2000
    n_bandit: int = 2500
    n_test: int = 100
    folds: int = 5
    cross_lingual: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", TransferConfig(tuple(self.lambda_grid)).lambda_grid)
        if self.prop not in PROPERTIES:
            raise ValueError(f"unknown property {self.prop!r}; expected one of {PROPERTIES}")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        for name in ("epochs", "n_classifier", "n_bandit", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


def run_transfer(clf: LinearClassifier, policy: BanditState | None, enc, dec, sentences):
    """Shift each sentence to the other side of the classifier's hyperplane and decode.

    ``policy`` is a trained bandit queried greedily, or ``None`` for the fixed
    mirror shift. Returns ``(transferred, lambdas)``.
    """
    if policy is not None and policy.dim != clf.dim:
        raise ValueError(f"bandit dim {policy.dim} != classifier dim {clf.dim}")
    plane = hyperplane_of(clf)
    out, lams = [], []
    for x in sentences:
        z = as_embedding(enc(x), clf.dim)
        lam = BASELINE_LAMBDA if policy is None else select_lambda_greedy(policy, z)
        out.append(dec(transfer(plane, z, lam)))
        lams.append(lam)
    return out, lams


def shift_embeddings(clf: LinearClassifier, policy: BanditState | None, Z):
    """Embedding-only variant of ``run_transfer`` for encoders without a decoder.

    Returns ``(shifted, lambdas, targets)``.
    """
    plane = hyperplane_of(clf)
    shifted, lams, targets = [], [], []
    for z in Z:
        z = as_embedding(z, clf.dim)
        lam = BASELINE_LAMBDA if policy is None else select_lambda_greedy(policy, z)
        shifted.append(transfer(plane, z, lam))
        lams.append(lam)
        targets.append(1 - predict_label(clf, z))
    return shifted, lams, targets


@dataclass(frozen=True)
class EvalRecord:
    original: str
    transferred: str
    gold: str
    target: int
    label_ok: bool
    content_ok: bool
    bleu: float


@dataclass(frozen=True)
class EvalReport:
    records: tuple[EvalRecord, ...] = ()
    proxy: bool = False

    @property
    def count(self) -> int:
        return len(self.records)

    def _pct(self, n: int) -> float:
        return 100.0 * n / self.count if self.records else 0.0

    @property
    def label_acc(self) -> float:
        return self._pct(sum(r.label_ok for r in self.records))

    @property
    def all_acc(self) -> float:
        return self._pct(sum(r.label_ok and r.content_ok for r in self.records))

    @property
    def bleu_vs_gold(self) -> float:
        # fsum is exact, so the mean does not depend on record order
        return math.fsum(r.bleu for r in self.records) / self.count if self.records else 0.0


def grammar_labeler(g: Grammar, prop: str):
    """Reads ``prop`` off the surface form; ``None`` for out-of-grammar text."""
    k = PROPERTIES.index(prop)

    def label(x: str) -> int | None:
        try:
            return g.parse(x).labels[k]
        except ValueError:
            return None

    return label


def evaluate(pairs, transferred, oracle_labeler, content_threshold: float | None = None,
             cfg: BleuConfig = BleuConfig(), proxy: bool = False) -> EvalReport:
    """Score transferred sentences against gold flips.

    The target label is the opposite of the oracle's label for the original.
    Content counts as preserved on an exact match with the gold sentence, or
    when ``content_threshold`` is given, on ``bleu(x_hat, gold) >= threshold``.
    """
    pairs = list(pairs)
    transferred = list(transferred)
    if len(pairs) != len(transferred):
        raise ValueError(f"{len(pairs)} pairs but {len(transferred)} transferred sentences")
    records = []
    for (x, gold), x_hat in zip(pairs, transferred):
        y = oracle_labeler(x)
        if y is None:
            raise ValueError(f"oracle cannot label the original sentence {x!r}")
        target = 1 - y
        score = bleu(x_hat, gold, cfg)
        content = x_hat == gold if content_threshold is None else score >= content_threshold
        records.append(EvalRecord(x, x_hat, gold, target, oracle_labeler(x_hat) == target,
                                  bool(content), score))
    return EvalReport(tuple(records), proxy)


def merge_reports(reports) -> EvalReport:
    reports = list(reports)
    return EvalReport(tuple(r for rep in reports for r in rep.records), any(rep.proxy for rep in reports))


def report_line(rep: EvalReport, name: str | None = None) -> str:
    line = (f"label_acc={rep.label_acc:.2f} all_acc={rep.all_acc:.2f} "
            f"bleu={rep.bleu_vs_gold:.4f} count={rep.count}")
    if name is not None:
        line += f" system={name}"
    if rep.proxy:
        line += " proxy=1"
    return line


def format_table(rows, title: str | None = None) -> str:
    """Text table of ``(name, report)`` rows followed by one machine-readable line per row."""
    rows = list(rows)
    width = max([len("System")] + [len(name) for name, _ in rows])
    out = [] if title is None else [title]
    out.append(f"{'System':<{width}}  {'Label':>6}  {'All':>6}  {'BLEU':>6}")
    for name, rep in rows:
        mark = "*" if rep.proxy else ""
        out.append(f"{name + mark:<{width}}  {rep.label_acc:6.1f}  {rep.all_acc:6.1f}  "
                   f"{100 * rep.bleu_vs_gold:6.1f}")
    if any(rep.proxy for _, rep in rows):
        out.append("* labels scored by the classifier, not an oracle")
    out.extend(report_line(rep, name) for name, rep in rows)
    return "\n".join(out) + "\n"


@dataclass
class ExperimentResult:
    config: PipelineConfig
    probe_acc: float
    classifier: LinearClassifier
    bandit: BanditState
    log: BanditTrainLog
    reports: dict[str, EvalReport] = field(default_factory=dict)
    cross_lingual: dict[str, EvalReport] = field(default_factory=dict)

    def format(self) -> str:
        p = self.config
        head = [
            f"property={p.prop} dim={p.dim} seed={p.seed} alpha={p.alpha!r} epochs={p.epochs} "
            f"coupling={p.coupling!r} noise={p.noise_sigma!r} "
            f"gain={p.gain_range[0]!r},{p.gain_range[1]!r}",
            f"probe_acc={self.probe_acc:.4f} folds={p.folds}",
            f"bandit_rounds={len(self.log)} final_mean_reward={self.log.records[-1].mean_reward:.4f}",
            "",
        ]
        text = "\n".join(head) + "\n" + format_table(self.reports.items(), "Monolingual")
        if self.cross_lingual:
            text += "\n" + format_table(self.cross_lingual.items(), "Cross-lingual")
        return text


def split_sentences(g: Grammar, cfg: PipelineConfig):
    """Seeded disjoint draws: held-out test sentences, then classifier and bandit corpora.

    Test sentences are distinct and never appear in either training corpus.
    """
    rng = np.random.default_rng([cfg.seed, 1])
    parses = list(g.all_parses())
    if cfg.n_test >= len(parses):
        raise ValueError(f"n_test={cfg.n_test} leaves no training sentences")
    order = rng.permutation(len(parses))
    test = [g.realize(parses[i]) for i in order[:cfg.n_test]]
    pool = [g.realize(parses[i]) for i in order[cfg.n_test:]]
    clf_corpus = [pool[i] for i in rng.integers(len(pool), size=cfg.n_classifier)]
    bandit_corpus = [pool[i] for i in rng.integers(len(pool), size=cfg.n_bandit)]
    return test, clf_corpus, bandit_corpus


def run_experiment(cfg: PipelineConfig = PipelineConfig()) -> ExperimentResult:
    """Train a classifier and a bandit on the synthetic testbed and compare against the mirror shift."""
    g = ENGLISH
    codec = make_codec(g, cfg.dim, cfg.seed, cfg.gain_range, cfg.coupling, cfg.noise_sigma)
    k = PROPERTIES.index(cfg.prop)
    test, clf_corpus, bandit_corpus = split_sentences(g, cfg)

    data = [(codec.encode(x), g.parse(x).labels[k]) for x in clf_corpus]
    probe = cross_validate(data, cfg.folds, cfg.train)
    clf = train_logistic(data, cfg.train)

    bandit = new_bandit(cfg.lambda_grid, cfg.dim, cfg.alpha)
    log = train_bandit(bandit, bandit_corpus, codec.encode, codec.decode, clf, cfg.epochs, cfg.bleu,
                       seed=cfg.seed)

    result = ExperimentResult(cfg, probe, clf, bandit, log)
    pairs = [(x, gold_flip(g, x, cfg.prop)) for x in test]
    labeler = grammar_labeler(g, cfg.prop)
    for name, policy in (("Baseline", None), ("CMAB", bandit)):
        out, _ = run_transfer(clf, policy, codec.encode, codec.decode, test)
        result.reports[name] = evaluate(pairs, out, labeler, cfg=cfg.bleu)

    if cfg.cross_lingual:
        enc_a, codec_b = make_bilingual(g, DUTCH, codec)
        pairs_b = [(translate(x, g, DUTCH), translate(gold, g, DUTCH)) for x, gold in pairs]
        labeler_b = grammar_labeler(DUTCH, cfg.prop)
        for name, policy in (("Baseline", None), ("CMAB", bandit)):
            out, _ = run_transfer(clf, policy, enc_a.encode, codec_b.decode, test)
            result.cross_lingual[name] = evaluate(pairs_b, out, labeler_b, cfg=cfg.bleu)
    return result
