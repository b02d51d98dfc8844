"""Command line interface: ``hyperflip <subcommand> [options]``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from hyperflip.bandit import DEFAULT_ALPHA, new_bandit, train_bandit
from hyperflip.classifier import TrainConfig, cross_validate, train_logistic
from hyperflip.geometry import DEFAULT_LAMBDA_GRID
from hyperflip.persist import (
    LabeledEmbedding,
    format_bandit,
    format_embeddings,
    format_model,
    load_bandit,
    load_embeddings,
    load_model,
)
from hyperflip.pipeline import (
    PipelineConfig,
    evaluate,
    format_table,
    grammar_labeler,
    run_experiment,
    run_transfer,
    shift_embeddings,
)
from hyperflip.testbed import DUTCH, ENGLISH, PROPERTIES, format_corpus, generate_corpus, make_codec, parse_corpus

GRAMMARS = {"en": ENGLISH, "nl": DUTCH}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _lambda_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_corpus(path):
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def _codec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--coupling", type=float, default=0.15)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--gain-min", type=float, default=0.5)
    p.add_argument("--gain-max", type=float, default=2.0)


def _codec(a, lang: str = "en"):
    return make_codec(GRAMMARS[lang], a.dim, a.seed, (a.gain_min, a.gain_max), a.coupling, a.noise)


def _property(p: argparse.ArgumentParser) -> None:
    p.add_argument("--property", choices=PROPERTIES, default="tense")


def cmd_synth_gen(a) -> None:
    _emit(format_corpus(generate_corpus(GRAMMARS[a.lang], a.count, a.seed)), a.out)


def cmd_encode(a) -> None:
    codec = _codec(a, a.lang)
    k = PROPERTIES.index(a.property)
    items = [LabeledEmbedding(str(i), r.labels[k], codec.encode(r.sentence))
             for i, r in enumerate(_read_corpus(a.corpus))]
    _emit(format_embeddings(items, a.dim), a.out)


def _embedding_data(path):
    items = load_embeddings(path)
    if not items:
        raise ValueError(f"{path}: no embeddings")
    return [(it.z, it.label) for it in items]


def cmd_train_clf(a) -> None:
    _emit(format_model(train_logistic(_embedding_data(a.embeddings), TrainConfig(seed=a.seed))), a.out)


def cmd_probe(a) -> None:
    acc = cross_validate(_embedding_data(a.embeddings), a.folds, TrainConfig(seed=a.seed))
    _emit(f"accuracy={acc!r} folds={a.folds}\n", a.out)


def cmd_train_bandit(a) -> None:
    clf = load_model(a.model)
    codec = _codec(a)
    sentences = [r.sentence for r in _read_corpus(a.corpus)]
    s = new_bandit(a.lambda_grid, a.dim, a.alpha)
    log = train_bandit(s, sentences, codec.encode, codec.decode, clf, a.epochs, seed=a.seed)
    _emit(format_bandit(s), a.out)
    print(f"rounds={len(log)} mean_reward={log.records[-1].mean_reward:.4f}", file=sys.stderr)


def cmd_transfer(a) -> None:
    if a.baseline == (a.bandit is not None):
        raise UsageError("transfer needs exactly one of --bandit or --baseline")
    if (a.corpus is None) == (a.embeddings is None):
        raise UsageError("transfer needs exactly one of --corpus or --embeddings")
    clf = load_model(a.model)
    policy = None if a.baseline else load_bandit(a.bandit)
    if a.embeddings is not None:
        items = load_embeddings(a.embeddings)
        shifted, _, targets = shift_embeddings(clf, policy, [it.z for it in items])
        out = [LabeledEmbedding(it.id, y, z) for it, y, z in zip(items, targets, shifted)]
        _emit(format_embeddings(out, clf.dim), a.out)
        return
    enc = _codec(a)
    dec = enc.with_grammar(GRAMMARS[a.target_lang])
    sentences = [r.sentence for r in _read_corpus(a.corpus)]
    out, lams = run_transfer(clf, policy, enc.encode, dec.decode, sentences)
    _emit("".join(f"{i}\t{lam!r}\t{x}\n" for i, (lam, x) in enumerate(zip(lams, out))), a.out)


def _read_transferred(path) -> list[str]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path} line {lineno}: expected 3 tab-separated fields")
        out.append(parts[2])
    return out


def cmd_evaluate(a) -> None:
    records = _read_corpus(a.corpus)
    k = PROPERTIES.index(a.property)
    g = GRAMMARS[a.lang]
    pairs = [(r.sentence, r.flips[k]) for r in records]
    report = evaluate(pairs, _read_transferred(a.transferred), grammar_labeler(g, a.property),
                      a.content_threshold)
    _emit(format_table([(a.name, report)]), a.out)


def cmd_run_experiment(a) -> None:
    cfg = PipelineConfig(
        dim=a.dim, lambda_grid=a.lambda_grid, alpha=a.alpha, seed=a.seed, prop=a.property,
        coupling=a.coupling, noise_sigma=a.noise, gain_range=(a.gain_min, a.gain_max),
        epochs=a.epochs, cross_lingual=a.cross_lingual,
    )
    _emit(run_experiment(cfg).format(), a.out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperflip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth-gen", help="sample a labelled corpus from the synthetic grammar")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lang", choices=sorted(GRAMMARS), default="en")
    p.set_defaults(func=cmd_synth_gen)

    p = sub.add_parser("encode", help="encode a corpus into an embedding file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lang", choices=sorted(GRAMMARS), default="en")
    _property(p)
    _codec_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train-clf", help="fit a logistic-regression probe on an embedding file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_clf)

    p = sub.add_parser("probe", help="k-fold probing accuracy on an embedding file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("train-bandit", help="train the shift-distance bandit on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--lambda-grid", type=_lambda_grid, default=DEFAULT_LAMBDA_GRID)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--epochs", type=int, default=1)
    _codec_args(p)
    p.set_defaults(func=cmd_train_bandit)

    p = sub.add_parser("transfer", help="flip the property of sentences or embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--bandit")
    p.add_argument("--baseline", action="store_true", help="mirror every input (shift 1)")
    p.add_argument("--corpus")
    p.add_argument("--embeddings")
    p.add_argument("--target-lang", choices=sorted(GRAMMARS), default="en")
    _codec_args(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("evaluate", help="score transferred sentences against gold flips")
    p.add_argument("--corpus", required=True)
    p.add_argument("--transferred", required=True)
    p.add_argument("--lang", choices=sorted(GRAMMARS), default="en")
    p.add_argument("--content-threshold", type=float, default=None,
                   help="count content as kept when BLEU to gold reaches this value")
    p.add_argument("--name", default="System")
    _property(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run-experiment", help="seeded end-to-end comparison of bandit and baseline")
    p.add_argument("--lambda-grid", type=_lambda_grid, default=DEFAULT_LAMBDA_GRID)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--cross-lingual", action="store_true")
    _property(p)
    _codec_args(p)
    p.set_defaults(func=cmd_run_experiment)

    for p in sub.choices.values():
        p.add_argument("--out", help="write output here instead of stdout")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"hyperflip: error: {e}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main())
