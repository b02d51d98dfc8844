"""Text formats for embeddings, classifiers and bandit state.

Floats are written with ``repr``, which is the shortest string that parses
back to the same double, so every round trip is bit-exact. Loaders parse the
whole file before building anything; a malformed or truncated file raises
``FormatError`` and returns no partial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hyperflip.bandit import BanditState
from hyperflip.classifier import LinearClassifier
from hyperflip.geometry import TransferConfig

EMBEDDINGS_HEADER = "embtsv v1"
CLASSIFIER_HEADER = "linclf v1"
BANDIT_HEADER = "linucb v1"


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledEmbedding:
    id: str
    label: int
    z: np.ndarray


def _fmt(v: float) -> str:
    return repr(float(v))


def _floats(tokens, where: str) -> list[float]:
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise FormatError(f"{where}: not a number in {' '.join(tokens)!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise FormatError(f"{where}: non-finite value")
    return vals


def _int_field(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"{where}: expected an integer, got {token!r}") from None


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def format_embeddings(items, dim: int | None = None) -> str:
    items = list(items)
    if dim is None:
        if not items:
            raise FormatError("cannot infer dim from an empty list")
        dim = items[0].z.size
    if dim < 1:
        raise FormatError("dim must be >= 1")
    lines = [f"{EMBEDDINGS_HEADER} dim={dim}"]
    for it in items:
        if it.z.size != dim:
            raise FormatError(f"embedding {it.id!r} has dim {it.z.size}, expected {dim}")
        if it.label not in (0, 1):
            raise FormatError(f"embedding {it.id!r} has label {it.label!r}")
        if "\t" in it.id or "\n" in it.id:
            raise FormatError(f"id {it.id!r} contains a tab or newline")
        lines.append(f"{it.id}\t{it.label}\t" + " ".join(_fmt(v) for v in it.z))
    return "\n".join(lines) + "\n"


def parse_embeddings(lines) -> list[LabeledEmbedding]:
    lines = list(lines)
    if not lines:
        raise FormatError("line 1: missing header")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "embtsv" or not head[2].startswith("dim="):
        raise FormatError(f"line 1: malformed header {lines[0]!r}")
    if head[1] != "v1":
        raise FormatError(f"line 1: unsupported version {head[1]!r}")
    dim = _int_field(head[2][4:], "line 1")
    if dim < 1:
        raise FormatError(f"line 1: dim must be >= 1, got {dim}")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        where = f"line {lineno}"
        if len(parts) != 3:
            raise FormatError(f"{where}: expected 3 tab-separated fields, got {len(parts)}")
        if parts[1] not in ("0", "1"):
            raise FormatError(f"{where}: label must be 0 or 1, got {parts[1]!r}")
        vals = _floats(parts[2].split(), where)
        if len(vals) != dim:
            raise FormatError(f"{where}: expected {dim} values, got {len(vals)}")
        out.append(LabeledEmbedding(parts[0], int(parts[1]), np.array(vals)))
    return out


def save_embeddings(path, items, dim: int | None = None) -> None:
    _write(path, format_embeddings(items, dim))


def load_embeddings(path) -> list[LabeledEmbedding]:
    return parse_embeddings(_lines(path))


def _trim(lines) -> list[str]:
    lines = list(lines)
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def format_model(c: LinearClassifier) -> str:
    return "\n".join([
        CLASSIFIER_HEADER,
        f"dim {c.dim}",
        f"b {_fmt(c.b)}",
        "w " + " ".join(_fmt(v) for v in c.w),
    ]) + "\n"


def _expect(lines, i: int, key: str) -> list[str]:
    if i >= len(lines):
        raise FormatError(f"line {i + 1}: unexpected end of file, expected {key!r}")
    parts = lines[i].split()
    if not parts or parts[0] != key:
        raise FormatError(f"line {i + 1}: expected {key!r}, got {lines[i]!r}")
    return parts[1:]


def _check_header(lines, header: str) -> None:
    if not lines:
        raise FormatError("line 1: missing header")
    name, _, version = header.partition(" ")
    got = lines[0].split()
    if len(got) != 2 or got[0] != name:
        raise FormatError(f"line 1: expected {header!r}, got {lines[0]!r}")
    if got[1] != version:
        raise FormatError(f"line 1: unsupported version {got[1]!r}")


def parse_model(lines) -> LinearClassifier:
    lines = _trim(lines)
    _check_header(lines, CLASSIFIER_HEADER)
    rest = _expect(lines, 1, "dim")
    if len(rest) != 1:
        raise FormatError("line 2: expected 'dim <n>'")
    dim = _int_field(rest[0], "line 2")
    b = _floats(_expect(lines, 2, "b"), "line 3")
    if len(b) != 1:
        raise FormatError("line 3: expected one bias value")
    w = _floats(_expect(lines, 3, "w"), "line 4")
    if len(w) != dim:
        raise FormatError(f"line 4: expected {dim} weights, got {len(w)}")
    if len(lines) > 4:
        raise FormatError("line 5: trailing content")
    return LinearClassifier(np.array(w), b[0])


def save_model(path, c: LinearClassifier) -> None:
    _write(path, format_model(c))


def load_model(path) -> LinearClassifier:
    return parse_model(_lines(path))


def format_bandit(s: BanditState) -> str:
    lines = [
        BANDIT_HEADER,
        f"dim {s.dim} alpha {_fmt(s.alpha)}",
        "arms " + " ".join(_fmt(v) for v in s.arms),
    ]
    for a in range(s.n_arms):
        lines.append("A")
        lines.extend(" ".join(_fmt(v) for v in row) for row in s.A[a])
        lines.append("b")
        lines.append(" ".join(_fmt(v) for v in s.b[a]))
    return "\n".join(lines) + "\n"


def parse_bandit(lines) -> BanditState:
    lines = _trim(lines)
    _check_header(lines, BANDIT_HEADER)
    rest = _expect(lines, 1, "dim")
    if len(rest) != 3 or rest[1] != "alpha":
        raise FormatError("line 2: expected 'dim <n> alpha <a>'")
    n = _int_field(rest[0], "line 2")
    if n < 1:
        raise FormatError("line 2: dim must be >= 1")
    alpha = _floats(rest[2:], "line 2")[0]
    if alpha < 0:
        raise FormatError("line 2: alpha must be >= 0")
    arms = _floats(_expect(lines, 2, "arms"), "line 3")
    try:
        TransferConfig(tuple(arms))
    except ValueError as e:
        raise FormatError(f"line 3: {e}") from None
    k = len(arms)
    A = np.empty((k, n, n))
    b = np.empty((k, n))
    i = 3
    for a in range(k):
        _expect(lines, i, "A")
        for r in range(n):
            i += 1
            if i >= len(lines):
                raise FormatError(f"line {i + 1}: unexpected end of file in A of arm {a}")
            row = _floats(lines[i].split(), f"line {i + 1}")
            if len(row) != n:
                raise FormatError(f"line {i + 1}: expected {n} values, got {len(row)}")
            A[a, r] = row
        i += 1
        _expect(lines, i, "b")
        i += 1
        if i >= len(lines):
            raise FormatError(f"line {i + 1}: unexpected end of file in b of arm {a}")
        row = _floats(lines[i].split(), f"line {i + 1}")
        if len(row) != n:
            raise FormatError(f"line {i + 1}: expected {n} values, got {len(row)}")
        b[a] = row
        i += 1
        if not np.array_equal(A[a], A[a].T):
            raise FormatError(f"A of arm {a} is not symmetric")
        try:
            np.linalg.cholesky(A[a])
        except np.linalg.LinAlgError:
            raise FormatError(f"A of arm {a} is not positive definite") from None
    if i != len(lines):
        raise FormatError(f"line {i + 1}: trailing content")
    return BanditState(np.array(arms), A, b, alpha)


def save_bandit(path, s: BanditState) -> None:
    _write(path, format_bandit(s))


def load_bandit(path) -> BanditState:
    return parse_bandit(_lines(path))
