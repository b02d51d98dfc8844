"""Synthetic, exactly invertible sentence autoencoder.

Sentences follow the template ``DET SUBJ VERB DET OBJ`` and realise three
binary properties: tense of the verb (1 = past), subject number and object
number (1 = plural). The grammar is small enough to enumerate, so round trips
and separability can be checked exhaustively.
"""

from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

PROPERTIES = ("tense", "subjnum", "objnum")
SLOTS = ("det_subj", "subj", "verb", "det_obj", "obj")
# slot block each property leaks into: tense -> obj, subjnum -> det_obj, objnum -> subj
LEAK_BLOCKS = (4, 3, 1)


@dataclass(frozen=True)
class Grammar:
    """Word lists for one surface language.

    ``verbs`` holds ``(present_sg, present_pl, past_sg, past_pl)`` per lemma;
    ``subjects`` and ``objects`` hold ``(singular, plural)``.
    """

    determiners: tuple[str, ...]
    subjects: tuple[tuple[str, str], ...]
    verbs: tuple[tuple[str, str, str, str], ...]
    objects: tuple[tuple[str, str], ...]
    name: str = "A"

    def __post_init__(self):
        if not (self.determiners and self.subjects and self.verbs and self.objects):
            raise ValueError("grammar inventories must be non-empty")
        nouns = [f for pair in self.subjects for f in pair]
        if len(set(nouns)) != len(nouns):
            raise ValueError("subject forms must be distinct")
        objs = [f for pair in self.objects for f in pair]
        if len(set(objs)) != len(objs):
            raise ValueError("object forms must be distinct")
        if len(set(self.determiners)) != len(self.determiners):
            raise ValueError("determiners must be distinct")
        for num in (0, 1):
            forms = [v[num] for v in self.verbs] + [v[2 + num] for v in self.verbs]
            if len(set(forms)) != len(forms):
                raise ValueError("verb forms must be distinct for each subject number")

    @property
    def sizes(self) -> tuple[int, int, int, int, int]:
        nd = len(self.determiners)
        return (nd, len(self.subjects), len(self.verbs), nd, len(self.objects))

    def structure(self) -> tuple[int, ...]:
        return self.sizes

    def realize(self, parse: "Parse") -> str:
        d1, s, v, d2, o = parse.slots
        tense, sn, on = parse.labels
        return " ".join((
            self.determiners[d1],
            self.subjects[s][sn],
            self.verbs[v][2 * tense + sn],
            self.determiners[d2],
            self.objects[o][on],
        ))

    def parse(self, sentence: str) -> "Parse":
        toks = sentence.lower().split()
        if len(toks) != 5:
            raise ValueError(f"not a grammar sentence: {sentence!r}")
        try:
            d1 = self.determiners.index(toks[0])
            d2 = self.determiners.index(toks[3])
            s, sn = _lookup(self.subjects, toks[1])
            o, on = _lookup(self.objects, toks[4])
            v, form = _lookup(self.verbs, toks[2], allowed=(sn, 2 + sn))
        except LookupError:
            raise ValueError(f"not a grammar sentence: {sentence!r}") from None
        return Parse((d1, s, v, d2, o), (form // 2, sn, on))

    def all_parses(self):
        ranges = [range(k) for k in self.sizes]
        for slots in itertools.product(*ranges):
            for labels in itertools.product((0, 1), repeat=3):
                yield Parse(slots, labels)

    def __len__(self):
        return int(np.prod(self.sizes)) * 8


def _lookup(table, token, allowed=None):
    for i, forms in enumerate(table):
        for j, f in enumerate(forms):
            if f == token and (allowed is None or j in allowed):
                return i, j
    raise LookupError(token)


@dataclass(frozen=True)
class Parse:
    slots: tuple[int, int, int, int, int]
    labels: tuple[int, int, int]

    def flipped(self, prop: str) -> "Parse":
        k = PROPERTIES.index(prop)
        labels = list(self.labels)
        labels[k] = 1 - labels[k]
        return Parse(self.slots, tuple(labels))


ENGLISH = Grammar(
    determiners=("the", "my"),
    subjects=(("dog", "dogs"), ("cat", "cats"), ("teacher", "teachers"), ("child", "children")),
    verbs=(
        ("sees", "see", "saw", "saw"),
        ("likes", "like", "liked", "liked"),
        ("finds", "find", "found", "found"),
        ("wants", "want", "wanted", "wanted"),
    ),
    objects=(("ball", "balls"), ("book", "books"), ("apple", "apples"), ("key", "keys")),
    name="en",
)

DUTCH = Grammar(
    determiners=("de", "mijn"),
    subjects=(("hond", "honden"), ("kat", "katten"), ("leraar", "leraren"), ("vrouw", "vrouwen")),
    verbs=(
        ("ziet", "zien", "zag", "zagen"),
        ("kent", "kennen", "kende", "kenden"),
        ("vindt", "vinden", "vond", "vonden"),
        ("wil", "willen", "wilde", "wilden"),
    ),
    objects=(("bal", "ballen"), ("pen", "pennen"), ("appel", "appels"), ("sleutel", "sleutels")),
    name="nl",
)


def gold_flip(g: Grammar, x: str, prop: str) -> str:
    """The sentence identical to ``x`` except for the realisation of ``prop``."""
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}")
    return g.realize(g.parse(x).flipped(prop))


def property_labels(g: Grammar, x: str) -> dict[str, int]:
    return dict(zip(PROPERTIES, g.parse(x).labels))


def translate(x: str, src: Grammar, dst: Grammar) -> str:
    return dst.realize(src.parse(x))


@dataclass(frozen=True)
class CorpusRecord:
    sentence: str
    labels: tuple[int, int, int]
    flips: tuple[str, str, str]


def generate_corpus(g: Grammar, count: int, seed: int = 0) -> list[CorpusRecord]:
    """Uniform seeded samples over slot and property choices."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        slots = tuple(int(rng.integers(k)) for k in g.sizes)
        labels = tuple(int(v) for v in rng.integers(0, 2, size=3))
        p = Parse(slots, labels)
        out.append(CorpusRecord(
            g.realize(p), labels, tuple(g.realize(p.flipped(prop)) for prop in PROPERTIES)))
    return out


def format_corpus(records) -> str:
    """Tab-separated export, one record per line."""
    lines = []
    for i, r in enumerate(records):
        labels = ",".join(str(v) for v in r.labels)
        lines.append("\t".join((str(i), labels, r.sentence, *r.flips)))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_corpus(text: str) -> list[CorpusRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 tab-separated fields, got {len(parts)}")
        try:
            labels = tuple(int(v) for v in parts[1].split(","))
        except ValueError:
            raise ValueError(f"line {lineno}: malformed labels {parts[1]!r}") from None
        if len(labels) != 3 or any(v not in (0, 1) for v in labels):
            raise ValueError(f"line {lineno}: labels must be three 0/1 values")
        out.append(CorpusRecord(parts[2], labels, tuple(parts[3:])))
    return out


@dataclass(frozen=True)
class SynthCodec:
    """Seeded encoder/decoder pair over one grammar.

    The feature vector of a sentence holds one-hot blocks for its five slots
    followed by one coordinate per property. Every sentence frame (its slot
    choices) has a gain ``g`` in ``[gain_min, gain_max]`` and, per property,
    a decoder threshold ``t = o * g`` with ``|o|`` in ``offset_range`` and a
    seeded sign. The property coordinate is ``t + g`` for label 1 and
    ``t - g`` for label 0, and each property leaks ``coupling * (+-g)`` into
    one slot block, spread evenly with seeded signs. The latent vector is
    ``Q f(x)``.

    Decoding undoes ``Q``, snaps every slot block to its largest entry (ties
    to the lowest index) and reads each label as ``coordinate >= t`` of the
    decoded frame. Because the thresholds vary from frame to frame, a linear
    classifier's hyperplane cannot pass through all of them; the mirror image
    of a sentence can then land short of its frame's threshold, which is what
    makes the shift distance matter.
    """

    grammar: Grammar
    dim: int
    seed: int
    Q: np.ndarray = field(repr=False)
    gain_min: float
    gain_max: float
    coupling: float
    noise_sigma: float
    offset_range: tuple[float, float]
    slot_weights: np.ndarray = field(repr=False)
    leak: np.ndarray = field(repr=False)  # (3, content_dim); entries +-1/k over a k-slot block

    @property
    def content_dim(self) -> int:
        return int(sum(self.grammar.sizes))

    @property
    def feature_dim(self) -> int:
        return self.content_dim + len(PROPERTIES)

    def _block_offsets(self) -> np.ndarray:
        return np.cumsum((0,) + self.grammar.sizes)

    def property_axis(self, prop: str) -> np.ndarray:
        """Latent image of a property's feature coordinate."""
        return self.Q[:, self.content_dim + PROPERTIES.index(prop)].copy()

    def gain(self, slots) -> float:
        """Frame gain: an affine function of the slot choices spanning the gain range."""
        offs = self._block_offsets()
        raw = float(sum(self.slot_weights[o + s] for o, s in zip(offs, slots)))
        lo = hi = 0.0
        for a, b in zip(offs, offs[1:]):
            lo += float(self.slot_weights[a:b].min())
            hi += float(self.slot_weights[a:b].max())
        frac = 0.0 if hi == lo else (raw - lo) / (hi - lo)
        return self.gain_min + (self.gain_max - self.gain_min) * frac

    def thresholds(self, slots) -> np.ndarray:
        """Decoder threshold of each property coordinate for a frame."""
        key = zlib.crc32(repr((self.seed, tuple(int(s) for s in slots))).encode())
        rng = np.random.default_rng(key)
        signs = rng.choice([-1.0, 1.0], size=len(PROPERTIES))
        frac = rng.uniform(*self.offset_range, size=len(PROPERTIES))
        return signs * frac * self.gain(slots)

    def features(self, parse: Parse) -> np.ndarray:
        f = np.zeros(self.dim)
        offs = self._block_offsets()
        for o, s in zip(offs, parse.slots):
            f[o + s] = 1.0
        g = self.gain(parse.slots)
        signs = np.array([1.0 if v else -1.0 for v in parse.labels])
        f[:self.content_dim] += self.coupling * g * (signs @ self.leak)
        f[self.content_dim:self.feature_dim] = self.thresholds(parse.slots) + g * signs
        return f

    def encode_parse(self, parse: Parse) -> np.ndarray:
        z = self.Q @ self.features(parse)
        if self.noise_sigma > 0:
            key = zlib.crc32(repr((self.seed, "noise", parse.slots, parse.labels)).encode())
            z = z + np.random.default_rng(key).normal(0.0, self.noise_sigma, self.dim)
        return z

    def encode(self, x: str) -> np.ndarray:
        return self.encode_parse(self.grammar.parse(x))

    def decode_parse(self, z) -> Parse:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {z.shape}")
        f = self.Q.T @ z
        offs = self._block_offsets()
        slots = tuple(int(np.argmax(f[a:b])) for a, b in zip(offs, offs[1:]))
        coords = f[self.content_dim:self.feature_dim]
        labels = tuple(int(c >= t) for c, t in zip(coords, self.thresholds(slots)))
        return Parse(slots, labels)

    def decode(self, z) -> str:
        return self.grammar.realize(self.decode_parse(z))

    def with_grammar(self, g: Grammar) -> "SynthCodec":
        """Same latent space, different surface words."""
        if g.structure() != self.grammar.structure():
            raise ValueError(f"grammar structure {g.structure()} != {self.grammar.structure()}")
        return replace(self, grammar=g)


def make_codec(g: Grammar, n: int = 32, seed: int = 0, gain_range=(0.5, 2.0),
               coupling: float = 0.15, noise_sigma: float = 0.0,
               offset_range=(0.5, 0.75)) -> SynthCodec:
    content = int(sum(g.sizes))
    if n < content + len(PROPERTIES):
        raise ValueError(f"latent dim {n} is smaller than the feature length {content + len(PROPERTIES)}")
    gmin, gmax = (float(v) for v in gain_range)
    if not 0 < gmin <= gmax:
        raise ValueError("gain range must satisfy 0 < min <= max")
    if not 0 <= coupling < 1:
        raise ValueError("coupling must lie in [0, 1)")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    omin, omax = (float(v) for v in offset_range)
    if not 0 <= omin <= omax < 1:
        raise ValueError("offset range must satisfy 0 <= min <= max < 1")
    smallest = min(g.sizes[b] for b in LEAK_BLOCKS)
    if coupling * gmax / smallest >= 0.5:
        # beyond this the leak can outvote the one-hot entry and snapping fails
        raise ValueError(f"coupling {coupling} too large for gain {gmax}: "
                         f"need coupling * gain_max < {smallest / 2}")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    slot_weights = rng.uniform(size=content)
    leak = np.zeros((len(PROPERTIES), content))
    offs = np.cumsum((0,) + g.sizes)
    for k, block in enumerate(LEAK_BLOCKS):
        a, b = offs[block], offs[block + 1]
        leak[k, a:b] = rng.choice([-1.0, 1.0], size=b - a) / (b - a)
    return SynthCodec(g, n, seed, Q, gmin, gmax, float(coupling), float(noise_sigma),
                      (omin, omax), slot_weights, leak)


def make_bilingual(g_a: Grammar, g_b: Grammar, codec: SynthCodec) -> tuple[SynthCodec, SynthCodec]:
    """Two codecs sharing one latent space; only the surface words differ."""
    return codec.with_grammar(g_a), codec.with_grammar(g_b)
