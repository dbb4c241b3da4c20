"""Labelled word-pair datasets and the constructions used by the experiments.

Relation labels are plain strings.  The four relations the experiments use
have canonical names ``COHYP``, ``HYPER``, ``MERO`` and ``RANDOM``; any other
tag is kept as ``OTHER:<tag>`` so nothing is silently dropped.
"""
from __future__ import annotations

import io
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .rng import make_rng

COHYP, HYPER, MERO, RANDOM = "COHYP", "HYPER", "MERO", "RANDOM"
NEGATIVE_CLASSES = (HYPER, MERO, RANDOM)

_ALIASES = {
    "cohyp": COHYP, "coord": COHYP, "cohypo": COHYP, "cohyponym": COHYP,
    "co-hyponym": COHYP, "co-hyp": COHYP, "coordinate": COHYP,
    "hyper": HYPER, "hypernym": HYPER, "hypernymy": HYPER,
    "mero": MERO, "meronym": MERO, "meronymy": MERO,
    "random": RANDOM, "random-n": RANDOM, "rand": RANDOM,
}

_POS_SUFFIX = re.compile(r"-[a-z]$")


def parse_label(tag: str) -> str:
    """Map a relation tag to its canonical label (case-insensitive)."""
    tag = tag.strip()
    if tag in (COHYP, HYPER, MERO, RANDOM) or tag.startswith("OTHER:"):
        return tag
    return _ALIASES.get(tag.lower(), f"OTHER:{tag}")


def label_tag(label: str) -> str:
    return label[6:] if label.startswith("OTHER:") else label


class DatasetFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class InsufficientPairsError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPair:
    w1: str
    w2: str
    label: str
    source_concept: str | None = None

    def __post_init__(self):
        if self.w1 == self.w2:
            raise ValueError(f"self-pair {self.w1!r}")

    @property
    def key(self) -> frozenset:
        return frozenset((self.w1, self.w2))

    def swapped(self) -> "LabeledPair":
        return LabeledPair(self.w2, self.w1, self.label, self.source_concept)


@dataclass
class PairDataset:
    pairs: list[LabeledPair]
    positive_label: str = COHYP
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def words(self) -> list[tuple[str, str]]:
        return [(p.w1, p.w2) for p in self.pairs]

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.pairs]

    def binary_targets(self) -> np.ndarray:
        """+1 for the positive label, -1 for everything else."""
        return np.array([1 if p.label == self.positive_label else -1 for p in self.pairs], dtype=np.int64)

    def class_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.labels).items()))

    def subset(self, labels: Iterable[str]) -> "PairDataset":
        keep = set(labels)
        prov = dict(self.provenance, subset=",".join(sorted(keep)))
        return PairDataset([p for p in self.pairs if p.label in keep], self.positive_label, prov)

    def to_tsv(self) -> str:
        head = "".join(f"# {k}={v}\n" for k, v in self.provenance.items())
        return head + "".join(f"{p.w1}\t{p.w2}\t{label_tag(p.label)}\n" for p in self.pairs)


def _read(source: TextIO | str):
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return fh.read().splitlines()
    return source.read().splitlines()


def parse_pairs(source: TextIO | str, positive_label: str = COHYP) -> PairDataset:
    """Read ``word1<TAB>word2<TAB>label`` lines, keeping input order.

    ``# key=value`` comment lines are collected into the provenance.
    """
    pairs: list[LabeledPair] = []
    prov: dict[str, str] = {}
    for lineno, line in enumerate(_read(source), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                prov[k.strip()] = v.strip()
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not parts[0] or not parts[1]:
            raise DatasetFormatError(lineno, "expected word1<TAB>word2<TAB>label")
        if parts[0] == parts[1]:
            raise DatasetFormatError(lineno, f"self-pair {parts[0]!r}")
        pairs.append(LabeledPair(parts[0], parts[1], parse_label(parts[2])))
    return PairDataset(pairs, positive_label, prov)


def loads_pairs(text: str, positive_label: str = COHYP) -> PairDataset:
    return parse_pairs(io.StringIO(text), positive_label)


def parse_bless(source: TextIO | str, strip_pos: bool = True) -> list[LabeledPair]:
    """Read a BLESS-style relation file into concept-oriented pairs.

    Two layouts are accepted, detected per line: ``concept<TAB>relatum<TAB>relation``
    and the original four-column BLESS ``concept<TAB>class<TAB>relation<TAB>relatum``.
    In the four-column layout a trailing part-of-speech suffix such as ``-n``
    is removed from both words when ``strip_pos`` is set.
    """
    rows: list[LabeledPair] = []
    for lineno, line in enumerate(_read(source), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 3:
            concept, relatum, rel = parts
        elif len(parts) == 4:
            concept, _, rel, relatum = parts
            if strip_pos:
                concept = _POS_SUFFIX.sub("", concept)
                relatum = _POS_SUFFIX.sub("", relatum)
        else:
            raise DatasetFormatError(lineno, f"expected 3 or 4 tab-separated fields, got {len(parts)}")
        if not concept or not relatum:
            raise DatasetFormatError(lineno, "empty word")
        if concept == relatum:
            raise DatasetFormatError(lineno, f"self-pair {concept!r}")
        rows.append(LabeledPair(concept, relatum, parse_label(rel), source_concept=concept))
    return rows


def _concept(p: LabeledPair) -> str:
    return p.source_concept if p.source_concept is not None else p.w1


def build_weeds_style(rows: Sequence[LabeledPair], seed: int) -> PairDataset:
    """Co-hyponym-vs-rest dataset built concept by concept.

    For every concept all of its co-hyponym pairs are positives and an equal
    number of negatives is drawn, split as evenly as possible over hypernym,
    meronym and random pairs (the remainder classes are a seeded draw).  A
    class that runs short is topped up from the others with a warning.
    Unordered duplicates are removed as pairs are selected, and finally
    exactly ``len // 2`` randomly chosen pairs have their words swapped.
    """
    concepts: dict[str, list[LabeledPair]] = {}
    for r in rows:
        concepts.setdefault(_concept(r), []).append(r)

    seen: set[frozenset] = set()
    out: list[LabeledPair] = []
    refilled: list[str] = []
    for ci, (concept, members) in enumerate(concepts.items()):
        pos = _fresh((r for r in members if r.label == COHYP), seen)
        if not pos:
            continue
        seen.update(p.key for p in pos)
        pools = {c: _fresh((r for r in members if r.label == c), seen) for c in NEGATIVE_CLASSES}
        rng = make_rng(seed, 1, ci)
        n = len(pos)
        quota = {c: n // 3 for c in NEGATIVE_CLASSES}
        for k in rng.choice(3, size=n % 3, replace=False):
            quota[NEGATIVE_CLASSES[k]] += 1

        # random order of each pool; taking prefixes samples without replacement
        order = {c: [pools[c][i] for i in rng.permutation(len(pools[c]))] for c in NEGATIVE_CLASSES}
        taken = {c: min(quota[c], len(order[c])) for c in NEGATIVE_CLASSES}
        short = n - sum(taken.values())
        if short:
            refilled.append(concept)
            while short and any(taken[c] < len(order[c]) for c in NEGATIVE_CLASSES):
                # top up the currently smallest class first to stay near even
                c = min((c for c in NEGATIVE_CLASSES if taken[c] < len(order[c])),
                        key=lambda c: (taken[c], NEGATIVE_CLASSES.index(c)))
                taken[c] += 1
                short -= 1
        negs = [p for c in NEGATIVE_CLASSES for p in order[c][:taken[c]]]
        seen.update(p.key for p in negs)
        out.extend(pos)
        out.extend(negs)

    if refilled:
        warnings.warn(f"{len(refilled)} concept(s) lacked negatives of some class and were topped up "
                      f"from the others (first: {refilled[0]!r})")
    flip = make_rng(seed, 2).choice(len(out), size=len(out) // 2, replace=False) if out else []
    for i in flip:
        out[i] = out[i].swapped()
    prov = {"rule": "weeds", "seed": seed, "size": len(out)}
    return PairDataset(out, COHYP, prov)


def _fresh(candidates: Iterable[LabeledPair], seen: set[frozenset]) -> list[LabeledPair]:
    out, local = [], set()
    for r in candidates:
        if r.key in seen or r.key in local:
            continue
        local.add(r.key)
        out.append(r)
    return out


def build_binary_sample(
    rows: Sequence[LabeledPair],
    negative: str,
    n_per_class: int,
    seed: int,
    positive: str = COHYP,
) -> PairDataset:
    """Uniform sample of ``n_per_class`` positive and ``n_per_class`` negative pairs.

    Pairs are de-duplicated on the unordered word pair first (the first
    occurrence in ``rows`` wins), then each class is sampled without
    replacement.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    negative = parse_label(negative)
    pools: dict[str, list[LabeledPair]] = {positive: [], negative: []}
    seen: set[frozenset] = set()
    for r in rows:
        if r.key in seen:
            continue
        seen.add(r.key)
        if r.label in pools:
            pools[r.label].append(r)
    rng = make_rng(seed)
    out: list[LabeledPair] = []
    for label in (positive, negative):
        pool = pools[label]
        if len(pool) < n_per_class:
            raise InsufficientPairsError(
                f"class {label} has {len(pool)} pairs, {n_per_class} requested"
            )
        out.extend(pool[i] for i in rng.choice(len(pool), size=n_per_class, replace=False))
    prov = {"rule": "binary", "seed": seed, "negative": negative, "n_per_class": n_per_class}
    return PairDataset(out, positive, prov)


def stratified_folds(targets: Sequence, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified k-fold split of ``range(len(targets))``.

    Members of each class are shuffled and dealt round-robin, with the dealing
    position carried across classes, so every fold holds either
    ``floor(n_c/k)`` or ``ceil(n_c/k)`` members of class ``c`` and fold sizes
    differ by at most one.  Returns ``(train, test)`` index arrays, sorted.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(targets)
    classes, counts = np.unique(y, return_counts=True)
    for c, n in zip(classes, counts):
        if n < k:
            raise ValueError(f"class {c!r} has {n} members, fewer than k={k}")
    rng = make_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    pos = 0
    for c in classes:
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        fold_of[idx] = (pos + np.arange(len(idx))) % k
        pos += len(idx)
    everything = np.arange(len(y))
    return [(everything[fold_of != f], everything[fold_of == f]) for f in range(k)]
