"""Synthetic DT graphs with planted lexical-relation structure.

The generator is a weighted stochastic block model with decorations:

* clusters of member words, wired with probability ``intra_p`` and heavy
  weights, stand in for co-hyponym groups;
* one hub per cluster, tied to ``hub_degree`` members, plays the hypernym;
* part nodes hang off a member (their whole) by a tether edge and touch
  ``part_links`` other members of the same cluster, playing meronyms;
* light noise edges join nodes of different clusters with probability
  ``noise_p``.

Labelled pairs come out with the same relation names as real data, so every
experiment runner works on synthetic input unchanged.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import COHYP, HYPER, MERO, RANDOM, LabeledPair, PairDataset
from .graph import DEFAULT_EW_MAX, DTGraph
from .rng import make_rng


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_clusters: int = 40
    cluster_size: int = 10
    intra_p: float = 0.8
    intra_weight_range: tuple[int, int] = (200, 1000)
    hub_degree: int = 10
    hub_weight_range: tuple[int, int] = (100, 600)
    part_attach: float = 1.0
    part_links: int = 3
    part_weight_range: tuple[int, int] = (50, 500)
    noise_p: float = 0.01
    noise_weight_range: tuple[int, int] = (1, 100)
    n_random: int | None = None  # None: as many as co-hyponym pairs
    ew_max: int = DEFAULT_EW_MAX
    seed: int = 42

    def validate(self) -> None:
        for name in ("intra_p", "part_attach", "noise_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise SynthError(f"{name}={p} is not a probability")
        for name in ("intra_weight_range", "hub_weight_range", "part_weight_range", "noise_weight_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi <= self.ew_max:
                raise SynthError(f"{name}={(lo, hi)} must satisfy 0 < lo <= hi <= ew_max")
        if self.n_clusters < 1 or self.cluster_size < 1:
            raise SynthError("need at least one cluster of one member")
        if not 0 <= self.hub_degree <= self.cluster_size:
            raise SynthError("hub_degree must lie in [0, cluster_size]")
        if not 0 <= self.part_links < self.cluster_size:
            raise SynthError("part_links must lie in [0, cluster_size)")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def _weight(rng: np.random.Generator, rng_range: tuple[int, int]) -> int:
    lo, hi = rng_range
    return int(rng.integers(lo, hi + 1))


def member(c: int, i: int) -> str:
    return f"c{c}m{i}"


def generate(spec: SynthSpec = SynthSpec()) -> tuple[DTGraph, PairDataset]:
    """Build the planted graph and the full labelled pair list.

    Each ingredient draws from its own sub-stream of ``spec.seed``, so for
    example raising ``noise_p`` only adds noise edges and leaves the planted
    structure untouched.  Raises :class:`SynthError` when no co-hyponym pair
    exists or random pairs are requested but none can be drawn.
    """
    spec.validate()
    if spec.cluster_size < 2:
        raise SynthError("cluster_size < 2 leaves the COHYP class empty")
    K, S = spec.n_clusters, spec.cluster_size
    edges: dict[tuple[str, str], int] = {}
    nodes: list[str] = []
    cluster_of: dict[str, int] = {}

    def add_edge(a, b, w):
        key = (a, b) if a < b else (b, a)
        edges.setdefault(key, w)

    pairs: list[LabeledPair] = []
    rng = make_rng(spec.seed, 0)
    for c in range(K):
        for i in range(S):
            nodes.append(member(c, i))
            cluster_of[member(c, i)] = c
        for i in range(S):
            for j in range(i + 1, S):
                if rng.random() < spec.intra_p:
                    add_edge(member(c, i), member(c, j), _weight(rng, spec.intra_weight_range))
                pairs.append(LabeledPair(member(c, i), member(c, j), COHYP, member(c, i)))

    rng = make_rng(spec.seed, 1)
    if spec.hub_degree:
        for c in range(K):
            hub = f"c{c}hub"
            nodes.append(hub)
            for i in sorted(rng.choice(S, size=spec.hub_degree, replace=False)):
                add_edge(member(c, i), hub, _weight(rng, spec.hub_weight_range))
                pairs.append(LabeledPair(member(c, i), hub, HYPER, member(c, i)))

    rng = make_rng(spec.seed, 2)
    for c in range(K):
        for i in range(S):
            if rng.random() >= spec.part_attach:
                continue
            part = f"c{c}m{i}part"
            nodes.append(part)
            cluster_of[part] = c
            add_edge(member(c, i), part, _weight(rng, spec.part_weight_range))
            others = [j for j in range(S) if j != i]
            for j in sorted(rng.choice(others, size=spec.part_links, replace=False)):
                add_edge(member(c, int(j)), part, _weight(rng, spec.part_weight_range))
            pairs.append(LabeledPair(member(c, i), part, MERO, member(c, i)))

    # noise: one uniform and one weight draw per node pair, thresholded by noise_p
    rng = make_rng(spec.seed, 3)
    noisy = [n for n in nodes if n in cluster_of]
    m = len(noisy)
    u = rng.random((m, m))
    lo, hi = spec.noise_weight_range
    wts = rng.integers(lo, hi + 1, size=(m, m))
    labels = np.array([cluster_of[n] for n in noisy])
    hit = (u < spec.noise_p) & (labels[:, None] != labels[None, :])
    for a, b in zip(*np.nonzero(np.triu(hit, 1))):
        add_edge(noisy[a], noisy[b], int(wts[a, b]))

    n_random = sum(p.label == COHYP for p in pairs) if spec.n_random is None else spec.n_random
    if n_random:
        rng = make_rng(spec.seed, 4)
        members = [member(c, i) for c in range(K) for i in range(S)]
        cand = [(a, b) for x, a in enumerate(members) for b in members[x + 1:]
                if cluster_of[a] != cluster_of[b] and (min(a, b), max(a, b)) not in edges]
        if not cand:
            raise SynthError("no non-adjacent cross-cluster pairs available for RANDOM")
        if len(cand) < n_random:
            raise SynthError(f"only {len(cand)} RANDOM candidates, {n_random} requested")
        for x in sorted(rng.choice(len(cand), size=n_random, replace=False)):
            a, b = cand[x]
            pairs.append(LabeledPair(a, b, RANDOM, a))

    g = DTGraph.from_edges(((a, b, w) for (a, b), w in edges.items()), spec.ew_max, nodes=nodes)
    prov = {"rule": "synth", "seed": spec.seed}
    return g, PairDataset(pairs, COHYP, prov)
