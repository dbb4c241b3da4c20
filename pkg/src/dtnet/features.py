"""Pairwise network measures over a DT graph.

Five cohesion measures are computed for a word pair ``(wi, wj)``:

``ss``
    structural similarity, common-neighbour count over the geometric mean of
    the two degrees.
``sp``
    hop distance (weights ignored).
``spw``
    ``sp - mean_edge_weight / ew_max`` along the heaviest of the minimal-hop
    paths.
``ed_in`` / ``ed_un``
    edge density inside the intersection / union of the two neighbourhoods.

The low level functions take word ids and return ``None`` for an unreachable
pair.  :func:`compute_features` works on surfaces and applies the
out-of-vocabulary / unreachable imputation policy so that every returned
vector is total.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .graph import DTGraph

FEATURE_NAMES = ("SS", "SP", "SPW", "EDin", "EDun")


class InvalidPairError(ValueError):
    """Both words of a pair are the same."""


@dataclass(frozen=True)
class FeatureConfig:
    max_hops: int = 6
    oov_policy: str = "impute"  # "impute" or "error"
    include_endpoints: bool = False

    def __post_init__(self):
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        if self.oov_policy not in ("impute", "error"):
            raise ValueError(f"unknown oov_policy {self.oov_policy!r}")

    def as_dict(self) -> dict:
        return {
            "max_hops": self.max_hops,
            "oov_policy": self.oov_policy,
            "include_endpoints": self.include_endpoints,
            "imputed_values": {"SS": 0, "SP": self.max_hops + 1, "SPW": self.max_hops + 1,
                               "EDin": 0, "EDun": 0},
        }


@dataclass(frozen=True)
class FeatureVector:
    ss: float
    sp: int
    spw: float
    ed_in: float
    ed_un: float
    pair: tuple[str, str] = ("", "")
    oov: bool = False
    reachable: bool = field(default=True, compare=False)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.ss, float(self.sp), self.spw, self.ed_in, self.ed_un)

    def tsv_row(self) -> str:
        return "\t".join(
            [self.pair[0], self.pair[1],
             f"{self.ss:.6f}", str(self.sp), f"{self.spw:.6f}",
             f"{self.ed_in:.6f}", f"{self.ed_un:.6f}", "1" if self.oov else "0"]
        )


def _check_pair(g: DTGraph, wi: int, wj: int) -> None:
    g.degree(wi)
    g.degree(wj)
    if wi == wj:
        raise InvalidPairError(f"pair uses the same word twice ({g.surface(wi)!r})")


def structural_similarity(g: DTGraph, wi: int, wj: int) -> float:
    _check_pair(g, wi, wj)
    di, dj = g.degree(wi), g.degree(wj)
    if di == 0 or dj == 0:
        return 0.0
    nc = len(g.neighbor_set(wi) & g.neighbor_set(wj))
    return nc / math.sqrt(di * dj)


def _bidirectional(g: DTGraph, s: int, t: int, max_hops: int) -> tuple[int, int] | None:
    """Return ``(hops, best_total_weight)`` over minimal-hop s-t paths, or None.

    Both searches advance one full BFS level at a time and carry, for every
    reached node, the heaviest total weight of a shortest path from their
    root.  The first level at which the frontiers touch fixes the hop count;
    every shortest path crosses that level, so maximising the sum of the two
    partial weights over the meeting nodes gives the heaviest shortest path.
    """
    if g.weight(s, t) is not None:
        return 1, g.weight(s, t)
    adj = g._wmap
    # node -> (depth, best weight from the root)
    seen = ({s: 0}, {t: 0})
    depth = [0, 0]
    frontier = [[s], [t]]
    while frontier[0] and frontier[1] and depth[0] + depth[1] < max_hops:
        # expanding the cheaper side keeps the searched ball small; the
        # result does not depend on the choice
        side = 0 if sum(len(adj[u]) for u in frontier[0]) <= sum(
            len(adj[u]) for u in frontier[1]) else 1
        own, other = seen[side], seen[1 - side]
        nxt: dict[int, int] = {}
        for u in frontier[side]:
            base = own[u]
            for v, w in adj[u].items():
                if v in own:
                    continue
                cand = base + w
                if cand > nxt.get(v, -1):
                    nxt[v] = cand
        own.update(nxt)
        depth[side] += 1
        meet = [v for v in nxt if v in other]
        if meet:
            return depth[0] + depth[1], max(nxt[v] + other[v] for v in meet)
        frontier[side] = list(nxt)
    return None


def shortest_path(g: DTGraph, wi: int, wj: int, max_hops: int = 6) -> int | None:
    """Hop distance between ``wi`` and ``wj``; None if longer than ``max_hops``."""
    _check_pair(g, wi, wj)
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    res = _bidirectional(g, wi, wj, max_hops)
    return None if res is None else res[0]


def weighted_shortest_path(g: DTGraph, wi: int, wj: int, max_hops: int = 6) -> float | None:
    """``sp - avg_weight / ew_max`` for the heaviest minimal-hop path, or None.

    Any minimal-hop path with the maximum total weight gives the same value,
    so the result is independent of how ties among such paths are broken.
    """
    _check_pair(g, wi, wj)
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    res = _bidirectional(g, wi, wj, max_hops)
    if res is None:
        return None
    hops, total = res
    return hops - total / (hops * g.ew_max)


def _density(g: DTGraph, nodes: set[int]) -> float:
    n = len(nodes)
    if n < 2:
        return 0.0
    adj = g._nbrset
    twice = 0
    for u in nodes:
        nb = adj[u]
        twice += len(nb & nodes) if len(nb) < n else sum(1 for v in nodes if v in nb)
    return (twice // 2) / (n * (n - 1) / 2)


def _neighbourhood(g: DTGraph, wi: int, wj: int, union: bool, include_endpoints: bool) -> set[int]:
    a, b = g.neighbor_set(wi), g.neighbor_set(wj)
    nodes = set(a | b) if union else set(a & b)
    if include_endpoints:
        nodes.update((wi, wj))
    else:
        nodes.discard(wi)
        nodes.discard(wj)
    return nodes


def edge_density_intersection(g: DTGraph, wi: int, wj: int, include_endpoints: bool = False) -> float:
    """Fraction of possible edges present among the common neighbours."""
    _check_pair(g, wi, wj)
    return _density(g, _neighbourhood(g, wi, wj, False, include_endpoints))


def edge_density_union(g: DTGraph, wi: int, wj: int, include_endpoints: bool = False) -> float:
    """Fraction of possible edges present among the union of the neighbourhoods."""
    _check_pair(g, wi, wj)
    return _density(g, _neighbourhood(g, wi, wj, True, include_endpoints))


def _imputed(pair: tuple[str, str], cfg: FeatureConfig, oov: bool) -> FeatureVector:
    far = cfg.max_hops + 1
    return FeatureVector(0.0, far, float(far), 0.0, 0.0, pair=pair, oov=oov, reachable=False)


def compute_features(g: DTGraph, pair: tuple[str, str], cfg: FeatureConfig = FeatureConfig()) -> FeatureVector:
    w1, w2 = pair
    if w1 == w2:
        raise InvalidPairError(f"pair uses the same word twice ({w1!r})")
    pair = (w1, w2)
    i, j = g.resolve(w1), g.resolve(w2)
    if i is None or j is None:
        if cfg.oov_policy == "error":
            missing = w1 if i is None else w2
            raise KeyError(f"word {missing!r} not in graph")
        return _imputed(pair, cfg, oov=True)
    res = _bidirectional(g, i, j, cfg.max_hops)
    if res is None:
        return _imputed(pair, cfg, oov=False)
    hops, total = res
    return FeatureVector(
        ss=structural_similarity(g, i, j),
        sp=hops,
        spw=hops - total / (hops * g.ew_max),
        ed_in=edge_density_intersection(g, i, j, cfg.include_endpoints),
        ed_un=edge_density_union(g, i, j, cfg.include_endpoints),
        pair=pair,
    )


class BatchFeatureError(ValueError):
    """One or more pairs of a batch failed; ``errors`` holds ``(index, exception)``."""

    def __init__(self, errors: list[tuple[int, Exception]]):
        self.errors = errors
        head = "; ".join(f"#{i}: {e}" for i, e in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"{len(errors)} pair(s) failed: {head}{more}")


_worker_graph: DTGraph | None = None


def _init_worker(g: DTGraph) -> None:
    global _worker_graph
    _worker_graph = g


def _run_chunk(args):
    start, pairs, cfg = args
    return _chunk(_worker_graph, start, pairs, cfg)


def _chunk(g, start, pairs, cfg):
    out, errs = [], []
    for k, p in enumerate(pairs):
        try:
            out.append(compute_features(g, tuple(p), cfg))
        except (KeyError, InvalidPairError, ValueError) as e:
            out.append(None)
            errs.append((start + k, e))
    return out, errs


def batch_features(
    g: DTGraph,
    pairs: Sequence[tuple[str, str]],
    cfg: FeatureConfig = FeatureConfig(),
    workers: int | None = None,
    chunk_size: int = 2000,
) -> list[FeatureVector]:
    """Features for every pair, in input order.

    ``workers`` > 1 distributes chunks over processes; results are identical
    to a sequential run.  Defaults to the ``DTNET_WORKERS`` environment
    variable, else 1.
    """
    if workers is None:
        workers = int(os.environ.get("DTNET_WORKERS", "1"))
    pairs = list(pairs)
    chunks = [(s, pairs[s:s + chunk_size], cfg) for s in range(0, len(pairs), chunk_size)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [_chunk(g, s, p, c) for s, p, c in chunks]
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(g,)) as ex:
            parts = list(ex.map(_run_chunk, chunks))
    out: list[FeatureVector] = []
    errors: list[tuple[int, Exception]] = []
    for vecs, errs in parts:
        out.extend(vecs)
        errors.extend(errs)
    if errors:
        raise BatchFeatureError(errors)
    return out


def write_features_tsv(vectors: Sequence[FeatureVector]) -> str:
    head = "word1\tword2\tSS\tSP\tSPW\tEDin\tEDun\toov\n"
    return head + "".join(v.tsv_row() + "\n" for v in vectors)
