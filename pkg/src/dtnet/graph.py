"""Distributional thesaurus (DT) network: loading, validation and read-only queries.

A DT network is an undirected graph over words where the weight of an edge is
the number of context features the two words share.  Graphs are read from a
tab-separated edge list::

    # comment
    cat	dog	512
    cat	mammal	130

Node ids are dense integers assigned in order of first appearance, so the same
input bytes always produce the same ids.  A loaded graph is immutable.

Memory: each edge is stored twice (once per endpoint) as a ``dict`` entry plus
one tuple slot, roughly 150 bytes per undirected edge in CPython.  A DT with
10M edges therefore needs on the order of 1.5 GB.
"""
from __future__ import annotations

import hashlib
import io
from collections.abc import Iterable, Iterator
from typing import TextIO

DEFAULT_EW_MAX = 1000


class GraphFormatError(ValueError):
    """A data line could not be parsed."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class GraphValidationError(ValueError):
    """The edge list parsed but violates a graph invariant."""


class DTGraph:
    """Immutable weighted undirected word graph.

    Use :func:`load_graph` or :meth:`from_edges` to build one.
    """

    __slots__ = ("_words", "_index", "_adj", "_wmap", "_nbrset", "ew_max", "_n_edges")

    def __init__(self, words: list[str], adjacency: list[dict[int, int]], ew_max: int):
        self._words = tuple(words)
        self._index = {w: i for i, w in enumerate(self._words)}
        self._wmap = tuple(adjacency)
        self._adj = tuple(tuple(sorted(a.items())) for a in adjacency)
        self._nbrset = tuple(frozenset(a) for a in adjacency)
        self.ew_max = ew_max
        self._n_edges = sum(len(a) for a in adjacency) // 2

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str, int]],
        ew_max: int = DEFAULT_EW_MAX,
        nodes: Iterable[str] = (),
    ) -> "DTGraph":
        """Build a graph from ``(word1, word2, weight)`` triples.

        ``nodes`` lists words to register (in order) before any edge is seen;
        it is how isolated words enter a graph.
        """
        builder = _Builder(ew_max)
        for w in nodes:
            builder.node(w)
        for k, (u, v, w) in enumerate(edges, start=1):
            builder.edge(u, v, w, k)
        return builder.build()

    # -- queries ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._words)

    @property
    def edge_count(self) -> int:
        return self._n_edges

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, surface: object) -> bool:
        return surface in self._index

    def _check(self, w: int) -> None:
        if not (isinstance(w, int) and 0 <= w < len(self._words)):
            raise KeyError(f"unknown word id {w!r}")

    def surface(self, w: int) -> str:
        self._check(w)
        return self._words[w]

    def resolve(self, surface: str) -> int | None:
        """Return the id of ``surface`` (exact, case-sensitive match) or None."""
        return self._index.get(surface)

    def neighbors(self, w: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor_id, weight)`` pairs sorted by neighbor id."""
        self._check(w)
        return self._adj[w]

    def neighbor_set(self, w: int) -> frozenset[int]:
        self._check(w)
        return self._nbrset[w]

    def degree(self, w: int) -> int:
        self._check(w)
        return len(self._adj[w])

    def weight(self, u: int, v: int) -> int | None:
        """Weight of edge u-v, or None when absent."""
        self._check(u)
        self._check(v)
        return self._wmap[u].get(v)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Each undirected edge once as ``(u, v, weight)`` with u < v."""
        for u, adj in enumerate(self._adj):
            for v, w in adj:
                if u < v:
                    yield u, v, w

    def max_weight(self) -> int:
        return max((w for _, _, w in self.edges()), default=0)

    # -- export / identity -----------------------------------------------

    def to_tsv(self) -> str:
        """Canonical edge list: one line per edge, smaller surface first, lines sorted."""
        rows = []
        for u, v, w in self.edges():
            a, b = self._words[u], self._words[v]
            if b < a:
                a, b = b, a
            rows.append((a, b, w))
        rows.sort()
        return "".join(f"{a}\t{b}\t{w}\n" for a, b, w in rows)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical TSV plus ew_max; independent of id assignment."""
        h = hashlib.sha256(f"ew_max={self.ew_max}\n".encode())
        h.update(self.to_tsv().encode("utf-8"))
        return h.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DTGraph):
            return NotImplemented
        return (
            self.ew_max == other.ew_max
            and set(self._words) == set(other._words)
            and self.to_tsv() == other.to_tsv()
        )

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return f"DTGraph(nodes={self.node_count}, edges={self.edge_count}, ew_max={self.ew_max})"

    def __getstate__(self):
        return (list(self._words), [dict(a) for a in self._wmap], self.ew_max)

    def __setstate__(self, state):
        words, adjacency, ew_max = state
        DTGraph.__init__(self, words, adjacency, ew_max)


class _Builder:
    def __init__(self, ew_max: int):
        if not isinstance(ew_max, int) or ew_max <= 0:
            raise ValueError(f"ew_max must be a positive integer, got {ew_max!r}")
        self.ew_max = ew_max
        self.words: list[str] = []
        self.index: dict[str, int] = {}
        self.adj: list[dict[int, int]] = []

    def node(self, surface: str) -> int:
        i = self.index.get(surface)
        if i is None:
            i = len(self.words)
            self.index[surface] = i
            self.words.append(surface)
            self.adj.append({})
        return i

    def edge(self, a: str, b: str, w: int, lineno: int) -> None:
        if a == b:
            raise GraphValidationError(f"line {lineno}: self-loop on {a!r}")
        if not 0 < w <= self.ew_max:
            raise GraphValidationError(
                f"line {lineno}: weight {w} of {a!r}-{b!r} outside (0, {self.ew_max}]"
            )
        u, v = self.node(a), self.node(b)
        old = self.adj[u].get(v)
        if old is not None:
            if old != w:
                raise GraphValidationError(
                    f"line {lineno}: edge {a!r}-{b!r} repeated with weight {w} (was {old})"
                )
            return
        self.adj[u][v] = w
        self.adj[v][u] = w

    def build(self) -> DTGraph:
        return DTGraph(self.words, self.adj, self.ew_max)


def _parse_lines(source: TextIO) -> Iterator[tuple[int, str, str, int]]:
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise GraphFormatError(lineno, f"expected 3 tab-separated fields, got {len(parts)}")
        a, b, ws = parts
        if not a or not b:
            raise GraphFormatError(lineno, "empty word")
        try:
            w = int(ws)
        except ValueError:
            raise GraphFormatError(lineno, f"weight {ws!r} is not an integer") from None
        yield lineno, a, b, w


def load_graph(
    source: TextIO | str,
    ew_max: int = DEFAULT_EW_MAX,
    top_k: int | None = None,
) -> DTGraph:
    """Read a DT edge list and return a validated :class:`DTGraph`.

    ``source`` is an open text stream or a path.  ``top_k`` optionally keeps,
    for every word, only its ``top_k`` heaviest edges (ties broken by first
    appearance); an edge survives if either endpoint keeps it.

    Raises :class:`GraphFormatError` for unparsable lines and
    :class:`GraphValidationError` for self-loops, out-of-range weights and
    duplicate edges whose weights disagree.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return load_graph(fh, ew_max=ew_max, top_k=top_k)
    builder = _Builder(ew_max)
    for lineno, a, b, w in _parse_lines(source):
        builder.edge(a, b, w, lineno)
    if top_k is not None:
        _truncate(builder, top_k)
    return builder.build()


def _truncate(builder: _Builder, top_k: int) -> None:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    keep: list[set[int]] = []
    for adj in builder.adj:
        # dicts keep insertion order, so the stable sort breaks ties by appearance
        ranked = sorted(adj.items(), key=lambda kv: -kv[1])
        keep.append({v for v, _ in ranked[:top_k]})
    for u, adj in enumerate(builder.adj):
        builder.adj[u] = {v: w for v, w in adj.items() if v in keep[u] or u in keep[v]}


def loads_graph(text: str, ew_max: int = DEFAULT_EW_MAX, top_k: int | None = None) -> DTGraph:
    """:func:`load_graph` on an in-memory string."""
    return load_graph(io.StringIO(text), ew_max=ew_max, top_k=top_k)
