"""Streams, tuples, join graphs and probe sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

Scalar = Union[int, str]


class ConfigError(ValueError):
    """Invalid graph, order table or experiment configuration."""


class MalformedTupleError(ValueError):
    """A tuple is missing a join attribute or targets an unknown stream."""


@dataclass(slots=True)
class Tuple:
    stream: int
    key_values: dict[str, Scalar]
    payload: bytes = b""
    event_time: int = 0


@dataclass(frozen=True)
class JoinEdge:
    a: int
    b: int
    attr_a: str
    attr_b: str

    def attr_of(self, stream: int) -> str:
        if stream == self.a:
            return self.attr_a
        if stream == self.b:
            return self.attr_b
        raise KeyError(stream)


@dataclass(frozen=True)
class ProbePair:
    """Directed probe step: bindings of ``l`` look up matches in ``r``'s state."""

    l: int
    r: int
    edge: JoinEdge = field(compare=False, hash=False, repr=False)

    @property
    def attr_l(self) -> str:
        return self.edge.attr_of(self.l)

    @property
    def attr_r(self) -> str:
        return self.edge.attr_of(self.r)

    def key(self) -> tuple[int, int]:
        return (self.l, self.r)


@dataclass(frozen=True)
class ProbeSequence:
    start: int
    pairs: tuple[ProbePair, ...]

    def keys(self) -> tuple[tuple[int, int], ...]:
        return tuple(p.key() for p in self.pairs)

    def __str__(self) -> str:
        body = ",".join(f"<{p.l},{p.r}>" for p in self.pairs)
        return f"{self.start}:[{body}]"


class JoinGraph:
    """Streams as nodes ``0..n-1``, equi-join predicates as undirected edges.

    At most one edge may connect a given pair of streams; composite keys are
    not supported.
    """

    def __init__(self, n: int, edges: Iterable[JoinEdge], names: Sequence[str] | None = None):
        self.n = int(n)
        self.edges: tuple[JoinEdge, ...] = tuple(edges)
        if names is None:
            names = [str(i) for i in range(self.n)]
        self.names: tuple[str, ...] = tuple(names)
        self._check()
        self._by_pair: dict[tuple[int, int], JoinEdge] = {}
        for e in self.edges:
            self._by_pair[(e.a, e.b)] = e
            self._by_pair[(e.b, e.a)] = e
        self._pairs = tuple(
            ProbePair(l, r, self._by_pair[(l, r)]) for (l, r) in sorted(self._by_pair)
        )

    def _check(self) -> None:
        if self.n < 2:
            raise ConfigError("a join graph needs at least 2 streams")
        if len(self.names) != self.n or len(set(self.names)) != self.n:
            raise ConfigError("stream names must be unique, one per stream")
        seen = set()
        for e in self.edges:
            if not (0 <= e.a < self.n and 0 <= e.b < self.n):
                raise ConfigError(f"edge {e} references an unknown stream")
            if e.a == e.b:
                raise ConfigError(f"self-join edge {e} is not allowed")
            k = frozenset((e.a, e.b))
            if k in seen:
                raise ConfigError(f"duplicate edge between streams {e.a} and {e.b}")
            seen.add(k)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]], attr: str = "key",
                   names: Sequence[str] | None = None) -> "JoinGraph":
        """Graph whose edges all join on one shared attribute name."""
        return cls(n, [JoinEdge(a, b, attr, attr) for a, b in pairs], names)

    @classmethod
    def star(cls, n: int, center: int = 0, attr: str = "key",
             names: Sequence[str] | None = None) -> "JoinGraph":
        return cls.from_pairs(n, [(center, i) for i in range(n) if i != center], attr, names)

    @classmethod
    def path(cls, n: int, attr: str = "key", names: Sequence[str] | None = None) -> "JoinGraph":
        return cls.from_pairs(n, [(i, i + 1) for i in range(n - 1)], attr, names)

    @property
    def pairs(self) -> tuple[ProbePair, ...]:
        """All directed probe pairs, sorted by ``(l, r)``."""
        return self._pairs

    def pair(self, l: int, r: int) -> ProbePair:
        try:
            return ProbePair(l, r, self._by_pair[(l, r)])
        except KeyError:
            raise ConfigError(f"streams {l} and {r} are not joined") from None

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self._by_pair

    def edge_between(self, a: int, b: int) -> JoinEdge | None:
        return self._by_pair.get((a, b))

    def neighbors(self, i: int) -> list[int]:
        return sorted(r for (l, r) in self._by_pair if l == i)

    def is_connected(self) -> bool:
        seen = {0}
        todo = [0]
        while todo:
            i = todo.pop()
            for j in self.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == self.n

    def join_attrs(self, stream: int) -> list[str]:
        """Distinct attribute names stream ``stream`` joins on, in edge order."""
        out: list[str] = []
        for e in self.edges:
            for s, a in ((e.a, e.attr_a), (e.b, e.attr_b)):
                if s == stream and a not in out:
                    out.append(a)
        return out

    def closure(self) -> "JoinGraph":
        """Add the edges implied by transitivity of key equality.

        Two streams whose join attributes fall in the same equivalence class
        (via chains of edges) become directly joinable.
        """
        parent: dict[tuple[int, str], tuple[int, str]] = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            parent[find((e.a, e.attr_a))] = find((e.b, e.attr_b))
        classes: dict[tuple[int, str], list[tuple[int, str]]] = {}
        for node in list(parent):
            classes.setdefault(find(node), []).append(node)
        edges = list(self.edges)
        for members in classes.values():
            members.sort()
            for i, (a, attr_a) in enumerate(members):
                for b, attr_b in members[i + 1:]:
                    if a != b and not any(frozenset((e.a, e.b)) == frozenset((a, b)) for e in edges):
                        edges.append(JoinEdge(a, b, attr_a, attr_b))
        return JoinGraph(self.n, edges, self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigError(f"unknown stream name {name!r}") from None

    def sequence(self, start: int, pairs: Iterable[tuple[int, int]]) -> ProbeSequence:
        """Build a ProbeSequence from plain ``(l, r)`` tuples."""
        return ProbeSequence(start, tuple(self.pair(l, r) for l, r in pairs))

    def __repr__(self) -> str:
        es = ", ".join(f"{self.names[e.a]}-{self.names[e.b]}" for e in self.edges)
        return f"JoinGraph(n={self.n}, edges=[{es}])"


def validate_sequence(g: JoinGraph, s: ProbeSequence) -> bool:
    """True iff ``s`` starts at its start stream and visits every stream once."""
    if not 0 <= s.start < g.n:
        return False
    if len(s.pairs) != g.n - 1:
        return False
    visited = {s.start}
    for p in s.pairs:
        if p.l not in visited or p.r in visited:
            return False
        if not g.has_edge(p.l, p.r):
            return False
        visited.add(p.r)
    return len(visited) == g.n


class ProbeOrderTable(tuple):
    """One ProbeSequence per stream, indexed by stream id."""

    def __new__(cls, orders: Iterable[ProbeSequence]):
        return super().__new__(cls, tuple(orders))

    def validate(self, g: JoinGraph) -> None:
        if len(self) != g.n:
            raise ConfigError(f"order table has {len(self)} entries for {g.n} streams")
        for i, seq in enumerate(self):
            if seq.start != i:
                raise ConfigError(f"order for stream {i} starts at {seq.start}")
            if not validate_sequence(g, seq):
                raise ConfigError(f"invalid probe sequence {seq}")
