"""
Relation algebra for orders on [n] = {1, ..., n}.

Orders are stored strictly (a < b only) as transitively closed bitset rows:
``rows[a - 1]`` has bit ``b - 1`` set iff a < b. Labels are 1-based everywhere
in the public API.
"""

import heapq
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

import networkx as nx
import numpy as np

from .errors import CyclicInput, InvariantViolation, OutOfRange, SelfLoop, SizeMismatch

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def _validate_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")


def _check_edge(n, u, v):
    for label in (u, v):
        if isinstance(label, bool) or not isinstance(label, (int, np.integer)):
            raise OutOfRange(f"vertex label {label!r} is not an integer")
        if not 1 <= label <= n:
            raise OutOfRange(f"vertex label {label} outside 1..{n}")
    if u == v:
        raise SelfLoop(f"self-loop on vertex {u}")


def _close(n, rows):
    """Warshall closure over bitset rows (0-based bits)."""
    rows = list(rows)
    for k in range(n):
        bit = 1 << k
        row_k = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= row_k
    return rows


def _has_cycle(rows):
    return any(row >> i & 1 for i, row in enumerate(rows))


def _pairs_of(rows):
    pairs = []
    for a, row in enumerate(rows):
        b = 0
        while row:
            if row & 1:
                pairs.append((a + 1, b + 1))
            row >>= 1
            b += 1
    return tuple(pairs)


@dataclass(frozen=True)
class DirectedGraph:
    """Labelled digraph on [n]; no self-loops, duplicate-free edges."""

    n: int
    edges: frozenset

    def __post_init__(self):
        _validate_n(self.n)
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            _check_edge(self.n, u, v)
        object.__setattr__(self, "edges", edges)

    def __len__(self):
        return len(self.edges)

    @cached_property
    def rows(self):
        rows = [0] * self.n
        for u, v in self.edges:
            rows[u - 1] |= 1 << (v - 1)
        return tuple(rows)

    def sorted_edges(self):
        return sorted(self.edges)

    def to_networkx(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(range(1, self.n + 1))
        graph.add_edges_from(self.sorted_edges())
        return graph


@dataclass(frozen=True)
class OrderRelation:
    """A strict partial order on [n], transitively closed."""

    n: int
    rows: Tuple[int, ...]

    def __post_init__(self):
        _validate_n(self.n)
        rows = tuple(int(r) for r in self.rows)
        if len(rows) != self.n:
            raise InvariantViolation(f"expected {self.n} rows, got {len(rows)}")
        full = (1 << self.n) - 1
        for a, row in enumerate(rows):
            if row < 0 or row & ~full:
                raise InvariantViolation(f"row {a + 1} references labels outside 1..{self.n}")
            if row >> a & 1:
                raise InvariantViolation(f"relation is not irreflexive at {a + 1}")
        for a, b in _pairs_of(rows):
            if rows[b - 1] >> (a - 1) & 1:
                raise InvariantViolation(f"relation is not antisymmetric on ({a}, {b})")
        if tuple(_close(self.n, rows)) != rows:
            raise InvariantViolation("relation is not transitively closed")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def _trusted(cls, n, rows):
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "rows", tuple(rows))
        return obj

    @classmethod
    def empty(cls, n):
        _validate_n(n)
        return cls._trusted(n, (0,) * n)

    @classmethod
    def from_pairs(cls, n, pairs):
        """Close generator pairs into an order."""
        return transitive_closure(from_edge_list(n, pairs))

    @property
    def relation(self):
        return self

    def less(self, a, b):
        return bool(self.rows[a - 1] >> (b - 1) & 1)

    @cached_property
    def pairs(self):
        return _pairs_of(self.rows)

    @cached_property
    def edge_count(self):
        return sum(bin(row).count("1") for row in self.rows)

    @cached_property
    def bits(self):
        # row-major: bit (a-1)*n + (b-1) is set iff a < b
        bits = 0
        for a, row in enumerate(self.rows):
            bits |= row << (a * self.n)
        return bits

    @property
    def is_total(self):
        return self.edge_count == self.n * (self.n - 1) // 2

    def sort_key(self):
        return (self.edge_count, self.bits)

    def as_graph(self):
        return DirectedGraph(self.n, frozenset(self.pairs))

    def matrix(self):
        m = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.pairs:
            m[a - 1, b - 1] = True
        return m

    def __str__(self):
        if not self.pairs:
            return "∅"
        return "{" + ", ".join(f"{a}<{b}" for a, b in self.pairs) + "}"


@dataclass(frozen=True)
class TotalOrder:
    """A permutation of [n]; ``seq[i]`` is the (i+1)-th smallest element."""

    seq: Tuple[int, ...]

    def __post_init__(self):
        seq = tuple(int(v) for v in self.seq)
        if not seq:
            raise OutOfRange("a total order needs n >= 1 elements")
        if sorted(seq) != list(range(1, len(seq) + 1)):
            raise InvariantViolation(f"{list(seq)} is not a permutation of 1..{len(seq)}")
        object.__setattr__(self, "seq", seq)

    @property
    def n(self):
        return len(self.seq)

    @cached_property
    def positions(self):
        pos = [0] * self.n
        for i, v in enumerate(self.seq):
            pos[v - 1] = i
        return tuple(pos)

    def precedes(self, a, b):
        return self.positions[a - 1] < self.positions[b - 1]

    @cached_property
    def relation(self):
        rows = [0] * self.n
        for i, a in enumerate(self.seq):
            for b in self.seq[i + 1:]:
                rows[a - 1] |= 1 << (b - 1)
        return OrderRelation._trusted(self.n, rows)

    @property
    def bits(self):
        return self.relation.bits

    @property
    def is_total(self):
        return True

    def __str__(self):
        sep = "" if self.n < 10 else "-"
        return sep.join(str(v) for v in self.seq)


Order = Union[OrderRelation, TotalOrder]


def _same_n(a, b):
    if a.n != b.n:
        raise SizeMismatch(f"orders live on different ground sets ({a.n} vs {b.n})")


def from_edge_list(n, pairs: Iterable[Edge]) -> DirectedGraph:
    """Build a digraph; duplicates collapse, self-loops are rejected."""
    _validate_n(n)
    edges = []
    for pair in pairs:
        u, v = pair
        _check_edge(n, u, v)
        edges.append((int(u), int(v)))
    return DirectedGraph(n, frozenset(edges))


def is_acyclic(g: DirectedGraph) -> bool:
    return not _has_cycle(_close(g.n, g.rows))


def transitive_closure(g: DirectedGraph) -> OrderRelation:
    closed = _close(g.n, g.rows)
    if _has_cycle(closed):
        raise CyclicInput(f"graph on {g.n} vertices has a directed cycle")
    return OrderRelation._trusted(g.n, closed)


def union(a: Order, b: Order) -> DirectedGraph:
    _same_n(a, b)
    return DirectedGraph(a.n, frozenset(a.relation.pairs) | frozenset(b.relation.pairs))


def compatible(a: Order, b: Order) -> bool:
    """True iff the union of both relations is acyclic."""
    _same_n(a, b)
    ra, rb = a.relation, b.relation
    # against a total order the only compatible orders are its sub-relations
    if ra.is_total:
        return rb.bits & ~ra.bits == 0
    if rb.is_total:
        return ra.bits & ~rb.bits == 0
    rows = [x | y for x, y in zip(ra.rows, rb.rows)]
    return not _has_cycle(_close(ra.n, rows))


def topological_sort(g: DirectedGraph, rng: Optional[np.random.Generator] = None) -> TotalOrder:
    """
    Kahn's algorithm. Without ``rng`` the smallest ready label is always
    emitted first; with ``rng`` ties are broken uniformly at random.
    """
    indegree = [0] * (g.n + 1)
    successors = {v: [] for v in range(1, g.n + 1)}
    for u, v in g.sorted_edges():
        successors[u].append(v)
        indegree[v] += 1

    ready = [v for v in range(1, g.n + 1) if indegree[v] == 0]
    out = []
    while ready:
        if rng is None:
            v = heapq.heappop(ready)
        else:
            v = ready.pop(int(rng.integers(len(ready))))
        out.append(v)
        for w in successors[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                if rng is None:
                    heapq.heappush(ready, w)
                else:
                    ready.append(w)

    if len(out) < g.n:
        raise CyclicInput(f"graph on {g.n} vertices has a directed cycle")
    return TotalOrder(tuple(out))


def linear_extension(order: Order, rng: Optional[np.random.Generator] = None) -> TotalOrder:
    return topological_sort(order.relation.as_graph(), rng=rng)


def contradicts(t: TotalOrder, e: Edge) -> bool:
    """True iff ``t`` places the head of ``e`` before its tail."""
    u, v = e
    _check_edge(t.n, u, v)
    return t.precedes(v, u)


def reversed_edge(e: Edge) -> Edge:
    return (e[1], e[0])
