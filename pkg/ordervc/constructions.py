"""
Explicit shattered-set constructions and the upper-bound proof checker.

Three constructions on [n]:

* ``thm1``  -- the floor(n^2/4) total orders A_{i,j}, each a topological sort
  of all forward bipartite edges i -> j with the edge (i, j) reversed.
* ``thm2h`` -- 2(n-3) parts on vertices w_1..w_n: paths w_1 -> w_i -> w_2 and
  single edges w_3 -> w_i, for 4 <= i <= n.
* ``thm2g`` -- 3(floor(n/2)-1) parts on u_1..u_{k+2}, v_3..v_k (k = floor(n/2)),
  with label n isolated when n is odd.

For the two graph families the ground elements are the transitive closures of
the parts, and a witness for a selected subset is any linear extension of the
graph obtained by flipping one edge of every selected part and deleting that
part's other edges (property (*)).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .enumeration import FamilySpec
from .errors import (
    CapExceeded,
    InvariantViolation,
    NoContradictionEdge,
    NotShattered,
    OutOfRange,
    StrategyFailure,
    TooSmall,
)
from .order_core import (
    DirectedGraph,
    Edge,
    OrderRelation,
    TotalOrder,
    from_edge_list,
    is_acyclic,
    reversed_edge,
    topological_sort,
    transitive_closure,
)
from .shattering import is_shattered, trace

logger = logging.getLogger(__name__)

EXHAUSTIVE_PART_CAP = 20


class ConstructionKind(str, Enum):
    THM1_LOWER = "thm1"
    THM2_G = "thm2g"
    THM2_H = "thm2h"


class FlipStrategy(str, Enum):
    LITERAL = "literal"
    WINDOW = "window"


@dataclass(frozen=True)
class PartRole:
    """
    kind: ``edge`` (thm1), ``single`` edges (``chain``/``pendant``), or a
    two-edge path through ``hub`` (``path``/``chain_start``/``chain_end``).
    ``partner`` is the single-edge part a path is paired with.
    """

    kind: str
    hub: Optional[int] = None
    partner: Optional[int] = None

    @property
    def is_path(self):
        return self.hub is not None


@dataclass(frozen=True)
class ConstructionFamily:
    n: int
    kind: ConstructionKind
    parts: Tuple[DirectedGraph, ...]
    labels: Tuple[str, ...]
    roles: Tuple[PartRole, ...]
    vertex_map: Mapping[str, int] = field(default_factory=dict)
    k: Optional[int] = None
    source: Optional[int] = None
    sink: Optional[int] = None
    pairs: Tuple[Tuple[int, int], ...] = ()

    def __len__(self):
        return len(self.parts)

    @cached_property
    def closed_parts(self) -> Tuple[OrderRelation, ...]:
        return tuple(transitive_closure(p) for p in self.parts)

    def union_graph(self) -> DirectedGraph:
        edges = frozenset().union(*(p.edges for p in self.parts)) if self.parts else frozenset()
        return DirectedGraph(self.n, edges)

    def vertex_name(self, label):
        for name, value in self.vertex_map.items():
            if value == label:
                return name
        return str(label)

    def label_index(self, label):
        return self.labels.index(label)


class FlipWitness(NamedTuple):
    graph: DirectedGraph
    order: TotalOrder
    used_fallback: bool = False


def vc_total_by_partial(n):
    """Exact VC-dimension of all partial orders over all total orders on [n]."""
    return 3 if n == 3 else n * n // 4


# exhaustive level-wise search results for all total orders over all partial orders
PARTIAL_BY_TOTAL_EXACT = {1: 0, 2: 1, 3: 2, 4: 3}


def vc_partial_by_total_bounds(n):
    """(lower, upper) bounds for all total orders over all partial orders on [n]."""
    lower = max(0, 2 * (n - 3), 3 * (n // 2 - 1))
    upper = int(math.floor(math.log2(math.factorial(n)) + 1e-9))
    return lower, upper


# -- thm1 --------------------------------------------------------------------

def _require(n, minimum=4):
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")
    if n < minimum:
        raise TooSmall(f"the construction needs n >= {minimum}, got n = {n}")


def thm1_pairs(n) -> List[Tuple[int, int]]:
    k = n // 2
    return [(i, j) for i in range(1, k + 1) for j in range(k + 1, n + 1)]


def thm1_family(n) -> ConstructionFamily:
    _require(n)
    pairs = tuple(thm1_pairs(n))
    return ConstructionFamily(
        n=n,
        kind=ConstructionKind.THM1_LOWER,
        parts=tuple(DirectedGraph(n, frozenset([p])) for p in pairs),
        labels=tuple(f"e_{i},{j}" for i, j in pairs),
        roles=tuple(PartRole("edge") for _ in pairs),
        vertex_map={str(v): v for v in range(1, n + 1)},
        k=n // 2,
        pairs=pairs,
    )


def _thm1_orders(fam: ConstructionFamily, rng=None) -> List[TotalOrder]:
    orders = []
    for pair in fam.pairs:
        edges = [p for p in fam.pairs if p != pair] + [reversed_edge(pair)]
        orders.append(topological_sort(from_edge_list(fam.n, edges), rng=rng))
    return orders


def thm1_shattered_set(n, rng: Optional[np.random.Generator] = None):
    """
    The family of singleton edge graphs {e_{i,j}} and the orders A_{i,j}, pairs
    row-major in (i, j). ``rng`` randomises topological tie-breaking.
    """
    fam = thm1_family(n)
    return fam, _thm1_orders(fam, rng=rng)


def thm1_witness(n, chosen) -> OrderRelation:
    """Closure of the forward edges e_{i,j} of the chosen pairs."""
    _require(n)
    valid = set(thm1_pairs(n))
    chosen = [tuple(p) for p in chosen]
    for pair in chosen:
        if pair not in valid:
            raise OutOfRange(f"pair {pair} is not a bipartite pair for n = {n}")
    return transitive_closure(from_edge_list(n, chosen))


# -- thm2 families ----------------------------------------------------------

def thm2_h_family(n) -> ConstructionFamily:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")
    vertex_map = {f"w{i}": i for i in range(1, n + 1)}
    if n < 4:
        return ConstructionFamily(n, ConstructionKind.THM2_H, (), (), (), vertex_map, None, 1, 2)
    m = n - 3
    parts, labels, roles = [], [], []
    for i in range(4, n + 1):
        parts.append(DirectedGraph(n, frozenset([(1, i), (i, 2)])))
        roles.append(PartRole("path", hub=i, partner=m + (i - 4)))
    for i in range(4, n + 1):
        parts.append(DirectedGraph(n, frozenset([(3, i)])))
        roles.append(PartRole("pendant"))
    labels = [f"H_{idx}" for idx in range(1, 2 * m + 1)]
    return ConstructionFamily(
        n=n,
        kind=ConstructionKind.THM2_H,
        parts=tuple(parts),
        labels=tuple(labels),
        roles=tuple(roles),
        vertex_map=vertex_map,
        source=1,
        sink=2,
    )


def thm2_g_family(n) -> ConstructionFamily:
    """
    u_i -> i for 1 <= i <= k+2, v_j -> k + j for 3 <= j <= k, and label n is
    isolated when n is odd.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")
    if n < 4:
        return ConstructionFamily(n, ConstructionKind.THM2_G, (), (), (), {}, None)
    k = n // 2
    u = {i: i for i in range(1, k + 3)}
    v = {j: k + j for j in range(3, k + 1)}
    vertex_map = {f"u{i}": label for i, label in u.items()}
    vertex_map.update({f"v{j}": label for j, label in v.items()})
    if n % 2:
        vertex_map["isolated"] = n
    top = u[k + 2]

    parts, roles = [], []

    def add(edges, role):
        parts.append(DirectedGraph(n, frozenset(edges)))
        roles.append(role)

    add([(u[1], u[2]), (u[2], top)], PartRole("chain_start", hub=u[2]))
    for i in range(2, k + 1):
        add([(u[i], u[i + 1])], PartRole("chain"))
    add([(u[1], u[k + 1]), (u[k + 1], top)], PartRole("chain_end", hub=u[k + 1]))
    first_pendant = 2 * k - 1
    for j in range(3, k + 1):
        add([(u[1], v[j]), (v[j], top)], PartRole("path", hub=v[j], partner=first_pendant + (j - 3)))
    for j in range(3, k + 1):
        add([(u[j], v[j])], PartRole("pendant"))

    return ConstructionFamily(
        n=n,
        kind=ConstructionKind.THM2_G,
        parts=tuple(parts),
        labels=tuple(f"G_{idx}" for idx in range(1, len(parts) + 1)),
        roles=tuple(roles),
        vertex_map=vertex_map,
        k=k,
        source=u[1],
        sink=top,
    )


def build_family(which, n) -> ConstructionFamily:
    which = ConstructionKind(which)
    if which == ConstructionKind.THM1_LOWER:
        return thm1_family(n)
    if which == ConstructionKind.THM2_H:
        return thm2_h_family(n)
    return thm2_g_family(n)


# -- flipping strategies ----------------------------------------------------

def _single_edge(part):
    (edge,) = part.edges
    return edge


def _literal_choice(fam, selected) -> Dict[int, Edge]:
    s, t = fam.source, fam.sink
    chain_selected = any(fam.roles[i].kind == "chain" for i in selected)
    choice = {}
    for i in selected:
        role = fam.roles[i]
        if not role.is_path:
            choice[i] = _single_edge(fam.parts[i])
        elif role.kind == "path":
            choice[i] = (s, role.hub) if role.partner in selected else (role.hub, t)
        elif role.kind == "chain_start":
            choice[i] = (role.hub, t) if chain_selected else (s, role.hub)
        else:
            choice[i] = (s, role.hub) if chain_selected else (role.hub, t)
    return choice


def _window_choice(fam, selected) -> Dict[int, Edge]:
    """
    Orient the single-edge parts first. A selected path goes in front of the
    source when its hub has no incoming single edge, behind the sink otherwise.
    """
    s, t = fam.source, fam.sink
    incoming, outgoing = set(), set()
    for i, role in enumerate(fam.roles):
        if role.is_path:
            continue
        u, v = _single_edge(fam.parts[i])
        if i in selected:
            u, v = v, u
        outgoing.add(u)
        incoming.add(v)
    choice = {}
    for i in selected:
        role = fam.roles[i]
        if not role.is_path:
            choice[i] = _single_edge(fam.parts[i])
        elif role.hub not in incoming:
            choice[i] = (s, role.hub)
        elif role.hub not in outgoing:
            choice[i] = (role.hub, t)
        else:
            raise StrategyFailure(f"hub {role.hub} of {fam.labels[i]} has single edges both ways")
    return choice


def _flipped_graph(fam, selected, choice) -> DirectedGraph:
    edges = set()
    for i, part in enumerate(fam.parts):
        if i in selected:
            edges.add(reversed_edge(choice[i]))
        else:
            edges.update(part.edges)
    return DirectedGraph(fam.n, frozenset(edges))


def _brute_force_choice(fam, selected) -> Optional[Dict[int, Edge]]:
    ordered = sorted(selected)
    options = [fam.parts[i].sorted_edges() for i in ordered]
    for picks in product(*options):
        choice = dict(zip(ordered, picks))
        if is_acyclic(_flipped_graph(fam, selected, choice)):
            return choice
    return None


def thm2_witness(
    fam: ConstructionFamily,
    selected,
    strategy: FlipStrategy = FlipStrategy.LITERAL,
    fallback: bool = True,
    rng: Optional[np.random.Generator] = None,
) -> FlipWitness:
    """
    Flip one edge of each selected part (0-based indices), keep the other
    parts, and return the graph with its topological sort. The sort is
    incompatible with exactly the closed selected parts.
    """
    if fam.kind not in (ConstructionKind.THM2_G, ConstructionKind.THM2_H):
        raise InvariantViolation(f"{fam.kind.value} has no flipping strategy")
    selected = frozenset(int(i) for i in selected)
    for i in selected:
        if not 0 <= i < len(fam.parts):
            raise OutOfRange(f"part index {i} outside 0..{len(fam.parts) - 1}")

    strategy = FlipStrategy(strategy)
    try:
        if strategy == FlipStrategy.LITERAL:
            choice = _literal_choice(fam, selected)
        else:
            choice = _window_choice(fam, selected)
        graph = _flipped_graph(fam, selected, choice)
        if not is_acyclic(graph):
            cycle = nx.find_cycle(graph.to_networkx())
            raise StrategyFailure(
                f"{strategy.value} strategy leaves cycle {cycle} for "
                f"{[fam.labels[i] for i in sorted(selected)]}"
            )
    except StrategyFailure as exc:
        if not fallback:
            raise
        logger.warning("%s (n = %d); trying brute-force flips", exc, fam.n)
        choice = _brute_force_choice(fam, selected)
        if choice is None:
            raise StrategyFailure(
                f"no acyclic flip exists for {[fam.labels[i] for i in sorted(selected)]}"
            ) from exc
        graph = _flipped_graph(fam, selected, choice)
        return FlipWitness(graph, topological_sort(graph, rng=rng), True)
    return FlipWitness(graph, topological_sort(graph, rng=rng), False)


# -- property (*) ------------------------------------------------------------

@dataclass(frozen=True)
class StarMode:
    kind: str = "exhaustive"
    count: int = 0
    seed: Optional[int] = None

    @classmethod
    def exhaustive(cls):
        return cls("exhaustive")

    @classmethod
    def sampled(cls, count, seed=None):
        if count < 1:
            raise OutOfRange(f"sample count must be >= 1, got {count}")
        return cls("sampled", count, seed)

    def masks(self, parts):
        if self.kind == "exhaustive":
            if parts > EXHAUSTIVE_PART_CAP:
                raise CapExceeded(
                    f"exhaustive mode is capped at {EXHAUSTIVE_PART_CAP} parts, family has {parts}"
                )
            return list(range(1 << parts))
        rng = np.random.default_rng(self.seed)
        bits = rng.integers(0, 2, size=(self.count, parts), dtype=np.int64)
        if parts <= 62:
            return [int(m) for m in bits @ (np.int64(1) << np.arange(parts, dtype=np.int64))]
        return [sum(int(b) << i for i, b in enumerate(row)) for row in bits]


@dataclass(frozen=True)
class StarFailure:
    mask: int
    reason: str


@dataclass
class StarReport:
    kind: str
    n: int
    parts: int
    mode: str
    strategy: str
    tested: int = 0
    failures: List[StarFailure] = field(default_factory=list)
    fallbacks: int = 0
    fallback_masks: List[int] = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "parts": self.parts,
            "mode": self.mode,
            "strategy": self.strategy,
            "tested": self.tested,
            "failures": [vars(f) for f in self.failures],
            "fallbacks": self.fallbacks,
            "fallback_masks": self.fallback_masks[:20],
        }


def _check_mask(fam, ground, mask, strategy):
    """(failure reason or None, used fallback)."""
    m = len(fam.parts)
    selected = [i for i in range(m) if mask >> i & 1]
    expected = ((1 << m) - 1) ^ mask
    if fam.kind == ConstructionKind.THM1_LOWER:
        witness = thm1_witness(fam.n, [fam.pairs[i] for i in selected])
        got = trace(witness, ground)
        if got != expected:
            return f"witness {witness} traces {got}, expected {expected}", False
        return None, False
    try:
        flip = thm2_witness(fam, selected, strategy=strategy)
    except StrategyFailure as exc:
        return str(exc), True
    if not is_acyclic(flip.graph):
        return "flipped graph is cyclic", flip.used_fallback
    got = trace(flip.order, ground)
    if got != expected:
        return f"witness {flip.order} traces {got}, expected {expected}", flip.used_fallback
    return None, flip.used_fallback


def verify_property_star(
    fam: ConstructionFamily,
    mode: StarMode = StarMode.exhaustive(),
    strategy: FlipStrategy = FlipStrategy.LITERAL,
    threads: int = 1,
    ground: Optional[Sequence[TotalOrder]] = None,
) -> StarReport:
    """
    Check the complement-trace law on every tested subset. ``ground`` overrides
    the thm1 order list (e.g. a randomised tie-break run).
    """
    strategy = FlipStrategy(strategy)
    masks = mode.masks(len(fam.parts))
    if fam.kind == ConstructionKind.THM1_LOWER:
        ground = list(ground) if ground is not None else _thm1_orders(fam)
    else:
        ground = list(fam.closed_parts)

    report = StarReport(fam.kind.value, fam.n, len(fam.parts), mode.kind, strategy.value)

    def run(block):
        return [(mask, *_check_mask(fam, ground, mask, strategy)) for mask in block]

    chunk = max(1, len(masks) // max(1, threads * 4))
    blocks = [masks[i:i + chunk] for i in range(0, len(masks), chunk)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(block) for block in blocks]

    for block in results:
        for mask, reason, used_fallback in block:
            report.tested += 1
            if used_fallback:
                report.fallbacks += 1
                report.fallback_masks.append(mask)
            if reason is not None:
                report.failures.append(StarFailure(mask, reason))

    logger.info(
        "property (*) %s n=%d: %d subsets, %d failures, %d fallbacks",
        fam.kind.value, fam.n, report.tested, len(report.failures), report.fallbacks,
    )
    return report


# -- upper-bound proof checker ----------------------------------------------

@dataclass(frozen=True)
class EdgeAssignment:
    order: TotalOrder
    edge: Edge
    witness: OrderRelation
    witness_index: int


@dataclass(frozen=True)
class ProofCheckReport:
    n: int
    assignments: Tuple[EdgeAssignment, ...]
    edge_graph: DirectedGraph
    checks: Mapping[str, bool]

    @property
    def hypothesis_holds(self):
        """The acyclicity and path arguments need |S| >= n + 1."""
        return len(self.assignments) >= self.n + 1

    @property
    def passed(self):
        return all(self.checks.values())

    @property
    def edge_count(self):
        return len(self.edge_graph)

    def to_dict(self):
        return {
            "n": self.n,
            "size": len(self.assignments),
            "edge_count": self.edge_count,
            "hypothesis_holds": self.hypothesis_holds,
            "checks": dict(self.checks),
            "assignments": [
                {"order": list(a.order.seq), "edge": list(a.edge), "witness": [list(p) for p in a.witness.pairs]}
                for a in self.assignments
            ],
        }


def _no_parallel_path(graph: nx.DiGraph):
    for x, y in list(graph.edges):
        graph.remove_edge(x, y)
        reachable = nx.has_path(graph, x, y)
        graph.add_edge(x, y)
        if reachable:
            return False
    return True


def proofcheck_thm1_upper(S: Sequence[TotalOrder], witnesses: FamilySpec) -> ProofCheckReport:
    """
    Replay the upper-bound argument on a concrete shattered list of total
    orders: pick the first witness G_A isolating each A, extract its smallest
    edge contradicting A, and test the resulting edge graph.
    """
    S = tuple(S)
    if not S:
        raise NotShattered("the proof checker needs a non-empty list")
    cert = is_shattered(S, witnesses)
    if cert is None:
        raise NotShattered(f"the {len(S)} orders are not shattered by the {witnesses.kind.value} family")

    n = S[0].n
    full = (1 << len(S)) - 1
    index = {id(o): i for i, o in enumerate(witnesses.orders())}
    assignments = []
    for pos, order in enumerate(S):
        witness = cert.witnesses[full ^ (1 << pos)]
        relation = witness.relation
        edge = next((e for e in relation.pairs if order.precedes(e[1], e[0])), None)
        if edge is None:
            raise NoContradictionEdge(f"witness {relation} has no edge contradicting {order}")
        assignments.append(EdgeAssignment(order, edge, relation, index.get(id(witness), -1)))

    edge_graph = from_edge_list(n, [a.edge for a in assignments])
    if len(edge_graph) != len(S):
        raise InvariantViolation("two orders were assigned the same contradiction edge")

    nx_graph = edge_graph.to_networkx()
    checks = {
        "acyclic": is_acyclic(edge_graph),
        "no_parallel_path": _no_parallel_path(nx_graph.copy()),
        "triangle_free": not any(nx.triangles(nx_graph.to_undirected()).values()),
        "mantel_bound": len(edge_graph) <= n * n // 4,
    }
    return ProofCheckReport(n, tuple(assignments), edge_graph, checks)
