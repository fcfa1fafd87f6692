"""
Deterministic enumeration of the ground families on [n].

Total orders come out in lexicographic permutation order. Partial orders are
generated by backtracking over the pairs {a, b} with per-triple transitivity
pruning, then sorted by (edge count, row-major relation bits).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Tuple

from .errors import CapExceeded, InvariantViolation, NotAMember, OutOfRange, SizeMismatch
from .order_core import OrderRelation, TotalOrder, _validate_n

logger = logging.getLogger(__name__)

TOTAL_ORDER_CAP = 8
PARTIAL_ORDER_CAP = 6
ORACLE_CAP = 5


class FamilyKind(str, Enum):
    ALL_PARTIAL = "partial"
    ALL_TOTAL = "total"
    EXPLICIT = "explicit"


def _guard(n, cap, what):
    _validate_n(n)
    if n > cap:
        raise CapExceeded(f"{what} enumeration is capped at n <= {cap}, got n = {n}")


@lru_cache(maxsize=None)
def all_total_orders(n) -> Tuple[TotalOrder, ...]:
    _guard(n, TOTAL_ORDER_CAP, "total order")
    return tuple(TotalOrder(p) for p in permutations(range(1, n + 1)))


def _pair_schedule(n):
    # (a, b) with a < b, grouped by b so every triple closes as early as possible
    return [(a, b) for b in range(n) for a in range(b)]


def _lt(rows, x, y):
    return rows[x] >> y & 1


def _triple_is_transitive(rows, a, b, c):
    for x, y, z in permutations((a, b, c)):
        if _lt(rows, x, y) and _lt(rows, y, z) and not _lt(rows, x, z):
            return False
    return True


def _backtrack_closed_relations(n):
    schedule = _pair_schedule(n)
    rows = [0] * n
    found = []

    def descend(step):
        if step == len(schedule):
            found.append(tuple(rows))
            return
        a, b = schedule[step]
        for choice in (0, 1, 2):
            if choice == 1:
                rows[a] |= 1 << b
            elif choice == 2:
                rows[b] |= 1 << a
            # triples {m, a, b} with m < a are fully decided once (a, b) is
            if all(_triple_is_transitive(rows, m, a, b) for m in range(a)):
                descend(step + 1)
            if choice == 1:
                rows[a] &= ~(1 << b)
            elif choice == 2:
                rows[b] &= ~(1 << a)

    descend(0)
    return found


@lru_cache(maxsize=None)
def all_partial_orders(n) -> Tuple[OrderRelation, ...]:
    _guard(n, PARTIAL_ORDER_CAP, "partial order")
    orders = [OrderRelation._trusted(n, rows) for rows in _backtrack_closed_relations(n)]
    orders.sort(key=OrderRelation.sort_key)
    logger.debug("enumerated %d partial orders on [%d]", len(orders), n)
    return tuple(orders)


def filter_oracle_partial_orders(n):
    """
    Independent oracle: every assignment of {none, forward, backward} to the
    unordered pairs, filtered for transitivity. Returns a set of row tuples.
    """
    _guard(n, ORACLE_CAP, "oracle")
    pairs = list(combinations(range(n), 2))
    found = set()
    for assignment in product((0, 1, 2), repeat=len(pairs)):
        rows = [0] * n
        for (a, b), choice in zip(pairs, assignment):
            if choice == 1:
                rows[a] |= 1 << b
            elif choice == 2:
                rows[b] |= 1 << a
        if all(_triple_is_transitive(rows, *t) for t in combinations(range(n), 3)):
            found.add(tuple(rows))
    return found


@lru_cache(maxsize=None)
def _index_table(kind, n):
    orders = all_partial_orders(n) if kind == FamilyKind.ALL_PARTIAL else all_total_orders(n)
    return {order: i for i, order in enumerate(orders)}


@dataclass(frozen=True)
class FamilySpec:
    kind: FamilyKind
    n: int
    members: tuple = ()

    def __post_init__(self):
        kind = FamilyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        _validate_n(self.n)
        if kind == FamilyKind.ALL_PARTIAL:
            _guard(self.n, PARTIAL_ORDER_CAP, "partial order")
        elif kind == FamilyKind.ALL_TOTAL:
            _guard(self.n, TOTAL_ORDER_CAP, "total order")
        else:
            members = tuple(self.members)
            for m in members:
                if m.n != self.n:
                    raise SizeMismatch(f"family member {m} is on [{m.n}], family is on [{self.n}]")
            if len({m.relation for m in members}) != len(members):
                raise InvariantViolation("explicit family members must be pairwise distinct")
            object.__setattr__(self, "members", members)
        if kind != FamilyKind.EXPLICIT and self.members:
            raise InvariantViolation(f"{kind.value} families take no explicit members")

    @classmethod
    def partial(cls, n):
        return cls(FamilyKind.ALL_PARTIAL, n)

    @classmethod
    def total(cls, n):
        return cls(FamilyKind.ALL_TOTAL, n)

    @classmethod
    def explicit(cls, members, n=None):
        members = tuple(members)
        if n is None:
            if not members:
                raise OutOfRange("an empty explicit family needs n")
            n = members[0].n
        return cls(FamilyKind.EXPLICIT, n, members)

    @classmethod
    def named(cls, name, n):
        """'partial' or 'total', as used on the command line."""
        return cls(FamilyKind(name), n)

    def orders(self):
        if self.kind == FamilyKind.ALL_PARTIAL:
            return all_partial_orders(self.n)
        if self.kind == FamilyKind.ALL_TOTAL:
            return all_total_orders(self.n)
        return self.members

    def __len__(self):
        return len(self.orders())

    def __iter__(self):
        return iter(self.orders())

    @property
    def all_total(self):
        return self.kind == FamilyKind.ALL_TOTAL or all(m.is_total for m in self.orders())


def _coerce(f, x):
    # TotalOrder and its relation are the same order; match the family's form
    if f.kind == FamilyKind.ALL_PARTIAL:
        return x.relation
    if f.kind == FamilyKind.ALL_TOTAL and not isinstance(x, TotalOrder):
        if not x.is_total:
            return None
        return TotalOrder(tuple(sorted(range(1, x.n + 1), key=lambda v: -bin(x.rows[v - 1]).count("1"))))
    return x


def index_of(f: FamilySpec, x) -> int:
    if x.n != f.n:
        raise NotAMember(f"{x} is on [{x.n}], family is on [{f.n}]")
    key = _coerce(f, x)
    if f.kind == FamilyKind.EXPLICIT:
        for i, m in enumerate(f.members):
            if m == key or m.relation == key.relation:
                return i
        raise NotAMember(f"{x} is not a member of the explicit family")
    table = _index_table(f.kind, f.n)
    if key is None or key not in table:
        raise NotAMember(f"{x} is not a {f.kind.value} order on [{f.n}]")
    return table[key]


def member_at(f: FamilySpec, i: int):
    orders = f.orders()
    if not 0 <= i < len(orders):
        raise NotAMember(f"index {i} outside 0..{len(orders) - 1}")
    return orders[i]
