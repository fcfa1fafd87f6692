"""
Shattering engine: traces, shattered-set checks, and exact VC-dimension by
level-wise (apriori) search with hereditary pruning.

A witness w "contains" a ground element g iff compatible(w, g). Traces are
bitmasks over a ground list, bit i standing for ground[i].
"""

import logging
import math
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Deque, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .enumeration import FamilySpec
from .errors import BudgetExhausted, CapExceeded, SizeMismatch
from .order_core import Order, compatible

logger = logging.getLogger(__name__)

MAX_GROUND = 25
CHUNK_CELLS = 2_000_000
# join steps between wall-clock checks
CLOCK_STRIDE = 4096
# partial-against-partial tables fall back to one closure per cell
PAIRWISE_CELL_CAP = 1_000_000


@dataclass(frozen=True)
class ShatterCertificate:
    ground: Tuple[Order, ...]
    witnesses: Mapping[int, Order] = field(default_factory=dict)

    @property
    def n(self):
        if self.ground:
            return self.ground[0].n
        return next(iter(self.witnesses.values())).n

    def __len__(self):
        return len(self.ground)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class LevelStats:
    size: int
    generated: int
    examined: int
    shattered: int


@dataclass(frozen=True)
class Exhaustion:
    """Evidence that no (dimension + 1)-subset of the ground family is shattered."""

    level: int
    generated: int
    examined: int
    search_complete: bool
    information_bound: bool = False


@dataclass
class VCReport:
    dimension: int
    certificate: ShatterCertificate
    exhaustion: Exhaustion
    levels: List[LevelStats]
    ground_size: int
    witness_size: int
    elapsed_seconds: float

    @property
    def search_complete(self):
        return self.exhaustion.search_complete

    def to_frame(self):
        return pd.DataFrame([vars(stats) for stats in self.levels])

    def summary(self):
        return {
            "dimension": self.dimension,
            "search_complete": self.search_complete,
            "ground_size": self.ground_size,
            "witness_size": self.witness_size,
            "next_level": self.exhaustion.level,
            "next_level_generated": self.exhaustion.generated,
            "next_level_examined": self.exhaustion.examined,
            "information_bound": self.exhaustion.information_bound,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "levels": [vars(stats) for stats in self.levels],
        }


@dataclass
class SearchBudget:
    """Wall-clock seconds and/or number of candidate subsets examined."""

    seconds: Optional[float] = None
    max_candidates: Optional[int] = None
    clock: Callable[[], float] = field(default=time.monotonic, repr=False, compare=False)
    _started: float = field(default=0.0, init=False)
    _spent: int = field(default=0, init=False)

    def start(self):
        self._started = self.clock()
        self._spent = 0

    def charge(self, candidates):
        self._spent += candidates
        if self.max_candidates is not None and self._spent > self.max_candidates:
            raise BudgetExhausted(f"candidate budget of {self.max_candidates} spent")
        self.check_clock()

    def check_clock(self):
        if self.seconds is not None and self.clock() - self._started > self.seconds:
            raise BudgetExhausted(f"time budget of {self.seconds}s spent")


def _check_same_n(orders, n):
    for order in orders:
        if order.n != n:
            raise SizeMismatch(f"{order} is on [{order.n}], expected [{n}]")


def trace(w: Order, ground: Sequence[Order]) -> int:
    _check_same_n(ground, w.n)
    mask = 0
    for i, g in enumerate(ground):
        if compatible(w, g):
            mask |= 1 << i
    return mask


def _bits_array(orders):
    return np.array([o.relation.bits for o in orders], dtype=np.uint64)


class TraceTable:
    """
    Boolean compatibility matrix, one row per witness and one column per ground
    element. When either side consists of total orders the table is one
    vectorised subset test over the row-major relation bits.
    """

    def __init__(self, witnesses: Sequence[Order], ground: Sequence[Order]):
        self.witnesses = tuple(witnesses)
        self.ground = tuple(ground)
        if self.witnesses:
            _check_same_n(self.ground, self.witnesses[0].n)
            _check_same_n(self.witnesses, self.witnesses[0].n)
        self.matrix = self._build()

    def _build(self):
        shape = (len(self.witnesses), len(self.ground))
        if not all(shape):
            return np.zeros(shape, dtype=bool)
        w_bits = _bits_array(self.witnesses)
        g_bits = _bits_array(self.ground)
        if all(g.is_total for g in self.ground):
            return (w_bits[:, None] & ~g_bits[None, :]) == 0
        if all(w.is_total for w in self.witnesses):
            return (g_bits[None, :] & ~w_bits[:, None]) == 0
        if shape[0] * shape[1] > PAIRWISE_CELL_CAP:
            raise CapExceeded(
                f"a {shape[0]} x {shape[1]} partial-order trace table exceeds {PAIRWISE_CELL_CAP} cells"
            )
        logger.debug("building %d x %d trace table pairwise", *shape)
        return np.array([[compatible(w, g) for g in self.ground] for w in self.witnesses], dtype=bool)

    def patterns(self, candidates: np.ndarray) -> np.ndarray:
        """(witnesses x candidates) array of trace patterns over each candidate tuple."""
        out = np.zeros((self.matrix.shape[0], candidates.shape[0]), dtype=np.int64)
        for i in range(candidates.shape[1]):
            out |= self.matrix[:, candidates[:, i]].astype(np.int64) << i
        return out

    def shattered(self, candidates: np.ndarray) -> np.ndarray:
        k = candidates.shape[1]
        if candidates.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        if (1 << k) > self.matrix.shape[0]:
            return np.zeros(candidates.shape[0], dtype=bool)
        pats = np.sort(self.patterns(candidates), axis=0)
        distinct = 1 + np.count_nonzero(np.diff(pats, axis=0), axis=0)
        return distinct == (1 << k)

    def certificate(self, subset: Sequence[int]) -> Optional[ShatterCertificate]:
        """First witness (enumeration order) realising each mask, or None."""
        cand = np.array([list(subset)], dtype=np.int64).reshape(1, len(subset))
        pats = self.patterns(cand)[:, 0]
        values, first = np.unique(pats, return_index=True)
        if len(values) != 1 << len(subset):
            return None
        witnesses = {int(v): self.witnesses[int(i)] for v, i in zip(values, first)}
        return ShatterCertificate(tuple(self.ground[i] for i in subset), witnesses)


def is_shattered(ground: Sequence[Order], witnesses: FamilySpec) -> Optional[ShatterCertificate]:
    ground = tuple(ground)
    if len(ground) > MAX_GROUND:
        raise CapExceeded(f"ground lists are capped at {MAX_GROUND} elements, got {len(ground)}")
    _check_same_n(ground, witnesses.n)
    table = TraceTable(witnesses.orders(), ground)
    return table.certificate(range(len(ground)))


def verify_certificate(cert: ShatterCertificate) -> Verdict:
    """Recheck every (mask, witness) pair from scratch."""
    size = len(cert.ground)
    if not cert.witnesses:
        return Verdict(False, "certificate has no witnesses")
    n = cert.n
    for order in cert.ground:
        if order.n != n:
            return Verdict(False, f"ground element {order} is on [{order.n}], expected [{n}]")
    for mask in range(1 << size):
        if mask not in cert.witnesses:
            return Verdict(False, f"mask {mask} has no witness")
    for mask, w in sorted(cert.witnesses.items()):
        if not 0 <= mask < 1 << size:
            return Verdict(False, f"mask {mask} is outside 0..{(1 << size) - 1}")
        if w.n != n:
            return Verdict(False, f"witness for mask {mask} is on [{w.n}], expected [{n}]")
        got = trace(w, cert.ground)
        if got != mask:
            return Verdict(False, f"witness {w} traces {got}, certificate claims {mask}")
    return Verdict(True)


def _join_level(previous: List[Tuple[int, ...]], budget: SearchBudget) -> Iterator[Tuple[int, ...]]:
    """
    Apriori join: k-sets whose every (k-1)-subset was shattered, yielded in
    lexicographic order. ``previous`` must be sorted.
    """
    if not previous:
        return
    k = len(previous[0]) + 1
    known = set(previous)
    groups: Dict[Tuple[int, ...], List[int]] = {}
    for s in previous:
        groups.setdefault(s[:-1], []).append(s[-1])
    tried = 0
    for prefix, lasts in groups.items():
        for x in range(len(lasts)):
            for y in range(x + 1, len(lasts)):
                tried += 1
                if tried % CLOCK_STRIDE == 0:
                    budget.check_clock()
                cand = prefix + (lasts[x], lasts[y])
                # dropping either of the last two elements gives a known set
                if all(cand[:i] + cand[i + 1:] in known for i in range(k - 2)):
                    yield cand


@dataclass
class _LevelRun:
    hits: List[Tuple[int, ...]] = field(default_factory=list)
    generated: int = 0
    examined: int = 0


def _examine(table, candidates: Iterable[Tuple[int, ...]], budget, threads, run):
    """Append shattered rows to ``run.hits`` in candidate order."""
    chunk = max(1, CHUNK_CELLS // max(1, table.matrix.shape[0]))

    def counted():
        for cand in candidates:
            run.generated += 1
            yield cand

    source = counted()

    def blocks():
        while True:
            batch = list(islice(source, chunk))
            if not batch:
                return
            budget.check_clock()
            yield np.array(batch, dtype=np.int64)

    def shattered_rows(block):
        return block[table.shattered(block)]

    def merge(block, rows):
        run.examined += len(block)
        run.hits.extend(tuple(int(v) for v in row) for row in rows)
        budget.charge(len(block))

    if threads <= 1:
        for block in blocks():
            merge(block, shattered_rows(block))
        return

    pool = ThreadPoolExecutor(max_workers=threads)
    pending: Deque = deque()
    try:
        for block in blocks():
            pending.append((block, pool.submit(shattered_rows, block)))
            # merged in submission order, so the result is deterministic
            if len(pending) >= 2 * threads:
                done, future = pending.popleft()
                merge(done, future.result())
        while pending:
            done, future = pending.popleft()
            merge(done, future.result())
    finally:
        pool.shutdown(wait=False, cancel_futures=True)


def vc_dimension(
    ground_family: FamilySpec,
    witness_family: FamilySpec,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> VCReport:
    """
    Exact VC-dimension of the witness family over the ground family.

    Level k examines the k-subsets all of whose (k-1)-subsets were shattered.
    A spent budget turns the run into a certified lower bound with
    ``search_complete = False``.
    """
    if ground_family.n != witness_family.n:
        raise SizeMismatch(
            f"ground family is on [{ground_family.n}], witness family on [{witness_family.n}]"
        )
    budget = budget or SearchBudget()
    budget.start()
    started = time.monotonic()

    ground = ground_family.orders()
    table = TraceTable(witness_family.orders(), ground)
    n_witnesses = table.matrix.shape[0]
    log_bound = int(math.floor(math.log2(n_witnesses))) if n_witnesses else 0

    levels = [LevelStats(0, 1, 1, 1)]
    best: Tuple[int, ...] = ()
    previous: List[Tuple[int, ...]] = [()]
    k = 1
    while True:
        if k > len(ground) or k > log_bound:
            exhaustion = Exhaustion(k, 0, 0, True, information_bound=k <= len(ground))
            break
        run = _LevelRun()
        if k == 1:
            candidates = ((i,) for i in range(len(ground)))
        else:
            candidates = _join_level(previous, budget)
        try:
            _examine(table, candidates, budget, threads, run)
        except BudgetExhausted as exc:
            logger.warning(
                "search truncated at level %d after %d candidates: %s", k, run.generated, exc
            )
            levels.append(LevelStats(k, run.generated, run.examined, len(run.hits)))
            if run.hits:
                best = run.hits[0]
                exhaustion = Exhaustion(k + 1, 0, 0, False)
            else:
                exhaustion = Exhaustion(k, run.generated, run.examined, False)
            break
        logger.info("level %d: %d candidate subsets, %d shattered", k, run.generated, len(run.hits))
        levels.append(LevelStats(k, run.generated, run.examined, len(run.hits)))
        if not run.hits:
            exhaustion = Exhaustion(k, run.generated, run.examined, True)
            break
        best = run.hits[0]
        previous = run.hits
        k += 1

    return VCReport(
        dimension=len(best),
        certificate=table.certificate(best),
        exhaustion=exhaustion,
        levels=levels,
        ground_size=len(ground),
        witness_size=n_witnesses,
        elapsed_seconds=time.monotonic() - started,
    )
