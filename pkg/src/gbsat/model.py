"""Core solver state: literals, clauses, the trail and chunk bookkeeping.

Literals use the dense encoding ``code = 2*(var-1) + (0 if positive else 1)``.
The trail is an ordered partial assignment; each literal is either propagated
or still queued (a per-literal flag, since after graph backtracking the queue
is no longer a suffix of the trail).
"""
from __future__ import annotations

import heapq
from collections import deque

from gbsat.chunkset import ChunkSet

LEVEL_INF = 1 << 60  # decision level of unassigned literals
MAX_VARS = (1 << 31) - 1

VSIDS_DECAY = 0.95
VSIDS_BUMP = 1.0
VSIDS_RESCALE = 1e100


def make_lit(var: int, positive: bool) -> int:
    return 2 * (var - 1) + (0 if positive else 1)


def lit_neg(lit: int) -> int:
    return lit ^ 1


def lit_var(lit: int) -> int:
    """1-based variable index of a literal code."""
    return (lit >> 1) + 1


def lit_is_pos(lit: int) -> bool:
    return (lit & 1) == 0


def from_dimacs(d: int) -> int:
    v = abs(d)
    return 2 * (v - 1) + (0 if d > 0 else 1)


def to_dimacs(lit: int) -> int:
    v = (lit >> 1) + 1
    return v if (lit & 1) == 0 else -v


class Clause:
    """A disjunction of distinct, non-tautological literals.

    For clauses of length >= 2 the two watchers are, by convention, the
    literals at positions 0 and 1.
    """

    __slots__ = ("cid", "lits", "learned")

    def __init__(self, cid: int, lits: list[int], learned: bool = False):
        self.cid = cid
        self.lits = lits
        self.learned = learned

    def __len__(self):
        return len(self.lits)

    def __repr__(self):
        body = " ".join(str(to_dimacs(l)) for l in self.lits)
        tag = "L" if self.learned else "C"
        return f"{tag}{self.cid}({body})"


class Watcher:
    __slots__ = ("clause", "blocker")

    def __init__(self, clause: Clause, blocker: int):
        self.clause = clause
        self.blocker = blocker


class ChunkAlloc:
    """Allocates chunk slots; retired slots are recycled under a new generation."""

    def __init__(self):
        self.gens: list[int] = []
        self.decision: list[int] = []  # trail literal of the live chunk, -1 if dead
        self.level: list[int] = []
        self.members: list[set[int]] = []
        self.free: list[int] = []
        self.live: set[int] = set()

    def alloc(self, lit: int, level: int) -> int:
        if self.free:
            slot = self.free.pop()
        else:
            slot = len(self.gens)
            self.gens.append(1)
            self.decision.append(-1)
            self.level.append(0)
            self.members.append(set())
        self.decision[slot] = lit
        self.level[slot] = level
        self.members[slot] = {lit}
        self.live.add(slot)
        return slot

    def retire(self, slot: int):
        self.gens[slot] += 1
        self.decision[slot] = -1
        self.level[slot] = 0
        self.members[slot].clear()
        self.live.discard(slot)
        self.free.append(slot)

    def gen(self, slot: int) -> int:
        return self.gens[slot]

    def live_slots(self) -> list[int]:
        return sorted(self.live)


class Stats:
    __slots__ = (
        "conflicts",
        "decisions",
        "propagations",
        "unassigned",
        "learned",
        "candidates",
        "restarts",
        "merges",
        "purged",
    )

    def __init__(self):
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.unassigned = 0
        self.learned = 0
        self.candidates = 0
        self.restarts = 0
        self.merges = 0
        self.purged = 0


class State:
    """All mutable state of one solver instance (single-threaded)."""

    def __init__(self, nvars: int, config):
        if nvars > MAX_VARS:
            raise ValueError(f"variable count {nvars} exceeds {MAX_VARS}")
        self.nvars = nvars
        self.config = config
        self.mode = config.mode
        self.gb = config.mode == "gb"
        # Simulation weight profiles replay the level-based references exactly:
        # they share the reference trail repair and watcher handling.
        self.ref_compat = (not self.gb) or config.profile.kind in (
            "cb_simulation",
            "ncb_simulation",
        )
        self.gb_strict = self.gb and not self.ref_compat
        self.blockers = config.blockers and self.gb_strict
        self.merge = config.merge if self.gb_strict else "none"

        n = nvars
        self.val = [0] * n  # value of the positive literal: 0 undef, 1 true, -1 false
        self.level = [LEVEL_INF] * n
        self.reason: list[Clause | None] = [None] * n
        self.pos = [-1] * n
        self.propagated = [False] * n
        self.phase = [False] * n  # cached polarity; default negative
        self.activity = [0.0] * n
        self.var_inc = VSIDS_BUMP
        self.order: list[tuple[float, int]] = [(0.0, v) for v in range(n)]
        heapq.heapify(self.order)

        self.gamma = [ChunkSet() for _ in range(n)] if self.gb else None
        self.eta = [ChunkSet() for _ in range(n)] if self.gb else None
        self.scratch = ChunkSet()

        self.trail: list[int] = []
        self.omega: deque[int] = deque()
        self.alloc = ChunkAlloc()
        self.decisions = 0

        self.clauses: list[Clause] = []
        self.next_cid = 0
        self.watches: list[list[Watcher]] = [[] for _ in range(2 * n)]

        self.lazy_records: dict[int, Clause] = {}
        self.pending_merges: list[tuple[int, Clause]] = []

        self.root_count = 0
        self.purged_root_count = 0
        self.unsat = False
        self.stats = Stats()
        self.trace: list[tuple[frozenset[int], frozenset[int]]] | None = (
            [] if config.trace else None
        )

    # -- values ------------------------------------------------------------

    def lit_value(self, lit: int) -> int:
        """1 satisfied, -1 falsified, 0 unassigned."""
        s = self.val[lit >> 1]
        return -s if lit & 1 else s

    def conflict_level(self, clause: Clause) -> int:
        lv = self.level
        return max((lv[l >> 1] for l in clause.lits), default=0)

    # -- assignment --------------------------------------------------------

    def enqueue(self, lit: int, reason: Clause | None, level: int):
        """Append an assignment to the trail and the propagation queue.

        In GB mode the caller must have prepared gamma[var] beforehand
        (decision chunk or union over the reason's other literals).
        """
        v = lit >> 1
        self.val[v] = -1 if lit & 1 else 1
        self.level[v] = level
        self.reason[v] = reason
        self.pos[v] = len(self.trail)
        self.propagated[v] = False
        self.trail.append(lit)
        self.omega.append(lit)
        if reason is None:
            self.decisions += 1
        elif level == 0:
            self.root_count += 1
        if self.gb:
            for slot, _gen in self.gamma[v].items():
                self.alloc.members[slot].add(lit)

    def unassign(self, lit: int):
        """Clear one assignment; phase cache keeps the dropped polarity."""
        v = lit >> 1
        self.val[v] = 0
        self.level[v] = LEVEL_INF
        self.reason[v] = None
        self.pos[v] = -1
        self.propagated[v] = False
        self.phase[v] = (lit & 1) == 0
        if self.gb:
            for slot, _gen in self.gamma[v].items():
                self.alloc.members[slot].discard(lit)
            self.gamma[v].clear()
            self.eta[v].clear()
        self.lazy_records.pop(v, None)
        heapq.heappush(self.order, (-self.activity[v], v))
        self.stats.unassigned += 1

    def new_decision_chunk(self, lit: int, level: int) -> int:
        v = lit >> 1
        slot = self.alloc.alloc(lit, level)
        g = self.gamma[v]
        g.clear()
        g.add(slot, self.alloc.gens[slot])
        return slot

    def gamma_of_clause(self, clause: Clause, skip_var: int = -1) -> ChunkSet:
        """Union of gamma over the clause's literals into the scratch set."""
        out = self.scratch
        out.clear()
        gamma = self.gamma
        for l in clause.lits:
            v = l >> 1
            if v != skip_var:
                out.union_into(gamma[v])
        return out

    # -- VSIDS ---------------------------------------------------------------

    def bump(self, v: int):
        a = self.activity[v] + self.var_inc
        self.activity[v] = a
        if a > VSIDS_RESCALE:
            self.rescale()
        else:
            heapq.heappush(self.order, (-a, v))

    def rescale(self):
        scale = 1.0 / VSIDS_RESCALE
        self.activity = [a * scale for a in self.activity]
        self.var_inc *= scale
        self.order = [(-self.activity[v], v) for v in range(self.nvars)]
        heapq.heapify(self.order)

    def decay(self):
        self.var_inc /= VSIDS_DECAY
        if self.var_inc > VSIDS_RESCALE:
            self.rescale()

    def pop_decision_var(self) -> int | None:
        order = self.order
        val = self.val
        activity = self.activity
        while order:
            neg_a, v = heapq.heappop(order)
            if val[v] == 0 and -neg_a == activity[v]:
                heapq.heappush(order, (neg_a, v))  # keep for the next decide
                return v
        return None

    # -- clauses ---------------------------------------------------------------

    def new_clause(self, lits: list[int], learned: bool) -> Clause:
        c = Clause(self.next_cid, lits, learned)
        self.next_cid += 1
        self.clauses.append(c)
        if learned:
            self.stats.learned += 1
        return c


def ingest_clause(lits: list[int]) -> list[int] | None:
    """Deduplicate literals, drop tautologies. Returns None for a tautology."""
    seen = set()
    out = []
    for l in lits:
        if l in seen:
            continue
        if (l ^ 1) in seen:
            return None
        seen.add(l)
        out.append(l)
    return out
