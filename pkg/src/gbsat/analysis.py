"""Conflict analysis: scope-parametric first-UIP via binary resolution.

The scope is either a set of chunks about to be undone or, for the reference
strategies, a decision-level threshold. Resolution walks the trail right to
left and stops as soon as exactly one literal of the current resolvent falls
inside the scope.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from gbsat.model import Clause, State


@dataclass
class AnalysisResult:
    learned: list[int]
    asserting: int
    trace: list[int] = field(default_factory=list)  # clause ids used
    pivots: list[int] = field(default_factory=list)  # trail literals resolved on


def resolve(c: list[int], d: list[int], pivot: int) -> list[int]:
    """Binary resolution (C x_pivot D): requires ~pivot in C and pivot in D."""
    np = pivot ^ 1
    if np not in c:
        raise ValueError(f"negated pivot {np} not in first clause")
    if pivot not in d:
        raise ValueError(f"pivot {pivot} not in second clause")
    out = [l for l in c if l != np]
    seen = set(out)
    for l in d:
        if l != pivot and l not in seen:
            seen.add(l)
            out.append(l)
    return out


def analyze(
    st: State,
    conflict: Clause,
    chunk_scope=None,
    level_scope: int | None = None,
    use_records: bool = False,
) -> AnalysisResult | None:
    """First UIP of the conflict with respect to the scope.

    With `use_records`, a decision reached during the walk is resolved using
    its recorded missed implication (lazy chunk merging). Returns None when a
    scope decision with no usable justification is reached before the UIP;
    such a merged candidate cannot be analyzed and must be skipped.
    """
    if chunk_scope is not None:
        gamma = st.gamma

        def in_scope(v: int) -> bool:
            return gamma[v].intersects(chunk_scope)

    else:
        lam = level_scope
        level = st.level

        def in_scope(v: int) -> bool:
            return level[v] >= lam

    d = set(conflict.lits)
    n = 0
    for l in d:
        if in_scope(l >> 1):
            n += 1
    trace = [conflict.cid]
    pivots: list[int] = []
    trail = st.trail
    reason = st.reason
    done = n == 0  # degenerate; callers guarantee n >= 1
    for k in range(len(trail) - 1, -1, -1):
        t = trail[k]
        tv = t >> 1
        if (t ^ 1) in d and in_scope(tv):
            r = reason[tv]
            if r is None and use_records:
                r = st.lazy_records.get(tv)
            if r is None:
                return None
            d.discard(t ^ 1)
            n -= 1
            for o in r.lits:
                if o != t and o not in d:
                    d.add(o)
                    if in_scope(o >> 1):
                        n += 1
            trace.append(r.cid)
            pivots.append(t)
        if n == 1:
            done = True
            break
    if not done or n != 1:
        return None
    asserting = -1
    for l in d:
        if in_scope(l >> 1):
            asserting = l
            break
    level = st.level
    pos = st.pos
    rest = sorted(
        (l for l in d if l != asserting),
        key=lambda l: (-level[l >> 1], -pos[l >> 1]),
    )
    return AnalysisResult([asserting] + rest, asserting, trace, pivots)


def is_new_clause(st: State, lits: list[int]) -> bool:
    """False iff some existing clause subsumes the candidate.

    A subsuming clause has both watchers among the candidate's literals, so
    scanning the watch lists of those literals finds it.
    """
    dset = set(lits)
    nd = len(dset)
    for l in dset:
        for w in st.watches[l]:
            cl = w.clause.lits
            if len(cl) <= nd:
                for x in cl:
                    if x not in dset:
                        break
                else:
                    return False
    return True
