"""Trail repair: chunk-based undo for graph backtracking and level-based undo
for the reference strategies.

Both variants keep the relative trail order of surviving literals; literals
that must be repropagated stay assigned and merely flip back into the queue.
"""
from __future__ import annotations

import heapq
from collections import deque

from gbsat.chunkset import ChunkSet
from gbsat.model import State


def update_level(st: State, lit: int) -> int:
    """Recomputed decision level of one assigned literal: decisions count the
    preceding decisions plus one, implications take the maximum level of the
    reason's other literals (0 for unit reasons)."""
    v = lit >> 1
    r = st.reason[v]
    if r is None:
        dec = 0
        p = st.pos[v]
        for other in st.trail[:p]:
            if st.reason[other >> 1] is None:
                dec += 1
        return dec + 1
    lvl = 0
    for o in r.lits:
        ov = o >> 1
        if ov != v and st.level[ov] > lvl:
            lvl = st.level[ov]
    return lvl


def undo(st: State, gamma_star: ChunkSet):
    """Unassign every literal of the selected chunks in one left-to-right
    pass; survivors get their level recomputed, and survivors whose
    cross-chunks meet the undone set leave the propagated set."""
    if len(gamma_star) == 0:
        return
    gamma = st.gamma
    eta = st.eta
    level = st.level
    reason = st.reason
    pos = st.pos
    propagated = st.propagated
    new_trail = []
    dec = 0
    for lit in st.trail:
        v = lit >> 1
        if gamma[v].intersects(gamma_star):
            st.unassign(lit)
            continue
        r = reason[v]
        if r is None:
            dec += 1
            level[v] = dec
        else:
            lvl = 0
            for o in r.lits:
                ov = o >> 1
                if ov != v and level[ov] > lvl:
                    lvl = level[ov]
            level[v] = lvl
        if propagated[v] and eta[v].intersects(gamma_star):
            propagated[v] = False  # needs to be repropagated
        pos[v] = len(new_trail)
        new_trail.append(lit)
    st.trail = new_trail
    st.decisions = dec
    st.omega = deque(l for l in new_trail if not propagated[l >> 1])
    alloc = st.alloc
    for slot, _gen in gamma_star.items():
        if slot in alloc.live:
            alloc.retire(slot)
    for slot in alloc.live:
        alloc.level[slot] = level[alloc.decision[slot] >> 1]


def undo_levels(st: State, bt_level: int):
    """Reference-style undo: remove every literal above the target level.

    Survivors positioned after the first removal are repropagated, and so is
    any surviving falsified propagated co-watcher of a removed watcher; the
    latter keeps the watched-literal invariant across non-suffix removals.
    """
    level = st.level
    reason = st.reason
    pos = st.pos
    propagated = st.propagated
    val = st.val
    new_trail = []
    removed_lits = []
    dead_slots = []
    restoration = False
    dec = 0
    for lit in st.trail:
        v = lit >> 1
        if level[v] > bt_level:
            if st.gb and reason[v] is None:
                dead_slots.append(st.gamma[v].items()[0][0])
            st.unassign(lit)
            removed_lits.append(lit)
            restoration = True
            continue
        if reason[v] is None:
            dec += 1
        if restoration and propagated[v]:
            propagated[v] = False
        pos[v] = len(new_trail)
        new_trail.append(lit)
    for lit in removed_lits:
        for w in st.watches[lit]:
            lits = w.clause.lits
            other = lits[1] if lits[0] == lit else lits[0]
            ov = other >> 1
            s = val[ov]
            if other & 1:
                s = -s
            if s == -1 and propagated[ov]:
                propagated[ov] = False
    st.trail = new_trail
    st.decisions = dec
    st.omega = deque(l for l in new_trail if not propagated[l >> 1])
    alloc = st.alloc
    for slot in dead_slots:
        alloc.retire(slot)


def restart(st: State):
    """Undo every chunk; root-level assignments are retained."""
    if st.gb_strict:
        gs = ChunkSet()
        alloc = st.alloc
        for slot in alloc.live_slots():
            gs.add(slot, alloc.gens[slot])
        undo(st, gs)
    else:
        undo_levels(st, 0)
    st.stats.restarts += 1


def retopo_relevel(st: State):
    """Stably restore the trail's topological order after a re-justification,
    then recompute positions, levels and chunk levels."""
    trail = st.trail
    n = len(trail)
    reason = st.reason
    idx_of = {lit: i for i, lit in enumerate(trail)}
    indeg = [0] * n
    out: list[list[int]] = [[] for _ in range(n)]
    for i, lit in enumerate(trail):
        r = reason[lit >> 1]
        if r is None:
            continue
        for o in r.lits:
            if o != lit:
                j = idx_of[o ^ 1]  # the premise's negation is on the trail
                out[j].append(i)
                indeg[i] += 1
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(trail[i])
        for j in out[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(order) != n:
        raise AssertionError("cycle in implication graph during reorder")
    st.trail = order
    level = st.level
    pos = st.pos
    dec = 0
    root = 0
    for i, lit in enumerate(order):
        v = lit >> 1
        pos[v] = i
        r = reason[v]
        if r is None:
            dec += 1
            level[v] = dec
        else:
            lvl = 0
            for o in r.lits:
                ov = o >> 1
                if ov != v and level[ov] > lvl:
                    lvl = level[ov]
            level[v] = lvl
            if lvl == 0:
                root += 1
    st.decisions = dec
    st.root_count = root
    st.omega = deque(l for l in order if not st.propagated[l >> 1])
    alloc = st.alloc
    for slot in alloc.live:
        alloc.level[slot] = level[alloc.decision[slot] >> 1]
