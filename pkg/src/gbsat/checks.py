"""Debug assertions: from-scratch recomputation of trail metadata and full
scans of the watched-literal invariants. Only active with check mode on."""
from __future__ import annotations

from gbsat.chunkset import ChunkSet
from gbsat.model import LEVEL_INF, State


class InvariantError(AssertionError):
    pass


def _fail(msg: str):
    raise InvariantError(msg)


def check_fixpoint(st: State):
    check_trail(st)
    check_levels(st)
    check_watch_lists(st)
    check_watch_invariant(st)
    check_no_falsified_or_unit(st)
    if st.gb:
        check_gamma(st)


def check_after_repair(st: State):
    check_trail(st)
    check_levels(st)
    check_watch_lists(st)
    check_watch_invariant(st)
    if st.gb:
        check_gamma(st)


def check_after_merge(st: State):
    check_trail(st)
    check_levels(st)
    check_gamma(st)


def check_trail(st: State):
    seen_vars = set()
    for i, lit in enumerate(st.trail):
        v = lit >> 1
        if v in seen_vars:
            _fail(f"variable {v + 1} appears twice on the trail")
        seen_vars.add(v)
        if st.lit_value(lit) != 1:
            _fail(f"trail literal {lit} is not satisfied")
        if st.pos[v] != i:
            _fail(f"stale trail position for var {v + 1}")
        r = st.reason[v]
        if r is not None:
            if lit not in r.lits:
                _fail("reason does not contain the implied literal")
            for o in r.lits:
                if o == lit:
                    continue
                if st.lit_value(o) != -1:
                    _fail("reason premise is not falsified")
                if st.pos[o >> 1] >= i:
                    _fail("trail is not topologically ordered")
        if st.gb:
            g = st.gamma[v]
            if r is None:
                if len(g) != 1:
                    _fail("decision must belong to exactly its own chunk")
                slot, gen = g.items()[0]
                if st.alloc.decision[slot] != lit or st.alloc.gens[slot] != gen:
                    _fail("decision chunk record is inconsistent")
            elif len(g) == 0 and st.level[v] != 0:
                _fail("chunk-free implication must sit at root level")
            for slot, gen in g.items():
                if slot not in st.alloc.live or st.alloc.gens[slot] != gen:
                    _fail("gamma contains a dead chunk")
            if st.gb_strict and st.propagated[v] and not g.subset_of(st.eta[v]):
                _fail("gamma not within eta for a propagated literal")
    for v in range(st.nvars):
        if st.val[v] == 0:
            if st.level[v] != LEVEL_INF or st.reason[v] is not None:
                _fail("unassigned variable with stale metadata")
        elif v not in seen_vars:
            _fail("assigned variable missing from the trail")
    qset = list(st.omega)
    expect = [l for l in st.trail if not st.propagated[l >> 1]]
    if qset != expect:
        _fail("queue out of sync with the propagated flags")


def check_levels(st: State):
    dec = 0
    fresh: dict[int, int] = {}
    for lit in st.trail:
        v = lit >> 1
        r = st.reason[v]
        if r is None:
            dec += 1
            lvl = dec
        else:
            lvl = 0
            for o in r.lits:
                ov = o >> 1
                if ov != v and fresh[ov] > lvl:
                    lvl = fresh[ov]
        fresh[v] = lvl
        if st.level[v] != lvl:
            _fail(
                f"level mismatch for var {v + 1}: stored {st.level[v]}, "
                f"recomputed {lvl}"
            )
    if st.decisions != dec:
        _fail("decision counter out of sync")


def check_gamma(st: State):
    alloc = st.alloc
    fresh: dict[int, list] = {}
    members: dict[int, set] = {slot: set() for slot in alloc.live}
    for lit in st.trail:
        v = lit >> 1
        r = st.reason[v]
        g = ChunkSet()
        if r is None:
            found = None
            for slot in alloc.live:
                if alloc.decision[slot] == lit:
                    found = slot
                    break
            if found is None:
                _fail("decision without a live chunk")
            g.add(found, alloc.gens[found])
        else:
            for o in r.lits:
                if o != lit:
                    g.union_into(fresh[o >> 1])
        fresh[v] = g
        if g.items() != st.gamma[v].items():
            _fail(
                f"gamma mismatch for var {v + 1}: stored {st.gamma[v]!r}, "
                f"recomputed {g!r}"
            )
        for slot, _gen in g.items():
            members[slot].add(lit)
    for slot in alloc.live:
        if alloc.members[slot] != members[slot]:
            _fail(f"member set of chunk {slot} is stale")
        if alloc.level[slot] != st.level[alloc.decision[slot] >> 1]:
            _fail(f"chunk level of chunk {slot} is stale")


def check_watch_lists(st: State):
    from collections import Counter

    counted: Counter = Counter()
    for lit in range(2 * st.nvars):
        for w in st.watches[lit]:
            c = w.clause
            if lit not in (c.lits[0], c.lits[1]):
                _fail("watch list entry does not watch the clause")
            if w.blocker not in c.lits or w.blocker == lit:
                _fail("blocker must be another literal of the clause")
            counted[(id(c), lit)] += 1
    by_clause: Counter = Counter()
    for (cid, _lit), n in counted.items():
        if n != 1:
            _fail("duplicate watch entry")
        by_clause[cid] += 1
    for c in st.clauses:
        if len(c.lits) >= 2 and by_clause.get(id(c), 0) != 2:
            _fail(f"clause {c!r} is not watched twice")


def check_watch_invariant(st: State):
    """Invariant 1 in the reference modes, the cross-chunk invariant in GB
    mode, its blocker variant when blockers are on."""
    for c1 in range(2 * st.nvars):
        if not (st.lit_value(c1) == -1 and st.propagated[c1 >> 1]):
            continue
        for w in st.watches[c1]:
            lits = w.clause.lits
            c2 = lits[1] if lits[0] == c1 else lits[0]
            sat2 = st.lit_value(c2) == 1
            if not st.gb_strict:
                if not sat2:
                    _fail(f"watched pair violated for {w.clause!r}")
                continue
            v1 = c1 >> 1
            if st.blockers:
                ok = sat2 and st.gamma[c2 >> 1].subset_of(st.eta[v1])
                if not ok:
                    b = w.blocker
                    ok = st.lit_value(b) == 1 and st.gamma[b >> 1].subset_of(
                        st.eta[v1]
                    )
                if not ok:
                    _fail(f"blocker invariant violated for {w.clause!r}")
            else:
                if not sat2:
                    _fail(f"cross-chunk invariant violated for {w.clause!r}")
                cover = st.gamma[v1].copy()
                cover.union_into(st.eta[v1])
                if not st.gamma[c2 >> 1].subset_of(cover):
                    _fail(f"cross-chunk coverage violated for {w.clause!r}")


def check_no_falsified_or_unit(st: State):
    """At a propagation fixpoint no clause may be falsified by the propagated
    set, nor unit under it while unsatisfied."""
    for c in st.clauses:
        free = 0
        satisfied = False
        for l in c.lits:
            sv = st.lit_value(l)
            if sv == 1:
                satisfied = True
                break
            if sv == -1 and st.propagated[l >> 1]:
                continue
            free += 1
        if satisfied:
            continue
        if free == 0:
            _fail(f"clause {c!r} is falsified by the propagated set")
        if free == 1:
            _fail(f"clause {c!r} is unit under the propagated set")
