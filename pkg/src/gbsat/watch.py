"""Two-watched-literal propagation with blockers and cross-chunk maintenance.

A clause's watchers are its first two literals. While a falsified, propagated
watcher exists, the other watcher must be satisfied; in graph-backtracking
mode the cross-chunks (eta) additionally record which chunk removals force a
literal to be repropagated, so the invariant survives non-suffix backtracks.
"""
from __future__ import annotations

from gbsat import repair
from gbsat.model import Clause, State, Watcher


def _watcher_rank(st: State, lit: int):
    """Sort key for watcher choice: unassigned first, then satisfied literals
    with small chunk footprint (GB) or high level (reference modes), then the
    most recently falsified."""
    sv = st.lit_value(lit)
    v = lit >> 1
    if sv == 0:
        return (0, 0, 0)
    if sv == 1:
        if st.gb_strict:
            return (1, len(st.gamma[v]), -st.pos[v])
        return (1, -st.level[v], -st.pos[v])
    if st.gb_strict:
        return (2, len(st.gamma[v]), -st.pos[v])
    return (2, -st.level[v], -st.pos[v])


def attach_clause(st: State, c: Clause, asserting: int | None = None):
    """Install watchers for a clause; unit clauses enqueue at root level.

    An empty clause marks the instance unsatisfiable. When `asserting` is
    given it becomes one watcher and the co-watcher's cross-chunks absorb the
    asserting literal's chunks, so undoing them triggers repropagation.
    """
    lits = c.lits
    if not lits:
        st.unsat = True
        return
    if len(lits) == 1:
        lit = lits[0]
        sv = st.lit_value(lit)
        if sv == -1:
            st.unsat = True
        elif sv == 0:
            if st.gb:
                st.gamma[lit >> 1].clear()
            st.enqueue(lit, c, 0)
        return
    if asserting is not None:
        ai = lits.index(asserting)
        lits[0], lits[ai] = lits[ai], lits[0]
        co = min(range(1, len(lits)), key=lambda i: _watcher_rank(st, lits[i]))
        lits[1], lits[co] = lits[co], lits[1]
        if st.gb_strict:
            st.eta[lits[1] >> 1].union_into(st.gamma[asserting >> 1])
    else:
        ranked = sorted(range(len(lits)), key=lambda i: _watcher_rank(st, lits[i]))
        a, b = ranked[0], ranked[1]
        la, lb = lits[a], lits[b]
        lits[a], lits[0] = lits[0], lits[a]
        lits[lits.index(lb)], lits[1] = lits[1], lb
    st.watches[lits[0]].append(Watcher(c, lits[1]))
    st.watches[lits[1]].append(Watcher(c, lits[0]))


def detach_clause(st: State, c: Clause):
    if len(c.lits) < 2:
        return
    for wl_lit in (c.lits[0], c.lits[1]):
        wl = st.watches[wl_lit]
        for i, w in enumerate(wl):
            if w.clause is c:
                wl[i] = wl[-1]
                wl.pop()
                break


def search_replacement(st: State, c: Clause, c1: int, c2: int) -> int:
    """Replacement watcher for c1: a non-falsified literal of C \\ {c1, c2} if
    one exists, else the falsified candidate assigned latest; c1 itself for
    binary clauses."""
    best = -1
    best_pos = -1
    for x in c.lits:
        if x == c1 or x == c2:
            continue
        if st.lit_value(x) != -1:
            return x
        p = st.pos[x >> 1]
        if p > best_pos:
            best_pos = p
            best = x
    return best if best != -1 else c1


def bcp(st: State) -> Clause | None:
    """Propagate until fixpoint; returns the first falsified clause, if any.

    On conflict the literal under propagation stays in the queue. Each newly
    propagated literal resets its cross-chunks to its own chunks first.
    """
    omega = st.omega
    watches = st.watches
    val = st.val
    level = st.level
    pos = st.pos
    propagated = st.propagated
    reason = st.reason
    gamma = st.gamma
    eta = st.eta
    gbs = st.gb_strict
    blockers = st.blockers
    merge_on = st.merge != "none"
    stats = st.stats

    while omega:
        lit = omega[0]
        lv = lit >> 1
        if gbs:
            eta_l = eta[lv]
            eta_l.copy_from(gamma[lv])  # reset; keeps gamma(l) within eta(l)
        c1 = lit ^ 1
        wl = watches[c1]
        i = 0
        j = 0
        n = len(wl)
        confl = None
        while i < n:
            w = wl[i]
            i += 1
            if blockers:
                b = w.blocker
                sb = val[b >> 1]
                if b & 1:
                    sb = -sb
                if sb == 1 and gamma[b >> 1].subset_of(eta_l):
                    wl[j] = w
                    j += 1
                    continue
            c = w.clause
            lits = c.lits
            if lits[0] == c1:
                lits[0] = lits[1]
                lits[1] = c1
            c2 = lits[0]
            c2v = c2 >> 1
            s2 = val[c2v]
            if c2 & 1:
                s2 = -s2
            if s2 == 1 and (not gbs or gamma[c2v].subset_of(eta_l)):
                w.blocker = c2
                wl[j] = w
                j += 1
                continue
            # replacement for c1: first non-falsified, else the falsified
            # candidate assigned latest (the clause moves either way)
            k = -1
            best_k = -1
            best_pos = -1
            nl = len(lits)
            idx = 2
            while idx < nl:
                x = lits[idx]
                sx = val[x >> 1]
                if x & 1:
                    sx = -sx
                if sx != -1:
                    k = idx
                    break
                p = pos[x >> 1]
                if p > best_pos:
                    best_pos = p
                    best_k = idx
                idx += 1
            if k >= 0:
                r = lits[k]
                lits[1] = r
                lits[k] = c1
                w.blocker = c2
                watches[r].append(w)
                continue
            if best_k >= 0:
                r = lits[best_k]
                lits[1] = r
                lits[best_k] = c1
                w.blocker = c2
                watches[r].append(w)
            else:
                r = c1  # binary clause: no replacement exists
                wl[j] = w
                j += 1
            rv = r >> 1
            if s2 == -1:
                confl = c
                break
            if s2 == 1:
                # missed implication: the clause is unit in the already
                # satisfied c2; record the repropagation dependency on r
                if gbs:
                    eta[rv].union_into(gamma[c2v])
                    if merge_on and reason[c2v] is None and level[c2v] > 0:
                        _merge_hook(st, c2, c)
                continue
            # implication of c2
            lvl = 0
            if gbs:
                g2 = gamma[c2v]
                g2.clear()
                for o in lits:
                    if o != c2:
                        ov = o >> 1
                        olv = level[ov]
                        if olv > lvl:
                            lvl = olv
                        g2.union_into(gamma[ov])
            else:
                for o in lits:
                    if o != c2:
                        olv = level[o >> 1]
                        if olv > lvl:
                            lvl = olv
            st.enqueue(c2, c, lvl)
            if gbs:
                eta[rv].union_into(gamma[c2v])
        if j < i:
            while i < n:
                wl[j] = wl[i]
                j += 1
                i += 1
            del wl[j:]
        if confl is not None:
            if st.pending_merges:
                repair.apply_pending_merges(st)
            return confl
        omega.popleft()
        propagated[lv] = True
        stats.propagations += 1
        if st.pending_merges:
            repair.apply_pending_merges(st)
    return None


def _merge_hook(st: State, decision_lit: int, clause: Clause):
    """A clause turned out to imply an existing decision. If the implication
    is cycle-free, hand it to the configured chunk-merging policy."""
    dv = decision_lit >> 1
    slot, gen = st.gamma[dv].items()[0]
    others = st.gamma_of_clause(clause, skip_var=dv)
    if others.contains(slot, gen):
        return  # the clause depends on the decision itself
    if st.merge == "eager":
        st.pending_merges.append((decision_lit, clause))
    else:
        repair.record_lazy_merge(st, decision_lit, clause)
