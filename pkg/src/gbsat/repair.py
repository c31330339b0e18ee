"""Backtrack-candidate enumeration, weight evaluation and chunk merging.

A candidate is a set of chunks meeting the conflict in exactly one chunk. A
candidate is safe to backtrack if its analysis learns a clause absent from
the formula, or if its conflict chunk sits at the conflict's level. Selection
minimizes the user weight of the literals that would be unassigned.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from gbsat import backtrack
from gbsat.analysis import AnalysisResult, analyze, is_new_clause
from gbsat.chunkset import ChunkSet
from gbsat.model import Clause, State, to_dimacs

PROP_WEIGHT = 8.0
QUEUE_WEIGHT = 1.0
POSITION_EPSILON = 1.0 / 16.0


@dataclass
class ConflictCtx:
    clause: Clause
    level: int
    ncb_level: int | None = None


class WeightProfile:
    """Literal cost function; candidate cost is the summed cost of the union
    of the candidate chunks' member literals."""

    KINDS = (
        "constant",
        "propagation_minimizing",
        "cb_simulation",
        "ncb_simulation",
        "user_table",
    )

    def __init__(self, kind: str, table: dict[int, float] | None = None,
                 epsilon: float = POSITION_EPSILON):
        if kind not in self.KINDS:
            raise ValueError(f"unknown weight profile {kind!r}")
        self.kind = kind
        self.table = table or {}
        self.epsilon = epsilon

    def literal_weight(self, st: State, lit: int, ctx: ConflictCtx | None) -> float:
        kind = self.kind
        v = lit >> 1
        if kind == "constant":
            return 1.0
        if kind == "propagation_minimizing":
            return PROP_WEIGHT if st.propagated[v] else QUEUE_WEIGHT
        if kind == "cb_simulation":
            return -1.0 if st.level[v] >= ctx.level else 1.0
        if kind == "ncb_simulation":
            return -1.0 if st.level[v] > ctx.ncb_level else 1.0
        return self.table.get(lit, 1.0)

    def weight_of(self, st: State, slots, ctx: ConflictCtx | None) -> float:
        members: set[int] = set()
        alloc = st.alloc
        for slot in slots:
            members |= alloc.members[slot]
        total = 0.0
        for lit in members:
            total += self.literal_weight(st, lit, ctx)
        if self.kind == "propagation_minimizing" and st.trail:
            # earlier decisions are slightly penalized, nudging selection
            # toward recent chunks when member weights tie
            npi = float(len(st.trail))
            eps = self.epsilon
            pos = st.pos
            for slot in slots:
                dpos = pos[alloc.decision[slot] >> 1]
                total += eps * (1.0 - dpos / npi)
        return total

    @staticmethod
    def from_spec(spec: str) -> "WeightProfile":
        if spec in ("const", "constant"):
            return WeightProfile("constant")
        if spec in ("prop", "propagation_minimizing"):
            return WeightProfile("propagation_minimizing")
        if spec in ("cb", "cb_simulation"):
            return WeightProfile("cb_simulation")
        if spec in ("ncb", "ncb_simulation"):
            return WeightProfile("ncb_simulation")
        if spec.startswith("file:"):
            return WeightProfile("user_table", table=load_weight_table(spec[5:]))
        raise ValueError(f"unknown weight spec {spec!r}")


def load_weight_table(path: str) -> dict[int, float]:
    """One `<signed DIMACS literal> <weight>` entry per line, `#` comments."""
    table: dict[int, float] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"malformed weight entry: {raw.rstrip()}")
            d = int(parts[0])
            if d == 0:
                raise ValueError("literal 0 in weight table")
            code = 2 * (abs(d) - 1) + (0 if d > 0 else 1)
            table[code] = float(parts[1])
    return table


def evaluate_weight(st: State, profile: WeightProfile, chunks, ctx=None) -> float:
    """Weight of the union of the given chunks under the profile."""
    if isinstance(chunks, ChunkSet):
        slots = [s for s, _g in chunks.items()]
    else:
        slots = list(chunks)
    return profile.weight_of(st, slots, ctx)


@dataclass
class BacktrackCandidate:
    chunks: ChunkSet
    slots: tuple[int, ...]
    weight: float
    conf_slot: int  # the single chunk shared with the conflict
    conf_level: int
    level: int  # max chunk level over members
    via_lazy: bool = False
    analysis: AnalysisResult | None = None
    learns_new: bool | None = None

    def at_level(self, conflict_level: int) -> bool:
        return self.conf_level == conflict_level


def _make_candidate(st, profile, ctx, conf_slot, extra, via_lazy) -> BacktrackCandidate:
    alloc = st.alloc
    cs = ChunkSet()
    cs.add(conf_slot, alloc.gens[conf_slot])
    slots = [conf_slot]
    for t in extra:
        cs.add(t, alloc.gens[t])
        slots.append(t)
    slots_t = tuple(sorted(set(slots)))
    w = profile.weight_of(st, slots_t, ctx)
    lvl = max(alloc.level[s] for s in slots_t)
    return BacktrackCandidate(cs, slots_t, w, conf_slot, alloc.level[conf_slot], lvl,
                              via_lazy=via_lazy)


def _raw_candidates(st: State, conflict: Clause, profile: WeightProfile,
                    ctx: ConflictCtx) -> list[BacktrackCandidate]:
    """Candidates sorted by weight (conflict-chunk level breaks ties toward
    recent chunks), superset-pruned and capped at the configured limit."""
    gc = st.gamma_of_clause(conflict)
    items = gc.items()
    if not items:
        return []
    alloc = st.alloc
    cands: list[BacktrackCandidate] = []
    for slot, _gen in items:
        rec = st.lazy_records.get(alloc.decision[slot] >> 1) if st.merge == "lazy" else None
        targets = _validate_record(st, alloc.decision[slot], rec) if rec is not None else None
        if targets:
            for t in targets:
                cands.append(_make_candidate(st, profile, ctx, slot, (t,), True))
        else:
            cands.append(_make_candidate(st, profile, ctx, slot, (), False))
    # superset pruning: with non-negative weights a superset never wins
    slot_sets = [frozenset(c.slots) for c in cands]
    keep = []
    for i, c in enumerate(cands):
        si = slot_sets[i]
        dominated = any(
            j != i and slot_sets[j] < si or (slot_sets[j] == si and j < i)
            for j in range(len(cands))
        )
        if not dominated:
            keep.append(c)
    keep.sort(key=lambda c: (c.weight, -c.conf_level, c.slots))
    limit = st.config.candidate_limit
    if len(keep) > limit:
        plain = [c for c in keep if not c.via_lazy]
        lazy = [c for c in keep if c.via_lazy]
        if len(plain) >= limit:
            keep = plain[:limit]
        else:
            keep = sorted(plain + lazy[: limit - len(plain)],
                          key=lambda c: (c.weight, -c.conf_level, c.slots))
    st.stats.candidates += len(keep)
    return keep


def _validate_record(st: State, decision_lit: int, clause: Clause) -> list[int] | None:
    """Target chunk slots of a recorded missed implication, or None if the
    record no longer implies the decision or would create a cycle."""
    dv = decision_lit >> 1
    if st.reason[dv] is not None or st.val[dv] == 0:
        return None
    for o in clause.lits:
        if o != decision_lit and st.lit_value(o) != -1:
            return None
    others = st.gamma_of_clause(clause, skip_var=dv)
    slot, gen = st.gamma[dv].items()[0]
    if others.contains(slot, gen):
        return None
    return [s for s, _g in others.items()]


def enumerate_candidates(st: State, conflict: Clause,
                         profile: WeightProfile) -> list[BacktrackCandidate]:
    """Safe backtrack candidates for the conflict, lightest first.

    Candidates at the conflict's chunk level are safe outright and skip the
    novelty check; the rest must produce a learned clause absent from the
    formula and are dropped otherwise.
    """
    ctx = make_ctx(st, conflict, profile)
    cands = _raw_candidates(st, conflict, profile, ctx)
    delta_c = ctx.level
    out = []
    for cand in cands:
        if cand.at_level(delta_c):
            out.append(cand)
            continue
        res = analyze(st, conflict, chunk_scope=cand.chunks,
                      use_records=st.merge == "lazy")
        if res is None:
            continue
        cand.analysis = res
        cand.learns_new = is_new_clause(st, res.learned)
        if cand.learns_new:
            out.append(cand)
    return out


def make_ctx(st: State, conflict: Clause, profile: WeightProfile) -> ConflictCtx:
    ctx = ConflictCtx(conflict, st.conflict_level(conflict))
    if profile.kind == "ncb_simulation":
        res = analyze(st, conflict, level_scope=ctx.level)
        others = res.learned[1:]
        ctx.ncb_level = max((st.level[l >> 1] for l in others), default=0)
    return ctx


def select_chunk(st: State, conflict: Clause, profile: WeightProfile):
    """Minimum-weight safe candidate; returns (candidate, analysis or None).

    Novelty is evaluated lazily while walking candidates in weight order;
    exhaustion falls back to the chunk at the conflict's level, which is
    always safe.
    """
    ctx = ConflictCtx(conflict, st.conflict_level(conflict))
    cands = _raw_candidates(st, conflict, profile, ctx)
    if not cands:
        return None, None
    delta_c = ctx.level
    use_rec = st.merge == "lazy"
    for cand in cands:
        if cand.at_level(delta_c):
            if cand.via_lazy:
                res = analyze(st, conflict, chunk_scope=cand.chunks, use_records=True)
                if res is None:
                    continue
                cand.analysis = res
                return cand, res
            return cand, None
        res = analyze(st, conflict, chunk_scope=cand.chunks, use_records=use_rec)
        if res is None:
            continue
        if is_new_clause(st, res.learned):
            cand.analysis = res
            cand.learns_new = True
            return cand, res
        cand.learns_new = False
    return _at_level_fallback(st, conflict, profile, ctx), None


def _at_level_fallback(st: State, conflict: Clause, profile: WeightProfile,
                       ctx: ConflictCtx) -> BacktrackCandidate:
    gc = st.gamma_of_clause(conflict)
    alloc = st.alloc
    for slot, _gen in gc.items():
        if alloc.level[slot] == ctx.level:
            return _make_candidate(st, profile, ctx, slot, (), False)
    raise AssertionError("conflict has no chunk at its own level")


def select_with_bb(st: State, conflict: Clause, profile: WeightProfile):
    """Best-chunk selection: if any candidate learns a new clause, backtrack
    the globally lightest candidate while learning through the other one.

    Returns (backtrack candidate, learning candidate, analysis).
    """
    ctx = ConflictCtx(conflict, st.conflict_level(conflict))
    cands = _raw_candidates(st, conflict, profile, ctx)
    if not cands:
        return None, None, None
    bt0 = cands[0]
    delta_c = ctx.level
    use_rec = st.merge == "lazy"
    fallback = None
    for cand in cands:
        res = analyze(st, conflict, chunk_scope=cand.chunks, use_records=use_rec)
        if res is None:
            continue
        if is_new_clause(st, res.learned):
            cand.analysis = res
            cand.learns_new = True
            return bt0, cand, res
        cand.learns_new = False
        if fallback is None and cand.at_level(delta_c):
            fallback = (cand, res)
    if fallback is None:
        cand = _at_level_fallback(st, conflict, profile, ctx)
        res = analyze(st, conflict, chunk_scope=cand.chunks, use_records=use_rec)
        fallback = (cand, res)
    return fallback[0], fallback[0], fallback[1]


def record_lazy_merge(st: State, decision_lit: int, clause: Clause):
    """Remember a cycle-free missed implication of a decision for later
    candidate expansion; at most one record per decision, the one with the
    lighter target set wins."""
    targets = _validate_record(st, decision_lit, clause)
    if targets is None:
        return
    dv = decision_lit >> 1
    prev = st.lazy_records.get(dv)
    if prev is not None:
        prev_targets = _validate_record(st, decision_lit, prev)
        if prev_targets is not None:
            profile = st.config.profile
            if profile.weight_of(st, prev_targets, None) <= profile.weight_of(
                st, targets, None
            ):
                return
    st.lazy_records[dv] = clause


def apply_pending_merges(st: State):
    pending = st.pending_merges
    st.pending_merges = []
    for decision_lit, clause in pending:
        eager_merge(st, decision_lit, clause)


def eager_merge(st: State, decision_lit: int, clause: Clause) -> bool:
    """Re-justify a decision by its missed implication: its chunk dissolves
    into the implying clause's chunks, the change ripples through every
    chunk/cross-chunk record, and the trail is stably re-sorted."""
    targets = _validate_record(st, decision_lit, clause)
    if targets is None:
        return False
    dv = decision_lit >> 1
    alloc = st.alloc
    slot, gen = st.gamma[dv].items()[0]
    new_g = st.gamma_of_clause(clause, skip_var=dv).copy()
    new_items = new_g.items()

    dependents = list(alloc.members[slot])
    st.reason[dv] = clause
    for lit in st.trail:
        v = lit >> 1
        g = st.gamma[v]
        if g.gen_of(slot) == gen:
            g.discard(slot)
            g.union_into(new_g)
        e = st.eta[v]
        eg = e.gen_of(slot)
        if eg:
            e.discard(slot)
            if eg == gen:
                e.union_into(new_g)
    for lit in dependents:
        for s, _g in new_items:
            alloc.members[s].add(lit)
    alloc.retire(slot)
    st.lazy_records.pop(dv, None)
    backtrack.retopo_relevel(st)
    st.stats.merges += 1
    if st.config.check:
        from gbsat import checks

        checks.check_after_merge(st)
    return True


def format_weight_table(table: dict[int, float]) -> str:
    lines = [f"{to_dimacs(code)} {w}" for code, w in sorted(table.items())]
    return "\n".join(lines) + "\n"
