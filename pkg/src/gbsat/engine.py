"""Top-level CDCL driver: propagate, decide, analyze, repair.

Three trail-repair strategies share the machinery: level-based backjumping
(ncb), level-based chronological backtracking (cb), and chunk-based graph
backtracking (gb). The simulation weight profiles run inside the gb engine
but replay the corresponding reference strategy exactly.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from gbsat import analysis, backtrack, checks, repair, watch
from gbsat.model import State, ingest_clause
from gbsat.repair import WeightProfile

MODES = ("ncb", "cb", "gb")
MERGES = ("none", "eager", "lazy")


@dataclass
class SolverConfig:
    mode: str = "gb"
    merge: str = "none"
    bb: bool = False
    restarts: bool = False
    profile: WeightProfile = field(default_factory=lambda: WeightProfile("constant"))
    candidate_limit: int = 32
    seed: int = 0
    check: bool = False
    conflict_limit: int | None = None
    blockers: bool = True
    script: list[int] | None = None
    trace: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.merge not in MERGES:
            raise ValueError(f"unknown merge policy {self.merge!r}")
        if self.mode != "gb" and (self.merge != "none" or self.bb):
            raise ValueError("chunk merging and best-chunk need mode=gb")
        if self.profile.kind in ("cb_simulation", "ncb_simulation") and (
            self.merge != "none" or self.bb
        ):
            raise ValueError("simulation profiles run without merging or best-chunk")


@dataclass
class SolveResult:
    status: str  # SAT | UNSAT | LIMIT
    model: list[int] | None
    stats: object
    time_s: float = 0.0


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence: 1 1 2 1 1 2 4 ..."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) // 2
        seq -= 1
        x = x % size
    return 1 << seq


RESTART_UNIT = 64


class Solver:
    """One single-threaded solver instance over a fixed variable universe."""

    def __init__(self, nvars: int, clauses: list[list[int]], config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        self.original = [list(c) for c in clauses]
        self.st = State(nvars, self.config)
        self.script_pos = 0
        st = self.st
        for lits in clauses:
            cleaned = ingest_clause(lits)
            if cleaned is None:
                continue  # tautology
            for l in cleaned:
                if (l >> 1) >= nvars:
                    raise ValueError(f"literal {l} out of range for {nvars} vars")
            c = st.new_clause(cleaned, learned=False)
            watch.attach_clause(st, c)
            if st.unsat:
                break

    # -- public operations -------------------------------------------------

    def solve(self) -> SolveResult:
        t0 = time.perf_counter()
        status = self._run()
        dt = time.perf_counter() - t0
        model = None
        if status == "SAT":
            st = self.st
            model = [2 * v + (0 if st.val[v] == 1 else 1) for v in range(st.nvars)]
            self._verify_model(model)
        return SolveResult(status, model, self.st.stats, dt)

    def decide(self) -> int:
        """Assign the next decision literal (scripted, else highest VSIDS
        activity with its cached phase) and open a fresh chunk for it."""
        st = self.st
        lit = None
        script = self.config.script
        if script is not None:
            while self.script_pos < len(script):
                cand = script[self.script_pos]
                self.script_pos += 1
                if st.val[cand >> 1] == 0:
                    lit = cand
                    break
        if lit is None:
            v = st.pop_decision_var()
            if v is None:
                raise RuntimeError("decide() called with all variables assigned")
            lit = 2 * v + (0 if st.phase[v] else 1)
        level = st.decisions + 1
        if st.gb:
            st.new_decision_chunk(lit, level)
        st.enqueue(lit, None, level)
        st.stats.decisions += 1
        return lit

    def maybe_restart(self) -> bool:
        if not self.config.restarts:
            return False
        if self._conflicts_since_restart < self._restart_budget:
            return False
        backtrack.restart(self.st)
        self._luby_index += 1
        self._restart_budget = RESTART_UNIT * luby(self._luby_index)
        self._conflicts_since_restart = 0
        return True

    def purge_root_satisfied(self) -> int:
        """Drop clauses satisfied by a root-level literal; reasons are kept."""
        st = self.st
        locked = {
            id(st.reason[l >> 1]) for l in st.trail if st.reason[l >> 1] is not None
        }
        removed = 0
        keep = []
        for c in st.clauses:
            sat_root = any(
                st.lit_value(l) == 1 and st.level[l >> 1] == 0 for l in c.lits
            )
            if sat_root and id(c) not in locked:
                watch.detach_clause(st, c)
                removed += 1
            else:
                keep.append(c)
        st.clauses = keep
        st.purged_root_count = st.root_count
        st.stats.purged += removed
        return removed

    # -- main loop ----------------------------------------------------------

    def _run(self) -> str:
        st = self.st
        cfg = self.config
        if st.unsat:
            return "UNSAT"
        self._luby_index = 1
        self._restart_budget = RESTART_UNIT * luby(1)
        self._conflicts_since_restart = 0
        limit = cfg.conflict_limit
        while True:
            confl = watch.bcp(st)
            if confl is None:
                if cfg.check:
                    checks.check_fixpoint(st)
                if len(st.trail) == st.nvars:
                    return "SAT"
                if self.maybe_restart():
                    continue
                if st.root_count > st.purged_root_count:
                    self.purge_root_satisfied()
                self.decide()
                continue
            st.stats.conflicts += 1
            self._conflicts_since_restart += 1
            if limit is not None and st.stats.conflicts > limit:
                return "LIMIT"
            if not self._repair(confl):
                return "UNSAT"
            if cfg.check:
                checks.check_after_repair(st)

    def _repair(self, confl) -> bool:
        st = self.st
        if st.ref_compat:
            return self._repair_levels(confl)
        return self._repair_gb(confl)

    def _repair_gb(self, confl) -> bool:
        st = self.st
        profile = self.config.profile
        while True:
            gc = st.gamma_of_clause(confl)
            if len(gc) == 0:
                return False
            if self.config.bb:
                bt_cand, learn_cand, res = repair.select_with_bb(st, confl, profile)
                gamma_star = bt_cand.chunks
            else:
                cand, res = repair.select_chunk(st, confl, profile)
                gamma_star = cand.chunks
                if res is None:
                    res = analysis.analyze(
                        st,
                        confl,
                        chunk_scope=gamma_star,
                        use_records=st.merge == "lazy",
                    )
            pre = set(st.trail) if st.trace is not None else None
            backtrack.undo(st, gamma_star)
            self._bump_and_decay(res)
            if st.trace is not None:
                st.trace.append(
                    (frozenset(res.learned), frozenset(pre - set(st.trail)))
                )
            confl = self._attach_learned(res)
            if confl is None:
                return True
            st.stats.conflicts += 1

    def _repair_levels(self, confl) -> bool:
        """ncb/cb references and the simulation profiles."""
        st = self.st
        cfg = self.config
        cb_like = cfg.mode == "cb" or cfg.profile.kind == "cb_simulation"
        while True:
            lam = st.conflict_level(confl)
            if lam == 0:
                return False
            res = analysis.analyze(st, confl, level_scope=lam)
            if cb_like:
                bt = lam - 1
            else:
                bt = max((st.level[l >> 1] for l in res.learned[1:]), default=0)
            pre = set(st.trail) if st.trace is not None else None
            backtrack.undo_levels(st, bt)
            self._bump_and_decay(res)
            if st.trace is not None:
                st.trace.append(
                    (frozenset(res.learned), frozenset(pre - set(st.trail)))
                )
            confl = self._attach_learned(res)
            if confl is None:
                return True
            st.stats.conflicts += 1

    def _attach_learned(self, res):
        """Add the learned clause, asserting its implication when it is unit
        after the undo. Returns a clause that is still falsified (possible
        with best-chunk backtracking), which the caller repairs next."""
        st = self.st
        c = st.new_clause(list(res.learned), learned=True)
        lits = c.lits
        if len(lits) == 1:
            lit = lits[0]
            sv = st.lit_value(lit)
            if sv == -1:
                return c
            if sv == 0:
                if st.gb:
                    st.gamma[lit >> 1].clear()
                st.enqueue(lit, c, 0)
            return None
        unassigned = [l for l in lits if st.lit_value(l) == 0]
        if len(unassigned) == 1:
            a = unassigned[0]
            av = a >> 1
            lvl = 0
            if st.gb:
                g = st.gamma[av]
                g.clear()
            for o in lits:
                if o != a:
                    ov = o >> 1
                    if st.level[ov] > lvl:
                        lvl = st.level[ov]
                    if st.gb:
                        g.union_into(st.gamma[ov])
            watch.attach_clause(st, c, asserting=a)
            st.enqueue(a, c, lvl)
            return None
        if not unassigned:
            watch.attach_clause(st, c)
            return c
        watch.attach_clause(st, c)
        return None

    def _bump_and_decay(self, res):
        st = self.st
        seen = set()
        for l in res.learned:
            seen.add(l >> 1)
        for l in res.pivots:
            seen.add(l >> 1)
        for v in seen:
            st.bump(v)
        st.decay()

    def _verify_model(self, model: list[int]):
        mset = set(model)
        for lits in self.original:
            if not any(l in mset for l in lits):
                raise RuntimeError(f"model does not satisfy clause {lits}")


def solve_formula(nvars: int, clauses: list[list[int]], config: SolverConfig | None = None) -> SolveResult:
    return Solver(nvars, clauses, config).solve()
