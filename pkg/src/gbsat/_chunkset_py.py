"""Pure-Python chunk set: a sparse set of (slot, generation) pairs.

Slots are recycled when a chunk is undone; the generation counter is bumped
on retirement so stale entries (recorded under an older generation) never
compare equal to a freshly allocated chunk reusing the same slot.
"""
from __future__ import annotations


class ChunkSet:
    __slots__ = ("d",)

    def __init__(self):
        self.d = {}

    def add(self, slot, gen):
        cur = self.d.get(slot, 0)
        if gen > cur:
            self.d[slot] = gen

    def discard(self, slot):
        self.d.pop(slot, None)

    def clear(self):
        self.d.clear()

    def copy(self):
        out = ChunkSet()
        out.d = dict(self.d)
        return out

    def copy_from(self, other):
        self.d = dict(other.d)

    def union_into(self, other):
        """self |= other; on a slot collision the newer generation wins."""
        d = self.d
        for slot, gen in other.d.items():
            cur = d.get(slot, 0)
            if gen > cur:
                d[slot] = gen

    def contains(self, slot, gen):
        return self.d.get(slot, 0) == gen

    def gen_of(self, slot):
        return self.d.get(slot, 0)

    def subset_of(self, other):
        od = other.d
        for slot, gen in self.d.items():
            if od.get(slot, 0) != gen:
                return False
        return True

    def subset_of_live(self, other, gens):
        """Subset test that skips members retired since they were recorded."""
        od = other.d
        for slot, gen in self.d.items():
            if slot >= len(gens) or gens[slot] != gen:
                continue
            if od.get(slot, 0) != gen:
                return False
        return True

    def intersects(self, other):
        a, b = self.d, other.d
        if len(b) < len(a):
            a, b = b, a
        for slot, gen in a.items():
            if b.get(slot, 0) == gen:
                return True
        return False

    def items(self):
        return sorted(self.d.items())

    def __len__(self):
        return len(self.d)

    def __bool__(self):
        return bool(self.d)

    def __eq__(self, other):
        return isinstance(other, ChunkSet) and self.d == other.d

    def __hash__(self):
        return hash(frozenset(self.d.items()))

    def __repr__(self):
        inner = ", ".join(f"{s}@{g}" for s, g in self.items())
        return f"ChunkSet({{{inner}}})"
