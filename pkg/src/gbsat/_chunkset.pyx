# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled chunk set: word-indexed bitset over slots plus a generation array.

Same contract as gbsat._chunkset_py.ChunkSet; this is the hot kernel for the
set operations performed inside propagation and backtracking.
"""
from libc.stdlib cimport calloc, free
from libc.string cimport memcpy, memset

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef class ChunkSet:
    cdef unsigned long long *words
    cdef unsigned int *gens
    cdef int nwords
    cdef int n

    def __cinit__(self):
        self.nwords = 1
        self.words = <unsigned long long *> calloc(1, sizeof(unsigned long long))
        self.gens = <unsigned int *> calloc(64, sizeof(unsigned int))
        self.n = 0

    def __dealloc__(self):
        if self.words != NULL:
            free(self.words)
        if self.gens != NULL:
            free(self.gens)

    cdef void _grow(self, int need_words):
        cdef int nw = self.nwords
        while nw < need_words:
            nw *= 2
        cdef unsigned long long *w = <unsigned long long *> calloc(nw, sizeof(unsigned long long))
        cdef unsigned int *g = <unsigned int *> calloc(nw * 64, sizeof(unsigned int))
        memcpy(w, self.words, self.nwords * sizeof(unsigned long long))
        memcpy(g, self.gens, self.nwords * 64 * sizeof(unsigned int))
        free(self.words)
        free(self.gens)
        self.words = w
        self.gens = g
        self.nwords = nw

    cpdef void add(self, int slot, unsigned int gen):
        cdef int wi = slot >> 6
        if wi >= self.nwords:
            self._grow(wi + 1)
        cdef unsigned long long bit = 1ULL << (slot & 63)
        if self.words[wi] & bit:
            if gen > self.gens[slot]:
                self.gens[slot] = gen
        else:
            self.words[wi] |= bit
            self.gens[slot] = gen
            self.n += 1

    cpdef void discard(self, int slot):
        cdef int wi = slot >> 6
        if wi >= self.nwords:
            return
        cdef unsigned long long bit = 1ULL << (slot & 63)
        if self.words[wi] & bit:
            self.words[wi] &= ~bit
            self.gens[slot] = 0
            self.n -= 1

    cpdef void clear(self):
        memset(self.words, 0, self.nwords * sizeof(unsigned long long))
        memset(self.gens, 0, self.nwords * 64 * sizeof(unsigned int))
        self.n = 0

    cpdef ChunkSet copy(self):
        cdef ChunkSet out = ChunkSet()
        out.copy_from(self)
        return out

    cpdef void copy_from(self, ChunkSet other):
        if other.nwords > self.nwords:
            self._grow(other.nwords)
        memcpy(self.words, other.words, other.nwords * sizeof(unsigned long long))
        memcpy(self.gens, other.gens, other.nwords * 64 * sizeof(unsigned int))
        if self.nwords > other.nwords:
            memset(self.words + other.nwords, 0,
                   (self.nwords - other.nwords) * sizeof(unsigned long long))
            memset(self.gens + other.nwords * 64, 0,
                   (self.nwords - other.nwords) * 64 * sizeof(unsigned int))
        self.n = other.n

    cpdef void union_into(self, ChunkSet other):
        if other.nwords > self.nwords:
            self._grow(other.nwords)
        cdef int wi, slot
        cdef unsigned long long w, bit
        for wi in range(other.nwords):
            w = other.words[wi]
            while w:
                slot = (wi << 6) + __builtin_ctzll(w)
                bit = w & (~w + 1)
                w ^= bit
                if self.words[wi] & bit:
                    if other.gens[slot] > self.gens[slot]:
                        self.gens[slot] = other.gens[slot]
                else:
                    self.words[wi] |= bit
                    self.gens[slot] = other.gens[slot]
                    self.n += 1

    cpdef bint contains(self, int slot, unsigned int gen):
        cdef int wi = slot >> 6
        if wi >= self.nwords:
            return False
        if self.words[wi] & (1ULL << (slot & 63)):
            return self.gens[slot] == gen
        return False

    cpdef unsigned int gen_of(self, int slot):
        cdef int wi = slot >> 6
        if wi >= self.nwords:
            return 0
        if self.words[wi] & (1ULL << (slot & 63)):
            return self.gens[slot]
        return 0

    cpdef bint subset_of(self, ChunkSet other):
        cdef int wi, slot
        cdef unsigned long long w, ow, bit
        for wi in range(self.nwords):
            w = self.words[wi]
            if w == 0:
                continue
            ow = other.words[wi] if wi < other.nwords else 0
            if w & ~ow:
                return False
            while w:
                slot = (wi << 6) + __builtin_ctzll(w)
                w &= w - 1
                if other.gens[slot] != self.gens[slot]:
                    return False
        return True

    def subset_of_live(self, ChunkSet other, gens):
        cdef int wi, slot
        cdef unsigned long long w
        cdef unsigned int g
        cdef int ng = len(gens)
        for wi in range(self.nwords):
            w = self.words[wi]
            while w:
                slot = (wi << 6) + __builtin_ctzll(w)
                w &= w - 1
                g = self.gens[slot]
                if slot >= ng or <unsigned int> gens[slot] != g:
                    continue
                if other.gen_of(slot) != g:
                    return False
        return True

    cpdef bint intersects(self, ChunkSet other):
        cdef int nw = self.nwords if self.nwords < other.nwords else other.nwords
        cdef int wi, slot
        cdef unsigned long long w
        for wi in range(nw):
            w = self.words[wi] & other.words[wi]
            while w:
                slot = (wi << 6) + __builtin_ctzll(w)
                w &= w - 1
                if self.gens[slot] == other.gens[slot]:
                    return True
        return False

    def items(self):
        cdef list out = []
        cdef int wi, slot
        cdef unsigned long long w
        for wi in range(self.nwords):
            w = self.words[wi]
            while w:
                slot = (wi << 6) + __builtin_ctzll(w)
                w &= w - 1
                out.append((slot, self.gens[slot]))
        return out

    def __len__(self):
        return self.n

    def __bool__(self):
        return self.n > 0

    def __eq__(self, other):
        if not isinstance(other, ChunkSet):
            return NotImplemented
        return self.items() == (<ChunkSet> other).items()

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        inner = ", ".join(f"{s}@{g}" for s, g in self.items())
        return f"ChunkSet({{{inner}}})"
