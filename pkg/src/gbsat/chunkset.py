"""Chunk set backend selection: compiled kernel if available, else pure Python.

Set GBSAT_PURE_PYTHON=1 to force the fallback (used by the kernel benchmark
and by differential tests between the two implementations).
"""
import os

if os.environ.get("GBSAT_PURE_PYTHON"):
    from gbsat._chunkset_py import ChunkSet

    BACKEND = "python"
else:
    try:
        from gbsat._chunkset import ChunkSet  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build environment
        from gbsat._chunkset_py import ChunkSet  # type: ignore[no-redef]

        BACKEND = "python"


def chunkset_subset(a, b, gens=None) -> bool:
    """True iff every live chunk of `a` is in `b`.

    Without `gens` (the allocator's generation table) staleness cannot be
    observed, so the exact (slot, generation) subset test is used.
    """
    if gens is None:
        return a.subset_of(b)
    return a.subset_of_live(b, gens)


def chunkset_union(a, b):
    """Exact set union of two chunk sets; inputs are unmodified."""
    out = a.copy()
    out.union_into(b)
    return out
