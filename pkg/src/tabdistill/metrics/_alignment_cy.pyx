# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled unigram alignment search.

Same algorithm and results as the pure-Python fallback in _alignment.py:
a per-candidate-token DP over (reference bitmask, last matched pair)
states, exhaustive for small match counts with a beam fallback.
"""

DEF EXHAUSTIVE_MATCH_LIMIT = 12
DEF STATE_CAP = 20000


cdef int _match_upper_bound(list cand_keys, list ref_keys):
    cdef dict remaining = {}
    cdef int total = 0
    for k in cand_keys:
        remaining[k] = remaining.get(k, 0) + 1
    for k in ref_keys:
        if remaining.get(k, 0) > 0:
            remaining[k] -= 1
            total += 1
    return total


def align(list cand, list ref, list cand_stems, list ref_stems,
          bint use_stems=True, int beam_width=40):
    """Return (exact_matches, total_matches, chunks) for the best alignment."""
    cdef int n = len(cand)
    cdef int m = len(ref)
    if n == 0 or m == 0:
        return 0, 0, 0

    cdef list exact_edges = []
    cdef list stem_edges = []
    cdef int i, j
    for i in range(n):
        exact_edges.append([j for j in range(m) if ref[j] == cand[i]])
        if use_stems:
            stem_edges.append(
                [j for j in range(m)
                 if ref[j] != cand[i] and ref_stems[j] == cand_stems[i]]
            )
        else:
            stem_edges.append([])

    cdef int bound = _match_upper_bound(
        list(cand_stems) if use_stems else list(cand),
        list(ref_stems) if use_stems else list(ref),
    )
    cdef bint exhaustive = bound <= EXHAUSTIVE_MATCH_LIMIT

    cdef dict states = {(0, -2, -2, 0): 0}
    cdef dict nxt
    cdef int last_i, last_j, exact, chunks, step
    cdef object mask, new_key, old

    for i in range(n):
        nxt = {}
        for (mask, last_i, last_j, exact), chunks in states.items():
            old = nxt.get((mask, last_i, last_j, exact))
            if old is None or chunks < <int>old:
                nxt[(mask, last_i, last_j, exact)] = chunks
            for j in exact_edges[i]:
                if not mask & (1 << j):
                    step = 0 if (last_i == i - 1 and last_j == j - 1) else 1
                    new_key = (mask | (1 << j), i, j, exact + 1)
                    old = nxt.get(new_key)
                    if old is None or chunks + step < <int>old:
                        nxt[new_key] = chunks + step
            for j in stem_edges[i]:
                if not mask & (1 << j):
                    step = 0 if (last_i == i - 1 and last_j == j - 1) else 1
                    new_key = (mask | (1 << j), i, j, exact)
                    old = nxt.get(new_key)
                    if old is None or chunks + step < <int>old:
                        nxt[new_key] = chunks + step
        if (not exhaustive and len(nxt) > beam_width) or len(nxt) > STATE_CAP:
            keep = beam_width if beam_width > 1 else 1
            ranked = sorted(
                nxt.items(),
                key=lambda kv: (kv[0][3], bin(kv[0][0]).count("1"), -kv[1]),
                reverse=True,
            )
            nxt = dict(ranked[:keep])
        states = nxt

    cdef int best_exact = -1
    cdef int best_total = -1
    cdef int best_chunks = 0
    cdef int total
    for (mask, last_i, last_j, exact), chunks in states.items():
        total = bin(mask).count("1")
        if (exact, total, -chunks) > (best_exact, best_total, -best_chunks):
            best_exact = exact
            best_total = total
            best_chunks = chunks
    return best_exact, best_total, best_chunks
