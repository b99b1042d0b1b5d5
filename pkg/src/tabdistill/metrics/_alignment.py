"""Pure-Python unigram alignment search (fallback for the compiled kernel).

Finds, between candidate and reference token lists, an alignment that
(1) maximizes the number of exact matches, (2) given that, maximizes total
matches including stem matches, and (3) given that, minimizes the number
of chunks (runs of contiguous matched positions on both sides).

The search is a level-per-candidate-token dynamic program over states
(matched-reference bitmask, last matched pair). It is exhaustive whenever
the number of achievable matches is small; longer inputs fall back to a
beam, keeping the states with the best (exact, total, -chunks) ranking.
"""

from __future__ import annotations

EXHAUSTIVE_MATCH_LIMIT = 12
STATE_CAP = 20000


def _match_upper_bound(cand_keys: list[str], ref_keys: list[str]) -> int:
    counts: dict[str, int] = {}
    for k in cand_keys:
        counts[k] = counts.get(k, 0) + 1
    total = 0
    remaining = dict(counts)
    for k in ref_keys:
        if remaining.get(k, 0) > 0:
            remaining[k] -= 1
            total += 1
    return total


def align(
    cand: list[str],
    ref: list[str],
    cand_stems: list[str],
    ref_stems: list[str],
    use_stems: bool = True,
    beam_width: int = 40,
) -> tuple[int, int, int]:
    """Return (exact_matches, total_matches, chunks) for the best alignment."""
    n, m = len(cand), len(ref)
    if n == 0 or m == 0:
        return 0, 0, 0

    exact_edges: list[list[int]] = [
        [j for j in range(m) if ref[j] == cand[i]] for i in range(n)
    ]
    if use_stems:
        stem_edges: list[list[int]] = [
            [j for j in range(m) if ref[j] != cand[i] and ref_stems[j] == cand_stems[i]]
            for i in range(n)
        ]
    else:
        stem_edges = [[] for _ in range(n)]

    bound = _match_upper_bound(
        [cand_stems[i] if use_stems else cand[i] for i in range(n)],
        [ref_stems[j] if use_stems else ref[j] for j in range(m)],
    )
    exhaustive = bound <= EXHAUSTIVE_MATCH_LIMIT

    # state key: (ref mask, last matched cand pos, last matched ref pos, exact)
    # value: minimal chunks reaching that state
    states: dict[tuple[int, int, int, int], int] = {(0, -2, -2, 0): 0}
    for i in range(n):
        nxt: dict[tuple[int, int, int, int], int] = {}

        def push(key, chunks):
            old = nxt.get(key)
            if old is None or chunks < old:
                nxt[key] = chunks

        for (mask, last_i, last_j, exact), chunks in states.items():
            push((mask, last_i, last_j, exact), chunks)  # skip candidate token i
            for j in exact_edges[i]:
                if not mask & (1 << j):
                    contiguous = last_i == i - 1 and last_j == j - 1
                    push(
                        (mask | (1 << j), i, j, exact + 1),
                        chunks + (0 if contiguous else 1),
                    )
            for j in stem_edges[i]:
                if not mask & (1 << j):
                    contiguous = last_i == i - 1 and last_j == j - 1
                    push(
                        (mask | (1 << j), i, j, exact),
                        chunks + (0 if contiguous else 1),
                    )
        if (not exhaustive and len(nxt) > beam_width) or len(nxt) > STATE_CAP:
            keep = max(beam_width, 1)
            ranked = sorted(
                nxt.items(),
                key=lambda kv: (kv[0][3], _popcount(kv[0][0]), -kv[1]),
                reverse=True,
            )
            nxt = dict(ranked[:keep])
        states = nxt

    best = (-1, -1, 0)  # (exact, total, -chunks)
    for (mask, _li, _lj, exact), chunks in states.items():
        total = _popcount(mask)
        key = (exact, total, -chunks)
        if key > best:
            best = key
    return best[0], best[1], -best[2]


def _popcount(x: int) -> int:
    return bin(x).count("1")
