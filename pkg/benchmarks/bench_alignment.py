"""Compare the compiled alignment kernel against the pure-Python fallback.

Scores a batch of synthetic candidate/reference pairs with both backends,
checks they produce identical alignments, and reports wall-clock time.

Usage: python benchmarks/bench_alignment.py [--pairs N] [--seed S]
"""

import argparse
import random
import time

from tabdistill.metrics import stem
from tabdistill.metrics import _alignment as pure

try:
    from tabdistill.metrics import _alignment_cy as compiled
except ImportError:
    compiled = None

VOCAB = [
    "model", "models", "accuracy", "table", "shows", "showed", "best",
    "result", "results", "score", "scores", "highest", "lowest", "row",
    "column", "value", "values", "compared", "comparing", "baseline",
    "improves", "improved", "performance", "training", "trained", "test",
]


def make_pair(rng):
    ref_len = rng.randint(8, 22)
    reference = [rng.choice(VOCAB) for _ in range(ref_len)]
    candidate = []
    for word in reference:
        roll = rng.random()
        if roll < 0.55:
            candidate.append(word)
        elif roll < 0.75:
            candidate.append(rng.choice(VOCAB))
    rng.shuffle(candidate)
    if not candidate:
        candidate = [rng.choice(VOCAB)]
    return candidate, reference


def run(backend, pairs):
    start = time.perf_counter()
    out = []
    for cand, ref, cand_stems, ref_stems in pairs:
        out.append(backend.align(cand, ref, cand_stems, ref_stems))
    return out, time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    pairs = []
    for _ in range(args.pairs):
        cand, ref = make_pair(rng)
        pairs.append((cand, ref, [stem(w) for w in cand], [stem(w) for w in ref]))

    pure_out, pure_t = run(pure, pairs)
    print(f"pure python : {pure_t:.3f}s  ({args.pairs / pure_t:.0f} pairs/s)")

    if compiled is None:
        print("compiled    : not built (install with a C compiler to enable)")
        return

    comp_out, comp_t = run(compiled, pairs)
    print(f"compiled    : {comp_t:.3f}s  ({args.pairs / comp_t:.0f} pairs/s)")
    print(f"speedup     : {pure_t / comp_t:.2f}x")

    mismatches = sum(1 for a, b in zip(pure_out, comp_out) if a != b)
    print(f"agreement   : {args.pairs - mismatches}/{args.pairs} identical")
    if mismatches:
        raise SystemExit("backends disagree")


if __name__ == "__main__":
    main()
