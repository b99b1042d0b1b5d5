"""Sentence- and corpus-level METEOR with exact + stemmed matching stages.

The chunk-minimizing alignment search runs in a compiled kernel when the
extension built, with a pure-Python fallback selected at import time
(force the fallback with TABDISTILL_PURE_PYTHON=1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from ..errors import EmptyInput, EmptyReference
from .stemmer import stem

if os.environ.get("TABDISTILL_PURE_PYTHON"):
    from . import _alignment as _align_mod
else:
    try:
        from . import _alignment_cy as _align_mod  # type: ignore[attr-defined]
    except ImportError:
        from . import _alignment as _align_mod

ALIGN_BACKEND = "cython" if _align_mod.__name__.endswith("_cy") else "python"


@dataclass(frozen=True)
class MeteorConfig:
    fmean_recall_weight: float = 9.0  # classic F = 10PR / (R + 9P)
    penalty_gamma: float = 0.5
    penalty_beta: float = 3.0
    matcher_stages: tuple[str, ...] = ("exact", "stemmed")
    beam_width: int = 40

    def __post_init__(self):
        if not 0.0 <= self.penalty_gamma <= 1.0:
            raise ValueError("penalty_gamma must be in [0, 1]")
        if self.penalty_beta <= 0:
            raise ValueError("penalty_beta must be positive")


def _tokenize(text: str) -> list[str]:
    return text.lower().split()


def meteor(candidate: str, reference: str, config: MeteorConfig | None = None) -> float:
    """Sentence-level METEOR score in [0, 1]."""
    config = config or MeteorConfig()
    ref_tokens = _tokenize(reference)
    if not ref_tokens:
        raise EmptyReference("reference must contain at least one token")
    cand_tokens = _tokenize(candidate)
    if not cand_tokens:
        return 0.0

    use_stems = "stemmed" in config.matcher_stages
    cand_stems = [stem(t) for t in cand_tokens] if use_stems else cand_tokens
    ref_stems = [stem(t) for t in ref_tokens] if use_stems else ref_tokens
    _exact, matches, chunks = _align_mod.align(
        cand_tokens, ref_tokens, cand_stems, ref_stems,
        use_stems=use_stems, beam_width=config.beam_width,
    )
    if matches == 0:
        return 0.0
    precision = matches / len(cand_tokens)
    recall = matches / len(ref_tokens)
    w = config.fmean_recall_weight
    fmean = (w + 1) * precision * recall / (recall + w * precision)
    penalty = config.penalty_gamma * (chunks / matches) ** config.penalty_beta
    return fmean * (1.0 - penalty)


def corpus_meteor(
    pairs: list[tuple[str, str]], config: MeteorConfig | None = None
) -> float:
    """Arithmetic mean of sentence scores over (candidate, reference) pairs."""
    if not pairs:
        raise EmptyInput("no (candidate, reference) pairs to score")
    config = config or MeteorConfig()
    return sum(meteor(c, r, config) for c, r in pairs) / len(pairs)
