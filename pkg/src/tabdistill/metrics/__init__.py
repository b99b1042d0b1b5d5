"""Surface-level METEOR scoring and faithfulness-label aggregation."""

from .meteor import ALIGN_BACKEND, MeteorConfig, corpus_meteor, meteor
from .report import (
    FaithfulnessLabel,
    ScoreReport,
    build_report,
    faithfulness_accuracy,
    read_labels,
    read_text_records,
    render_report,
)
from .stemmer import stem

__all__ = [
    "ALIGN_BACKEND",
    "MeteorConfig",
    "corpus_meteor",
    "meteor",
    "FaithfulnessLabel",
    "ScoreReport",
    "build_report",
    "faithfulness_accuracy",
    "read_labels",
    "read_text_records",
    "render_report",
    "stem",
]
