"""Faithfulness-label aggregation and score reports.

Generations and references are JSONL files of {"example_id", "text"};
labels are JSONL of {"example_id", "judge", "label"} with label 0
(refuted) or 1 (entailed). The entailment judges themselves run
externally; only their 0/1 output is aggregated here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import AlignmentFailure, EmptyInput, IoFailure
from .meteor import MeteorConfig, corpus_meteor


@dataclass(frozen=True)
class FaithfulnessLabel:
    example_id: str
    label: int
    judge_name: str

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class ScoreReport:
    run_name: str
    n_examples: int
    meteor_mean: float
    judge_accuracy: dict[str, float]


def faithfulness_accuracy(labels: list[FaithfulnessLabel]) -> dict[str, float]:
    """Per-judge accuracy: 100 x mean(label), rounded to 2 decimals."""
    if not labels:
        raise EmptyInput("no faithfulness labels")
    by_judge: dict[str, list[int]] = {}
    for lab in labels:
        by_judge.setdefault(lab.judge_name, []).append(lab.label)
    return {
        judge: round(100.0 * sum(vals) / len(vals), 2)
        for judge, vals in sorted(by_judge.items())
    }


def _read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"file does not exist: {path}")
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def read_text_records(path: str | Path) -> dict[str, str]:
    """Load a generations/references file into {example_id: text}."""
    records = {}
    for obj in _read_jsonl(path):
        records[str(obj["example_id"])] = str(obj["text"])
    return records


def read_labels(path: str | Path) -> list[FaithfulnessLabel]:
    return [
        FaithfulnessLabel(
            example_id=str(obj["example_id"]),
            label=int(obj["label"]),
            judge_name=str(obj["judge"]),
        )
        for obj in _read_jsonl(path)
    ]


def build_report(
    run_name: str,
    generations_file: str | Path,
    references_file: str | Path,
    labels_file: str | Path | None = None,
    config: MeteorConfig | None = None,
) -> ScoreReport:
    """Join generations with references by example_id and score the run."""
    generations = read_text_records(generations_file)
    references = read_text_records(references_file)
    mismatched = sorted(set(generations) ^ set(references))
    if mismatched:
        raise AlignmentFailure(mismatched)
    if not generations:
        raise EmptyInput("no examples to score")
    pairs = [(generations[eid], references[eid]) for eid in sorted(generations)]
    judge_accuracy: dict[str, float] = {}
    if labels_file is not None:
        judge_accuracy = faithfulness_accuracy(read_labels(labels_file))
    return ScoreReport(
        run_name=run_name,
        n_examples=len(pairs),
        meteor_mean=corpus_meteor(pairs, config),
        judge_accuracy=judge_accuracy,
    )


def render_report(report: ScoreReport) -> str:
    """Fixed-format text rendering of a ScoreReport."""
    lines = [
        f"run:      {report.run_name}",
        f"examples: {report.n_examples}",
        "",
        f"{'metric':<20}{'score':>10}",
        "-" * 30,
        f"{'METEOR':<20}{report.meteor_mean:>10.4f}",
    ]
    for judge, acc in sorted(report.judge_accuracy.items()):
        lines.append(f"{judge + '-Acc':<20}{acc:>10.2f}")
    return "\n".join(lines)
