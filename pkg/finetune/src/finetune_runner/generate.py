"""Greedy generation from a trained checkpoint into the scoring file format."""

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import InputFormatMismatch, MalformedTrainingFile
from .train import load_checkpoint


@dataclass(frozen=True)
class GenerationRecord:
    example_id: str
    text: str


def read_inputs(path) -> list[tuple[str, str]]:
    """Read a JSONL inputs file; each record needs example_id plus either an
    `input` field (emitted training format) or a `text` field."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedTrainingFile(0, f"cannot read {path}: {exc}") from exc
    rows = []
    seen = set()
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedTrainingFile(lineno, f"invalid JSON: {exc}") from exc
        example_id = record.get("example_id")
        text = record.get("input", record.get("text"))
        if not isinstance(example_id, str) or not isinstance(text, str):
            raise MalformedTrainingFile(lineno, "need example_id and input/text")
        if example_id in seen:
            raise MalformedTrainingFile(lineno, f"duplicate example_id {example_id!r}")
        seen.add(example_id)
        rows.append((example_id, text))
    if not rows:
        raise MalformedTrainingFile(0, "inputs file has no records")
    return rows


def generate(checkpoint_dir, inputs_path, out_path,
             max_output_len: int = 64) -> list[GenerationRecord]:
    """Generate one record per input with greedy (beam-1) decoding and write
    them as JSONL aligned by example_id."""
    model, tokenizer, cot_mode = load_checkpoint(checkpoint_dir)
    rows = read_inputs(inputs_path)

    records = []
    with torch.no_grad():
        for example_id, text in rows:
            if cot_mode and "<CoT>" not in text:
                warnings.warn(
                    f"{example_id}: checkpoint was trained on <CoT> inputs but "
                    "this input has no <CoT> marker",
                    InputFormatMismatch,
                )
            src = torch.tensor(tokenizer.encode(text), dtype=torch.long)
            ids = model.greedy_decode(src, tokenizer.bos_id, tokenizer.eos_id,
                                      max_output_len)
            records.append(GenerationRecord(example_id, tokenizer.decode(ids)))

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps({"example_id": record.example_id,
                                 "text": record.text}) + "\n")
    return records
