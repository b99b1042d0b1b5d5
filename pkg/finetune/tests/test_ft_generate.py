import json

import pytest

from finetune_runner import (
    InputFormatMismatch,
    MalformedTrainingFile,
    TrainConfig,
    generate,
    train,
)
from finetune_runner.generate import read_inputs

from .ft_fixtures import write_training_file


@pytest.fixture
def checkpoint(training_file, tmp_path):
    cfg = TrainConfig(str(training_file), str(tmp_path / "ckpt"), max_steps=5, seed=7)
    _curve, out_dir = train(cfg)
    return out_dir


def write_inputs(path, training_file, n=10):
    lines = training_file.read_text().splitlines()[:n]
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            record = json.loads(line)
            fh.write(json.dumps({"example_id": record["example_id"],
                                 "input": record["input"]}) + "\n")
    return path


class TestGenerate:
    def test_ten_inputs_aligned(self, checkpoint, training_file, tmp_path):
        inputs = write_inputs(tmp_path / "in.jsonl", training_file)
        out = tmp_path / "gen.jsonl"
        records = generate(checkpoint, inputs, out)
        assert len(records) == 10
        written = [json.loads(l) for l in out.read_text().splitlines()]
        assert [w["example_id"] for w in written] == [r.example_id for r in records]
        assert all(set(w) == {"example_id", "text"} for w in written)

    def test_rerun_identical(self, checkpoint, training_file, tmp_path):
        inputs = write_inputs(tmp_path / "in.jsonl", training_file)
        generate(checkpoint, inputs, tmp_path / "a.jsonl")
        generate(checkpoint, inputs, tmp_path / "b.jsonl")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_missing_cot_marker_warns(self, checkpoint, tmp_path):
        inputs = tmp_path / "plain.jsonl"
        inputs.write_text(json.dumps(
            {"example_id": "x1", "input": "<CAP> t <R> <C> 1"}) + "\n")
        with pytest.warns(InputFormatMismatch):
            records = generate(checkpoint, inputs, tmp_path / "gen.jsonl")
        assert len(records) == 1  # warning, not abort

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        row = json.dumps({"example_id": "x", "input": "a"}) + "\n"
        path.write_text(row + row)
        with pytest.raises(MalformedTrainingFile):
            read_inputs(path)

    def test_empty_inputs_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(MalformedTrainingFile):
            read_inputs(path)
