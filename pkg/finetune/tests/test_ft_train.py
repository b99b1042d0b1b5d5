import json
import math

import pytest

from finetune_runner import (
    CheckpointLoadFailure,
    MalformedTrainingFile,
    TrainConfig,
    init_checkpoint,
    load_checkpoint,
    train,
)
from finetune_runner.train import read_training_file

from .ft_fixtures import write_training_file


def config(training_file, tmp_path, **kw):
    defaults = dict(training_file=str(training_file),
                    output_dir=str(tmp_path / "ckpt"),
                    max_steps=5, seed=7)
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestConfigValidation:
    def test_rejects_zero_steps(self, tmp_path):
        with pytest.raises(ValueError):
            TrainConfig("f", str(tmp_path), max_steps=0)

    def test_rejects_nonpositive_lengths(self, tmp_path):
        with pytest.raises(ValueError):
            TrainConfig("f", str(tmp_path), max_input_len=0)
        with pytest.raises(ValueError):
            TrainConfig("f", str(tmp_path), max_output_len=-1)


class TestReadTrainingFile:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(MalformedTrainingFile):
            read_training_file(path)

    def test_bad_json_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"input": "a", "target": "b"}\nnot json\n')
        with pytest.raises(MalformedTrainingFile) as exc:
            read_training_file(path)
        assert exc.value.lineno == 2

    def test_missing_target(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"input": "a"}\n')
        with pytest.raises(MalformedTrainingFile) as exc:
            read_training_file(path)
        assert exc.value.lineno == 1


class TestTrain:
    def test_loss_finite_and_logged(self, training_file, tmp_path):
        curve, out_dir = train(config(training_file, tmp_path))
        assert len(curve) == 5
        assert all(math.isfinite(x) for x in curve)
        assert json.loads((out_dir / "loss_curve.json").read_text()) == curve

    def test_same_seed_identical_curves(self, training_file, tmp_path):
        curve_a, _ = train(config(training_file, tmp_path, output_dir=str(tmp_path / "a")))
        curve_b, _ = train(config(training_file, tmp_path, output_dir=str(tmp_path / "b")))
        assert curve_a == curve_b

    def test_checkpoint_round_trip(self, training_file, tmp_path):
        _curve, out_dir = train(config(training_file, tmp_path))
        model, tokenizer, cot_mode = load_checkpoint(out_dir)
        assert cot_mode is True
        assert model.vocab_size == len(tokenizer)

    def test_train_from_base_checkpoint(self, training_file, tmp_path):
        base = init_checkpoint(training_file, tmp_path / "base", seed=3)
        curve, _ = train(config(training_file, tmp_path, base_checkpoint=str(base)))
        assert all(math.isfinite(x) for x in curve)

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(CheckpointLoadFailure):
            load_checkpoint(tmp_path / "nowhere")

    def test_non_cot_file_flags_mode(self, tmp_path):
        path = write_training_file(tmp_path / "plain.jsonl", 10, cot=False)
        _curve, out_dir = train(config(path, tmp_path))
        _model, _tok, cot_mode = load_checkpoint(out_dir)
        assert cot_mode is False
