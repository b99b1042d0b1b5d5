"""Training loop: mean token-level cross-entropy of targets given inputs."""

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .errors import CheckpointLoadFailure, MalformedTrainingFile
from .model import Seq2Seq
from .tokenizer import WordTokenizer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    training_file: str
    output_dir: str
    base_checkpoint: str | None = None
    max_steps: int = 30
    batch_size: int = 8
    learning_rate: float = 1e-2
    max_input_len: int = 256
    max_output_len: int = 64
    seed: int = 0
    emb_dim: int = 64
    hidden_dim: int = 128

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_input_len <= 0 or self.max_output_len <= 0:
            raise ValueError("sequence lengths must be positive")


def read_training_file(path) -> list[tuple[str, str]]:
    """Parse an emitted training file into (input, target) pairs."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedTrainingFile(0, f"cannot read {path}: {exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedTrainingFile(lineno, f"invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise MalformedTrainingFile(lineno, "record must be an object")
        for key in ("input", "target"):
            value = record.get(key)
            if not isinstance(value, str) or not value.strip():
                raise MalformedTrainingFile(lineno, f"missing or empty {key!r}")
        pairs.append((record["input"], record["target"]))
    if not pairs:
        raise MalformedTrainingFile(0, "training file has no examples")
    return pairs


def save_checkpoint(path, model: Seq2Seq, tokenizer: WordTokenizer,
                    cot_mode: bool) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    tokenizer.save(path / "vocab.json")
    torch.save(model.state_dict(), path / "weights.pt")
    (path / "config.json").write_text(json.dumps({
        "emb_dim": model.emb_dim,
        "hidden_dim": model.hidden_dim,
        "vocab_size": model.vocab_size,
        "cot_mode": cot_mode,
    }), encoding="utf-8")


def load_checkpoint(path) -> tuple[Seq2Seq, WordTokenizer, bool]:
    path = Path(path)
    try:
        meta = json.loads((path / "config.json").read_text(encoding="utf-8"))
        tokenizer = WordTokenizer.load(path / "vocab.json")
        model = Seq2Seq(meta["vocab_size"], meta["emb_dim"], meta["hidden_dim"],
                        pad_id=tokenizer.pad_id)
        model.load_state_dict(torch.load(path / "weights.pt", weights_only=True))
    except (OSError, KeyError, ValueError, RuntimeError, json.JSONDecodeError) as exc:
        raise CheckpointLoadFailure(f"cannot load checkpoint at {path}: {exc}") from exc
    model.eval()
    return model, tokenizer, bool(meta.get("cot_mode", False))


def init_checkpoint(training_file, output_dir, config: TrainConfig | None = None,
                    seed: int = 0) -> Path:
    """Create a randomly initialized base checkpoint whose vocabulary covers
    the given training file. Stands in for a downloaded pretrained model."""
    config = config or TrainConfig(str(training_file), str(output_dir), seed=seed)
    pairs = read_training_file(training_file)
    tokenizer = WordTokenizer.build([text for pair in pairs for text in pair])
    torch.manual_seed(config.seed)
    model = Seq2Seq(len(tokenizer), config.emb_dim, config.hidden_dim,
                    pad_id=tokenizer.pad_id)
    save_checkpoint(output_dir, model, tokenizer, cot_mode=False)
    return Path(output_dir)


def _pad_batch(rows: list[list[int]], pad_id: int) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [pad_id] * (width - len(r)) for r in rows],
                        dtype=torch.long)


def train(config: TrainConfig) -> tuple[list[float], Path]:
    """Run the fine-tuning loop; returns the per-step loss curve and the
    saved checkpoint directory."""
    pairs = read_training_file(config.training_file)

    if config.base_checkpoint is not None:
        model, tokenizer, _cot = load_checkpoint(config.base_checkpoint)
    else:
        tokenizer = WordTokenizer.build([t for pair in pairs for t in pair])
        torch.manual_seed(config.seed)
        model = Seq2Seq(len(tokenizer), config.emb_dim, config.hidden_dim,
                        pad_id=tokenizer.pad_id)

    cot_mode = all("<CoT>" in source for source, _target in pairs)
    encoded = [
        (tokenizer.encode(source, config.max_input_len),
         tokenizer.encode(target, config.max_output_len, add_bos=True, add_eos=True))
        for source, target in pairs
    ]

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=tokenizer.pad_id)

    curve = []
    order = []
    for step in range(config.max_steps):
        if len(order) < config.batch_size:
            fresh = list(range(len(encoded)))
            rng.shuffle(fresh)
            order.extend(fresh)
        batch = [encoded[i] for i in order[:config.batch_size]]
        del order[:config.batch_size]

        src = _pad_batch([s for s, _ in batch], tokenizer.pad_id)
        tgt = _pad_batch([t for _, t in batch], tokenizer.pad_id)
        logits = model(src, tgt[:, :-1])
        loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt[:, 1:].reshape(-1))
        if not torch.isfinite(loss):
            raise RuntimeError(f"non-finite loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        curve.append(float(loss.item()))
        log.info("step %d loss %.4f", step, curve[-1])

    out_dir = Path(config.output_dir)
    save_checkpoint(out_dir, model, tokenizer, cot_mode)
    (out_dir / "loss_curve.json").write_text(json.dumps(curve), encoding="utf-8")
    return curve, out_dir
