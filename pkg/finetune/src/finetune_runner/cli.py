"""Command line entry points for training and generation."""

import dataclasses
import json
import logging
import sys

import click

from .errors import FinetuneError
from .generate import generate as run_generate
from .train import TrainConfig, init_checkpoint, train as run_train


@click.group()
def cli():
    """Desk-scale seq2seq fine-tuning on emitted table-to-text files."""


@cli.command()
@click.option("--training-file", required=True, type=click.Path(exists=True))
@click.option("--out", "output_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
def init(training_file, output_dir, seed):
    """Create a randomly initialized base checkpoint covering the vocabulary
    of TRAINING_FILE."""
    path = init_checkpoint(training_file, output_dir, seed=seed)
    click.echo(f"initialized checkpoint at {path}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--training-file", default=None, type=click.Path())
@click.option("--out", "output_dir", default=None, type=click.Path())
@click.option("--base-checkpoint", default=None, type=click.Path())
@click.option("--max-steps", default=None, type=int)
@click.option("--batch-size", default=None, type=int)
@click.option("--learning-rate", default=None, type=float)
@click.option("--seed", default=None, type=int)
@click.option("--json", "as_json", is_flag=True)
def train(config_path, training_file, output_dir, base_checkpoint, max_steps,
          batch_size, learning_rate, seed, as_json):
    """Fine-tune on an emitted training file and save a checkpoint."""
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    payload = json.loads(open(config_path, encoding="utf-8").read()) if config_path else {}
    overrides = {
        "training_file": training_file, "output_dir": output_dir,
        "base_checkpoint": base_checkpoint, "max_steps": max_steps,
        "batch_size": batch_size, "learning_rate": learning_rate, "seed": seed,
    }
    payload.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = TrainConfig(**payload)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc))
    curve, out_dir = run_train(config)
    if as_json:
        click.echo(json.dumps({"loss_curve": curve, "checkpoint": str(out_dir),
                               "config": dataclasses.asdict(config)}))
    else:
        click.echo(f"final loss {curve[-1]:.4f} after {len(curve)} steps; "
                   f"checkpoint at {out_dir}")


@cli.command("generate")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--inputs", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--max-output-len", default=64, show_default=True, type=int)
def generate_cmd(checkpoint, inputs, out, max_output_len):
    """Greedy-decode one generation per input record."""
    records = run_generate(checkpoint, inputs, out, max_output_len=max_output_len)
    click.echo(f"wrote {len(records)} generations to {out}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"Usage error: {exc.format_message()}", err=True)
        return 1
    except FinetuneError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
