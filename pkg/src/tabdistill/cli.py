"""Command-line entrypoint binding all modules into subcommands.

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.
Every subcommand supports --json for a machine-readable summary.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import pipeline as pl
from .client import BackendConfig, HttpBackend, load_mock_script
from .corpus import corpus_stats, format_stats, load_corpus, serialize_record
from .errors import ConfigValidationFailure, TabDistillError
from .linearize import linearize_table
from .metrics import build_report, render_report
from .prompts import (
    build_cot_prompt,
    build_direct_prompt,
    build_verification_prompt,
    default_demonstration_path,
    load_demonstration,
)

_CONFIG_DEFAULTS = {
    "corpus_path": None,
    "setting": "medium",
    "split": "train",
    "demo_path": None,
    "output_dir": "out",
    "emission_mode": "cot_input",
    "model_name": "gpt-3.5-turbo",
    "workers": 1,
    "checkpoint_every": 25,
    "deterministic": False,
    "mock_script": None,
    "references_path": None,
    "backend": {},
}


def load_run_config(path: str | Path, overrides: dict | None = None) -> dict:
    """Read the JSON run config, apply CLI overrides, validate every field.

    Raises ConfigValidationFailure listing all violations at once.
    """
    path = Path(path)
    violations: list[str] = []
    cfg = dict(_CONFIG_DEFAULTS)
    if not path.exists():
        raise ConfigValidationFailure([f"config file does not exist: {path}"])
    try:
        loaded = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigValidationFailure([f"config is not valid JSON: {exc}"]) from exc
    unknown = set(loaded) - set(cfg)
    for key in sorted(unknown):
        violations.append(f"unknown config key: {key}")
    cfg.update({k: v for k, v in loaded.items() if k in cfg})
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v

    if not cfg["corpus_path"]:
        violations.append("corpus_path: required")
    elif not Path(cfg["corpus_path"]).exists():
        violations.append(f"corpus_path: does not exist: {cfg['corpus_path']}")
    if cfg["demo_path"] is None:
        cfg["demo_path"] = str(default_demonstration_path())
    if not Path(cfg["demo_path"]).exists():
        violations.append(f"demo_path: does not exist: {cfg['demo_path']}")
    if cfg["setting"] not in ("few-shot", "medium", "large"):
        violations.append(f"setting: unknown value {cfg['setting']!r}")
    if cfg["split"] not in ("train", "validation", "test"):
        violations.append(f"split: unknown value {cfg['split']!r}")
    if cfg["emission_mode"] not in pl.EMISSION_MODES:
        violations.append(f"emission_mode: unknown value {cfg['emission_mode']!r}")
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        violations.append("workers: must be an integer >= 1")
    if not isinstance(cfg["checkpoint_every"], int) or cfg["checkpoint_every"] < 1:
        violations.append("checkpoint_every: must be an integer >= 1")
    if cfg["deterministic"]:
        if not cfg["mock_script"]:
            violations.append("mock_script: required when deterministic is set")
        elif not Path(cfg["mock_script"]).exists():
            violations.append(f"mock_script: does not exist: {cfg['mock_script']}")
    try:
        cfg["backend"] = BackendConfig(**cfg["backend"])
    except (TypeError, ValueError) as exc:
        violations.append(f"backend: {exc}")
    if violations:
        raise ConfigValidationFailure(violations)
    return cfg


def _emit(summary: dict, as_json: bool, text: str | None = None):
    if as_json:
        click.echo(json.dumps(summary, ensure_ascii=False))
    elif text is not None:
        click.echo(text)


@click.group()
def cli():
    """Distill table-based chain-of-thought data from a teacher LLM."""


@cli.command()
@click.option("--path", "path", required=True, type=click.Path(exists=True))
@click.option("--setting", default="medium", show_default=True)
@click.option("--out", "out", type=click.Path(), default=None,
              help="Write the validated corpus to one combined JSONL file.")
@click.option("--json", "as_json", is_flag=True)
def ingest(path, setting, out, as_json):
    """Load and validate a corpus directory or file."""
    corpus = load_corpus(path, setting=setting)
    if out:
        Path(out).write_text(
            "".join(serialize_record(r) + "\n" for r in corpus.records),
            encoding="utf-8",
        )
    counts = corpus.split_counts
    _emit(
        {"records": len(corpus.records), "split_counts": counts, "out": out},
        as_json,
        "\n".join(f"{split:<12}{n:>8}" for split, n in counts.items()),
    )


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--setting", default=None)
@click.option("--json", "as_json", is_flag=True)
def stats(corpus_path, setting, as_json):
    """Print per-split corpus statistics as a fixed-format table."""
    st = corpus_stats(load_corpus(corpus_path, setting=setting))
    summary = {
        "overall": dataclasses.asdict(st.overall),
        "per_split": {k: dataclasses.asdict(v) for k, v in st.per_split.items()},
    }
    _emit(summary, as_json, format_stats(st))


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def linearize(corpus_path, out, as_json):
    """Write one linearized string per record, aligned by table_id."""
    corpus = load_corpus(corpus_path)
    lines = [
        json.dumps(
            {"table_id": rec.table.table_id, "text": linearize_table(rec.table).text},
            ensure_ascii=False,
        )
        for rec in corpus.records
    ]
    Path(out).write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    _emit({"lines": len(lines), "out": out}, as_json, f"wrote {len(lines)} lines to {out}")


@cli.command()
@click.option("--variant", type=click.Choice(["cot", "direct", "verification"]), required=True)
@click.option("--table-id", required=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--demo", "demo_path", type=click.Path(exists=True), default=None)
@click.option("--description", default=None, help="Description to verify (verification variant).")
@click.option("--json", "as_json", is_flag=True)
def prompt(variant, table_id, corpus_path, demo_path, description, as_json):
    """Assemble and print a teacher prompt."""
    corpus = load_corpus(corpus_path)
    table = corpus.table_by_id(table_id)
    if table is None:
        raise ConfigValidationFailure([f"table-id: {table_id!r} not found in corpus"])
    demo = load_demonstration(demo_path or default_demonstration_path())
    if variant == "cot":
        p = build_cot_prompt(demo, table)
    elif variant == "direct":
        p = build_direct_prompt(demo, table)
    else:
        if not description:
            raise ConfigValidationFailure(["description: required for the verification variant"])
        p = build_verification_prompt(table, description)
    rendered = "\n\n".join(f"[{role}]\n{content}" for role, content in p.messages)
    _emit(
        {"variant": p.variant.value, "messages": [list(m) for m in p.messages]},
        as_json,
        rendered,
    )


def _build_backend(cfg: dict):
    if cfg["deterministic"]:
        return load_mock_script(cfg["mock_script"])
    return HttpBackend(cfg["backend"])


def _pipeline_config(cfg: dict) -> pl.PipelineConfig:
    return pl.PipelineConfig(
        model_name=cfg["model_name"],
        workers=1 if cfg["deterministic"] else cfg["workers"],
        checkpoint_every=cfg["checkpoint_every"],
    )


def _run_generate(cfg: dict, state_dir: Path, resume: bool):
    corpus = load_corpus(cfg["corpus_path"], setting=cfg["setting"])
    demo = load_demonstration(cfg["demo_path"])
    state, run_stats = pl.run_pipeline(
        corpus,
        demo,
        _build_backend(cfg),
        _pipeline_config(cfg),
        cfg["backend"],
        state_dir,
        split=cfg["split"],
        resume=resume,
    )
    return corpus, state, run_stats


def _stats_summary(run_stats: pl.RunStats) -> dict:
    d = dataclasses.asdict(run_stats)
    d["retention_rate"] = run_stats.retention_rate
    return d


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", type=click.Path(), default=None)
@click.option("--demo", "demo_path", type=click.Path(), default=None)
@click.option("--split", default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--resume", is_flag=True)
@click.option("--deterministic", is_flag=True, default=None)
@click.option("--json", "as_json", is_flag=True)
def generate(config_path, corpus_path, demo_path, split, out_dir, resume, deterministic, as_json):
    """Run diverse generation plus verification over the selected split."""
    cfg = load_run_config(
        config_path,
        {
            "corpus_path": corpus_path,
            "demo_path": demo_path,
            "split": split,
            "output_dir": out_dir,
            "deterministic": deterministic or None,
        },
    )
    state_dir = Path(cfg["output_dir"]) / "state"
    _corpus, state, run_stats = _run_generate(cfg, state_dir, resume)
    summary = {"state_dir": str(state_dir), **_stats_summary(run_stats)}
    _emit(
        summary,
        as_json,
        f"processed {run_stats.tables_processed} tables, "
        f"{run_stats.pairs_entailed}/{run_stats.pairs_generated} pairs retained "
        f"(retention {run_stats.retention_rate:.2f})",
    )


@cli.command("filter-stats")
@click.option("--state", "state_dir", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def filter_stats(state_dir, as_json):
    """Report generation/verification statistics of a persisted state."""
    state = pl.StateStore(state_dir).load()
    run_stats = pl.compute_stats(state)
    summary = _stats_summary(run_stats)
    _emit(
        summary,
        as_json,
        "\n".join(f"{k:<22}{v}" for k, v in summary.items()),
    )


@cli.command()
@click.option("--state", "state_dir", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(list(pl.EMISSION_MODES)), required=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--split", default="train", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def emit(state_dir, corpus_path, mode, out, split, as_json):
    """Emit an (input, target) training file from a persisted state."""
    state = pl.StateStore(state_dir).load()
    corpus = load_corpus(corpus_path)
    count = pl.emit_training_file(state, corpus, mode, out, split=split)
    _emit({"mode": mode, "lines": count, "out": out}, as_json, f"wrote {count} lines to {out}")


@cli.command()
@click.option("--run", "run_name", required=True)
@click.option("--gen", "generations", required=True, type=click.Path(exists=True))
@click.option("--ref", "references", required=True, type=click.Path(exists=True))
@click.option("--labels", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True)
def score(run_name, generations, references, labels, as_json):
    """Score a generations file against references (METEOR + label accuracy)."""
    report = build_report(run_name, generations, references, labels)
    _emit(dataclasses.asdict(report), as_json, render_report(report))


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--deterministic", is_flag=True, default=None)
@click.option("--resume", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def run(config_path, deterministic, resume, as_json):
    """End-to-end: ingest, generate, filter, emit, and optionally score."""
    cfg = load_run_config(config_path, {"deterministic": deterministic or None})
    out_dir = Path(cfg["output_dir"])
    state_dir = out_dir / "state"
    corpus, state, run_stats = _run_generate(cfg, state_dir, resume)
    emitted_path = out_dir / f"train.{cfg['emission_mode']}.jsonl"
    count = pl.emit_training_file(
        state, corpus, cfg["emission_mode"], emitted_path, split=cfg["split"]
    )
    summary = {
        "state_dir": str(state_dir),
        "emitted": str(emitted_path),
        "emitted_lines": count,
        **_stats_summary(run_stats),
    }
    if cfg["references_path"]:
        report = build_report("run", emitted_path, cfg["references_path"])
        summary["meteor_mean"] = report.meteor_mean
    _emit(
        summary,
        as_json,
        f"retained {run_stats.pairs_entailed}/{run_stats.pairs_generated} pairs "
        f"(retention {run_stats.retention_rate:.2f}); wrote {count} lines to {emitted_path}",
    )


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 1
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        else:
            click.echo(cli.get_usage(click.Context(cli)), err=True)
        return 1
    except ConfigValidationFailure as exc:
        click.echo(str(exc), err=True)
        return 1
    except TabDistillError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
