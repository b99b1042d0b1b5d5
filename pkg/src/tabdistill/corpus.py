"""Loading, validation and summary statistics for SciGen-shaped corpora.

Record format: UTF-8 JSONL, one object per line with keys
``table_id``, ``caption``, ``rows`` (list of list of cell strings),
``header_rows``, ``text`` (gold description), ``split``, ``setting``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (
    EmptyCorpus,
    EmptyTable,
    InvalidSplit,
    IoFailure,
    MissingField,
    ParseFailure,
)

SPLITS = ("train", "validation", "test")
SETTINGS = ("few-shot", "medium", "large")

_REQUIRED_FIELDS = ("table_id", "caption", "rows", "text", "split")


@dataclass(frozen=True)
class ScientificTable:
    """A caption plus a grid of cell strings, before serialization.

    Rows may be ragged: the source dataset flattens spanning cells, so rows
    of differing lengths are accepted and preserved.
    """

    table_id: str
    caption: str
    rows: tuple[tuple[str, ...], ...]
    column_header_row_count: int = 0

    def __post_init__(self):
        if not self.rows or any(not row for row in self.rows):
            raise EmptyTable(f"table {self.table_id!r} has no rows or an empty row")
        if not 0 <= self.column_header_row_count <= len(self.rows):
            raise EmptyTable(
                f"table {self.table_id!r}: header row count "
                f"{self.column_header_row_count} out of range"
            )

    @property
    def cell_count(self) -> int:
        return sum(len(row) for row in self.rows)


@dataclass(frozen=True)
class DatasetRecord:
    table: ScientificTable
    gold_description: str
    split: str
    setting: str = "medium"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise InvalidSplit(self.split)
        if not self.gold_description.split():
            raise MissingField("text")


@dataclass(frozen=True)
class Corpus:
    records: tuple[DatasetRecord, ...]

    @property
    def split_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in SPLITS}
        for rec in self.records:
            counts[rec.split] += 1
        return counts

    def table_by_id(self, table_id: str) -> ScientificTable | None:
        for rec in self.records:
            if rec.table.table_id == table_id:
                return rec.table
        return None


@dataclass(frozen=True)
class SplitStats:
    count: int
    mean_description_words: float
    mean_cell_count: float


@dataclass(frozen=True)
class CorpusStats:
    per_split: dict[str, SplitStats] = field(default_factory=dict)
    overall: SplitStats = None  # type: ignore[assignment]


def parse_record(raw: str | dict) -> DatasetRecord:
    """Parse one JSONL record (or an already-decoded object).

    Cell values are preserved verbatim apart from stripping surrounding
    whitespace.
    """
    if isinstance(raw, str):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseFailure([(1, exc)]) from exc
    else:
        obj = raw
    if not isinstance(obj, dict):
        raise MissingField("table_id")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise MissingField(name)
    rows_raw = obj["rows"]
    if not isinstance(rows_raw, list) or not rows_raw:
        raise EmptyTable(f"record {obj.get('table_id')!r} has no rows")
    rows = tuple(
        tuple(str(cell).strip() for cell in row) if isinstance(row, list) else ()
        for row in rows_raw
    )
    table = ScientificTable(
        table_id=str(obj["table_id"]),
        caption=str(obj["caption"]).strip(),
        rows=rows,
        column_header_row_count=int(obj.get("header_rows", 0)),
    )
    return DatasetRecord(
        table=table,
        gold_description=str(obj["text"]).strip(),
        split=str(obj["split"]),
        setting=str(obj.get("setting", "medium")),
    )


def serialize_record(record: DatasetRecord) -> str:
    """Inverse of parse_record: one JSON line."""
    return json.dumps(
        {
            "table_id": record.table.table_id,
            "caption": record.table.caption,
            "rows": [list(row) for row in record.table.rows],
            "header_rows": record.table.column_header_row_count,
            "text": record.gold_description,
            "split": record.split,
            "setting": record.setting,
        },
        ensure_ascii=False,
    )


def _iter_record_files(path: Path) -> Iterable[Path]:
    if path.is_dir():
        files = sorted(path.glob("*.jsonl"))
        if not files:
            raise IoFailure(f"no .jsonl files under {path}")
        return files
    return [path]


def load_corpus(path: str | Path, setting: str | None = None) -> Corpus:
    """Load a corpus from a JSONL file or a directory of JSONL files.

    If `setting` is given, records carrying a different setting label are
    skipped. Any malformed line fails the whole load with line numbers.
    """
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"corpus path does not exist: {path}")
    records: list[DatasetRecord] = []
    errors: list[tuple[int, Exception]] = []
    for file in _iter_record_files(path):
        try:
            lines = file.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read {file}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                rec = parse_record(line)
            except ParseFailure as exc:
                errors.append((lineno, exc.line_errors[0][1]))
                continue
            except Exception as exc:  # noqa: BLE001 - collected, reported with line number
                errors.append((lineno, exc))
                continue
            if setting is None or rec.setting == setting:
                records.append(rec)
    if errors:
        raise ParseFailure(errors)
    return Corpus(records=tuple(records))


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Per-split and overall record counts, mean description length in
    whitespace-delimited words, and mean table cell count."""
    if not corpus.records:
        raise EmptyCorpus("cannot compute statistics of an empty corpus")

    def stats_of(records: list[DatasetRecord]) -> SplitStats:
        return SplitStats(
            count=len(records),
            mean_description_words=round(
                _mean([float(len(r.gold_description.split())) for r in records]), 1
            ),
            mean_cell_count=round(_mean([float(r.table.cell_count) for r in records]), 1),
        )

    per_split = {}
    for split in SPLITS:
        members = [r for r in corpus.records if r.split == split]
        if members:
            per_split[split] = stats_of(members)
    return CorpusStats(per_split=per_split, overall=stats_of(list(corpus.records)))


def format_stats(stats: CorpusStats) -> str:
    """Fixed-format text table for the `stats` subcommand."""
    header = f"{'split':<12}{'records':>10}{'mean words':>12}{'mean cells':>12}"
    lines = [header, "-" * len(header)]
    for split in SPLITS:
        if split in stats.per_split:
            s = stats.per_split[split]
            lines.append(
                f"{split:<12}{s.count:>10}{s.mean_description_words:>12.1f}"
                f"{s.mean_cell_count:>12.1f}"
            )
    o = stats.overall
    lines.append(
        f"{'overall':<12}{o.count:>10}{o.mean_description_words:>12.1f}"
        f"{o.mean_cell_count:>12.1f}"
    )
    return "\n".join(lines)
