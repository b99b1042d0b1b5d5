"""Two-phase data synthesis: diverse generation, verification, filtering,
checkpointed persistence and run statistics.

State directory layout:
  state.header  JSON header (run id, config fingerprint, checkpoint stats)
  pairs.log     JSONL, one GeneratedPair per line, whole tables appended
                atomically in corpus order
  failed.log    JSONL, one {table_id, error} per line
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from hashlib import sha256
from pathlib import Path
from typing import Callable

from .client import (
    BackendConfig,
    CompletionRequest,
    RateLimiter,
    complete,
)
from .corpus import Corpus, ScientificTable
from .errors import (
    ClientError,
    GenerationFailed,
    MissingTable,
    PairParseFailure,
    ResumeConfigMismatch,
    TabDistillError,
    UnknownMode,
)
from .linearize import COT_TOKEN, attach_reasoning, linearize_table
from .prompts import Demonstration, build_cot_prompt, build_verification_prompt

logger = logging.getLogger(__name__)

VERDICTS = ("pending", "entailed", "refuted", "verify_failed")
EMISSION_MODES = ("traditional", "cot_input", "cot_target")


@dataclass(frozen=True)
class GeneratedPair:
    table_id: str
    pair_index: int  # 1 or 2
    reasoning: str
    description: str
    raw_response_excerpt: str = ""
    verdict: str = "pending"

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")


@dataclass(frozen=True)
class PipelineConfig:
    model_name: str = "gpt-3.5-turbo"
    generation_temperature: float = 0.7
    verification_temperature: float = 0.0
    max_output_tokens: int = 1024
    token_limit: int = 4096
    pairs_per_table: int = 2
    parse_retry_limit: int = 2
    checkpoint_every: int = 25
    workers: int = 1

    def fingerprint(self) -> str:
        return sha256(
            json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]


@dataclass
class PipelineState:
    run_id: str
    config_fingerprint: str
    completed_table_ids: set[str] = field(default_factory=set)
    failed_table_ids: dict[str, str] = field(default_factory=dict)
    pairs: list[GeneratedPair] = field(default_factory=list)


@dataclass(frozen=True)
class RunStats:
    tables_processed: int
    pairs_generated: int
    pairs_entailed: int
    pairs_refuted: int
    pairs_verify_failed: int

    @property
    def retention_rate(self) -> float:
        return self.pairs_entailed / self.pairs_generated if self.pairs_generated else 0.0


def compute_stats(state: PipelineState) -> RunStats:
    counts = {"entailed": 0, "refuted": 0, "verify_failed": 0}
    for pair in state.pairs:
        if pair.verdict in counts:
            counts[pair.verdict] += 1
    return RunStats(
        tables_processed=len(state.completed_table_ids) + len(state.failed_table_ids),
        pairs_generated=len(state.pairs),
        pairs_entailed=counts["entailed"],
        pairs_refuted=counts["refuted"],
        pairs_verify_failed=counts["verify_failed"],
    )


# --- teacher output parsing ----------------------------------------------

def parse_pairs(raw: str, expected: int) -> list[tuple[str, str]]:
    """Extract `expected` (reasoning, description) pairs from teacher output.

    Looks for "Reasoning k:" / "Description k:" section labels
    case-insensitively, tolerating surrounding prose and blank lines.
    """
    if expected not in (1, 2):
        raise ValueError("expected must be 1 or 2")
    labels = []
    for k in range(1, expected + 1):
        labels.append(f"Reasoning {k}")
        labels.append(f"Description {k}")
    pattern = re.compile(
        r"(reasoning|description)\s*(\d+)?\s*:", flags=re.IGNORECASE
    )
    sections: dict[str, str] = {}
    matches = list(pattern.finditer(raw))
    for idx, m in enumerate(matches):
        kind = m.group(1).capitalize()
        number = m.group(2) or str(sum(1 for s in sections if s.startswith(kind)) + 1)
        body_end = matches[idx + 1].start() if idx + 1 < len(matches) else len(raw)
        sections.setdefault(f"{kind} {number}", raw[m.end() : body_end].strip())
    pairs = []
    for k in range(1, expected + 1):
        reasoning = sections.get(f"Reasoning {k}", "")
        description = sections.get(f"Description {k}", "")
        if not reasoning:
            raise PairParseFailure(f"Reasoning {k}", "missing or empty")
        if not description:
            raise PairParseFailure(f"Description {k}", "missing or empty")
        pairs.append((reasoning, description))
    return pairs


_FIRST_WORD_RE = re.compile(r"[a-zA-Z]+")


def classify_verification_answer(answer: str) -> str:
    """First-token rule: leading yes -> entailed, leading no -> refuted."""
    m = _FIRST_WORD_RE.search(answer)
    if m:
        word = m.group(0).lower()
        if word == "yes":
            return "entailed"
        if word == "no":
            return "refuted"
    return "verify_failed"


# --- per-table operations -------------------------------------------------

def generate_for_table(
    table: ScientificTable,
    demo: Demonstration,
    backend,
    config: PipelineConfig,
    backend_config: BackendConfig,
    limiter: RateLimiter | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> list[GeneratedPair]:
    """One CoT completion parsed into `pairs_per_table` pending pairs.

    A PairParseFailure triggers a fresh completion, up to
    parse_retry_limit extra attempts.
    """
    prompt = build_cot_prompt(demo, table, token_limit=config.token_limit)
    request = CompletionRequest(
        model_name=config.model_name,
        messages=prompt.messages,
        temperature=config.generation_temperature,
        max_output_tokens=config.max_output_tokens,
    )
    last_error: Exception | None = None
    for _attempt in range(config.parse_retry_limit + 1):
        try:
            response = complete(
                request, backend_config, backend=backend, limiter=limiter,
                sleeper=sleeper, rng=rng,
            )
        except ClientError as exc:
            raise GenerationFailed(f"backend failure for {table.table_id}: {exc}") from exc
        try:
            parsed = parse_pairs(response.content, expected=config.pairs_per_table)
        except PairParseFailure as exc:
            last_error = exc
            continue
        return [
            GeneratedPair(
                table_id=table.table_id,
                pair_index=k,
                reasoning=reasoning,
                description=description,
                raw_response_excerpt=response.content[:200],
            )
            for k, (reasoning, description) in enumerate(parsed, start=1)
        ]
    raise GenerationFailed(
        f"unparseable teacher output for {table.table_id} after "
        f"{config.parse_retry_limit + 1} attempts: {last_error}"
    )


def verify_pair(
    pair: GeneratedPair,
    table: ScientificTable,
    backend,
    config: PipelineConfig,
    backend_config: BackendConfig,
    limiter: RateLimiter | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> GeneratedPair:
    """Ask the teacher whether the description is consistent with the table.

    Backend failures yield verdict verify_failed rather than aborting the run.
    """
    if pair.verdict != "pending":
        raise ValueError(f"pair {pair.table_id}#{pair.pair_index} already verified")
    prompt = build_verification_prompt(table, pair.description)
    request = CompletionRequest(
        model_name=config.model_name,
        messages=prompt.messages,
        temperature=config.verification_temperature,
        max_output_tokens=16,
    )
    try:
        response = complete(
            request, backend_config, backend=backend, limiter=limiter,
            sleeper=sleeper, rng=rng,
        )
    except ClientError as exc:
        logger.warning("verification failed for %s#%d: %s", pair.table_id, pair.pair_index, exc)
        return replace(pair, verdict="verify_failed")
    return replace(pair, verdict=classify_verification_answer(response.content))


# --- persistence ----------------------------------------------------------

class StateStore:
    """Append-friendly persistence under a state directory."""

    def __init__(self, state_dir: str | Path):
        self.dir = Path(state_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.header_path = self.dir / "state.header"
        self.pairs_path = self.dir / "pairs.log"
        self.failed_path = self.dir / "failed.log"

    def exists(self) -> bool:
        return self.header_path.exists()

    def write_header(self, state: PipelineState) -> None:
        stats = compute_stats(state)
        payload = json.dumps(
            {
                "run_id": state.run_id,
                "config_fingerprint": state.config_fingerprint,
                "tables_processed": stats.tables_processed,
                "pairs_generated": stats.pairs_generated,
            },
            sort_keys=True,
        )
        tmp = self.header_path.with_suffix(".tmp")
        tmp.write_text(payload + "\n", encoding="utf-8")
        os.replace(tmp, self.header_path)

    def append_pairs(self, pairs: list[GeneratedPair]) -> None:
        block = "".join(json.dumps(asdict(p), ensure_ascii=False) + "\n" for p in pairs)
        with open(self.pairs_path, "a", encoding="utf-8") as fh:
            fh.write(block)
            fh.flush()
            os.fsync(fh.fileno())

    def append_failure(self, table_id: str, error: str) -> None:
        with open(self.failed_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"table_id": table_id, "error": error}) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def load(self) -> PipelineState:
        header = json.loads(self.header_path.read_text(encoding="utf-8"))
        state = PipelineState(
            run_id=header["run_id"],
            config_fingerprint=header["config_fingerprint"],
        )
        if self.pairs_path.exists():
            for line in self.pairs_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    pair = GeneratedPair(**json.loads(line))
                    state.pairs.append(pair)
                    state.completed_table_ids.add(pair.table_id)
        if self.failed_path.exists():
            for line in self.failed_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    obj = json.loads(line)
                    state.failed_table_ids[obj["table_id"]] = obj["error"]
        return state


# --- the run --------------------------------------------------------------

def run_pipeline(
    corpus: Corpus,
    demo: Demonstration,
    backend,
    config: PipelineConfig,
    backend_config: BackendConfig,
    state_dir: str | Path,
    split: str = "train",
    resume: bool = False,
    run_id: str = "run",
    limiter: RateLimiter | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
    interrupt_after: int | None = None,
) -> tuple[PipelineState, RunStats]:
    """Generate and verify two pairs per table of the selected split.

    Fully resumable: tables already present in the state logs are skipped,
    and a deterministic backend yields a byte-identical final state whether
    or not the run was interrupted. `interrupt_after` stops after that many
    newly processed tables (used by tests to simulate a crash).
    """
    store = StateStore(state_dir)
    if resume and store.exists():
        state = store.load()
        if state.config_fingerprint != config.fingerprint():
            raise ResumeConfigMismatch(
                f"state was written with config {state.config_fingerprint}, "
                f"current config is {config.fingerprint()}"
            )
    else:
        store.pairs_path.unlink(missing_ok=True)
        store.failed_path.unlink(missing_ok=True)
        state = PipelineState(run_id=run_id, config_fingerprint=config.fingerprint())
        store.write_header(state)

    if limiter is None:
        limiter = RateLimiter(backend_config.max_requests_per_minute)

    tables = [
        rec.table
        for rec in corpus.records
        if rec.split == split
        and rec.table.table_id not in state.completed_table_ids
        and rec.table.table_id not in state.failed_table_ids
    ]

    def process(table: ScientificTable) -> tuple[str, list[GeneratedPair] | str]:
        try:
            pairs = generate_for_table(
                table, demo, backend, config, backend_config,
                limiter=limiter, sleeper=sleeper, rng=rng,
            )
            pairs = [
                verify_pair(
                    p, table, backend, config, backend_config,
                    limiter=limiter, sleeper=sleeper, rng=rng,
                )
                for p in pairs
            ]
            return table.table_id, pairs
        except TabDistillError as exc:
            return table.table_id, str(exc)

    done = 0
    since_checkpoint = 0
    if config.workers <= 1:
        results = map(process, tables)
    else:
        # Workers process distinct tables; results are committed in corpus
        # order by this single writer loop, so persisted state stays
        # deterministic under a deterministic backend.
        executor = ThreadPoolExecutor(max_workers=config.workers)
        results = executor.map(process, tables)
    try:
        for table_id, outcome in results:
            if isinstance(outcome, str):
                state.failed_table_ids[table_id] = outcome
                store.append_failure(table_id, outcome)
                logger.warning("table %s failed: %s", table_id, outcome)
            else:
                state.pairs.extend(outcome)
                state.completed_table_ids.add(table_id)
                store.append_pairs(outcome)
            done += 1
            since_checkpoint += 1
            if since_checkpoint >= config.checkpoint_every:
                store.write_header(state)
                since_checkpoint = 0
            if interrupt_after is not None and done >= interrupt_after:
                break
    finally:
        if config.workers > 1:
            executor.shutdown(wait=False, cancel_futures=True)
    store.write_header(state)
    return state, compute_stats(state)


# --- emission -------------------------------------------------------------

def emit_training_file(
    state: PipelineState,
    corpus: Corpus,
    mode: str,
    out: str | Path,
    split: str = "train",
) -> int:
    """Write one {"example_id", "input", "target"} JSONL line per unit.

    traditional: (linearized table, gold description) per corpus record;
    cot_input:  (table <CoT> reasoning, description) per entailed pair;
    cot_target: (linearized table, reasoning <CoT> description) per
    entailed pair. Returns the number of lines written.
    """
    if mode not in EMISSION_MODES:
        raise UnknownMode(mode)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines: list[str] = []

    def emit(example_id: str, input_text: str, target: str):
        lines.append(
            json.dumps(
                {"example_id": example_id, "input": input_text, "target": target},
                ensure_ascii=False,
            )
        )

    if mode == "traditional":
        for rec in corpus.records:
            if rec.split == split:
                emit(
                    rec.table.table_id,
                    linearize_table(rec.table).text,
                    rec.gold_description,
                )
    else:
        tables = {rec.table.table_id: rec.table for rec in corpus.records}
        for pair in state.pairs:
            if pair.verdict != "entailed":
                continue
            table = tables.get(pair.table_id)
            if table is None:
                raise MissingTable(pair.table_id)
            example_id = f"{pair.table_id}#p{pair.pair_index}"
            if mode == "cot_input":
                with_cot = attach_reasoning(linearize_table(table), pair.reasoning)
                emit(example_id, with_cot.text, pair.description)
            else:
                emit(
                    example_id,
                    linearize_table(table).text,
                    f"{pair.reasoning} {COT_TOKEN} {pair.description}",
                )

    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return len(lines)
