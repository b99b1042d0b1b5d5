"""Teacher prompt assembly: 1-shot direct, 1-shot CoT, and verification.

All builders are pure; identical inputs yield byte-identical prompts. The
hand-crafted demonstration ships as an editable JSON asset, not code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import ScientificTable
from .errors import EmptyDescription, IoFailure, MissingField, TokenBudgetExceeded
from .linearize import linearize_table


class PromptVariant(str, Enum):
    DIRECT_ONE_SHOT = "direct"
    COT_ONE_SHOT = "cot"
    VERIFICATION = "verification"


@dataclass(frozen=True)
class Demonstration:
    """A hand-crafted (table, reasoning, description) demonstration.

    Two pairs are required for the CoT variant; the direct variant only
    uses the first pair's description.
    """

    table: ScientificTable
    reasoning_pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.reasoning_pairs:
            raise MissingField("pairs")
        for reasoning, description in self.reasoning_pairs:
            if not description.strip():
                raise EmptyDescription("demonstration description must be non-empty")
            if not reasoning.strip():
                raise MissingField("reasoning")


@dataclass(frozen=True)
class GenerationPrompt:
    messages: tuple[tuple[str, str], ...]  # (role, content), role in {system, user}
    variant: PromptVariant
    target_table_id: str
    requested_pair_count: int


_COT_SYSTEM = (
    "You are an expert at reading scientific tables. Given a linearised table "
    "(<CAP> marks the caption, <R> a row, <C> a cell), write table-grounded "
    "reasoning followed by a description that is factually consistent with the "
    "table. Produce exactly two distinct pairs, covering different table regions "
    "or operations where possible. Label them exactly as in the example, using "
    'lines starting with "Reasoning k:" and "Description k:" for k = 1 and 2.'
)

_DIRECT_SYSTEM = (
    "You are an expert at reading scientific tables. Given a linearised table "
    "(<CAP> marks the caption, <R> a row, <C> a cell), write a single "
    "description that is factually consistent with the table, following the "
    "style of the example. Output only the description."
)

_VERIFY_SYSTEM = (
    "You are a strict fact checker for scientific tables. Judge only what the "
    "table supports; do not use outside knowledge."
)


def build_cot_prompt(
    demo: Demonstration,
    table: ScientificTable,
    token_limit: int | None = None,
) -> GenerationPrompt:
    """One-shot CoT prompt asking for two labeled reasoning/description pairs."""
    if len(demo.reasoning_pairs) != 2:
        raise MissingField("pairs (exactly 2 required for the CoT variant)")
    demo_lines = [f"Example table:\n{linearize_table(demo.table).text}", ""]
    for k, (reasoning, description) in enumerate(demo.reasoning_pairs, start=1):
        demo_lines.append(f"Reasoning {k}: {reasoning}")
        demo_lines.append(f"Description {k}: {description}")
    demo_lines += [
        "",
        "Now produce two pairs for this table:",
        linearize_table(table).text,
    ]
    prompt = GenerationPrompt(
        messages=(("system", _COT_SYSTEM), ("user", "\n".join(demo_lines))),
        variant=PromptVariant.COT_ONE_SHOT,
        target_table_id=table.table_id,
        requested_pair_count=2,
    )
    if token_limit is not None:
        estimate_token_budget(prompt, token_limit)
    return prompt


def build_direct_prompt(
    demo: Demonstration,
    table: ScientificTable,
    token_limit: int | None = None,
) -> GenerationPrompt:
    """One-shot direct prompt: demo table + gold description, then the target."""
    description = demo.reasoning_pairs[0][1]
    user = "\n".join(
        [
            f"Example table:\n{linearize_table(demo.table).text}",
            "",
            f"Example output: {description}",
            "",
            "Now write one output for this table:",
            linearize_table(table).text,
        ]
    )
    prompt = GenerationPrompt(
        messages=(("system", _DIRECT_SYSTEM), ("user", user)),
        variant=PromptVariant.DIRECT_ONE_SHOT,
        target_table_id=table.table_id,
        requested_pair_count=1,
    )
    if token_limit is not None:
        estimate_token_budget(prompt, token_limit)
    return prompt


def build_verification_prompt(
    table: ScientificTable,
    description: str,
    token_limit: int | None = None,
) -> GenerationPrompt:
    """Strict yes/no check of a description against its table."""
    if not description or not description.strip():
        raise EmptyDescription("cannot verify an empty description")
    user = "\n".join(
        [
            f"Table:\n{linearize_table(table).text}",
            "",
            f"Description:\n{description.strip()}",
            "",
            "Is the description factually consistent with the table? "
            "Answer with exactly Yes or No.",
        ]
    )
    prompt = GenerationPrompt(
        messages=(("system", _VERIFY_SYSTEM), ("user", user)),
        variant=PromptVariant.VERIFICATION,
        target_table_id=table.table_id,
        requested_pair_count=1,
    )
    if token_limit is not None:
        estimate_token_budget(prompt, token_limit)
    return prompt


def estimate_token_budget(prompt: GenerationPrompt, limit: int) -> int:
    """Conservative token estimate: ceil(1.3 x whitespace word count)."""
    if limit <= 0:
        raise ValueError("limit must be positive")
    words = sum(len(content.split()) for _role, content in prompt.messages)
    estimate = math.ceil(1.3 * words)
    if estimate > limit:
        raise TokenBudgetExceeded(estimate, limit)
    return estimate


def load_demonstration(path: str | Path) -> Demonstration:
    """Load the demonstration asset (JSON: {"table": {...}, "pairs": [...]})."""
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"demonstration file does not exist: {path}")
    obj = json.loads(path.read_text(encoding="utf-8"))
    for name in ("table", "pairs"):
        if name not in obj:
            raise MissingField(name)
    t = obj["table"]
    for name in ("table_id", "caption", "rows"):
        if name not in t:
            raise MissingField(f"table.{name}")
    table = ScientificTable(
        table_id=str(t["table_id"]),
        caption=str(t["caption"]),
        rows=tuple(tuple(str(c) for c in row) for row in t["rows"]),
        column_header_row_count=int(t.get("header_rows", 0)),
    )
    pairs = tuple(
        (str(p.get("reasoning", "")), str(p.get("description", "")))
        for p in obj["pairs"]
    )
    return Demonstration(table=table, reasoning_pairs=pairs)


def default_demonstration_path() -> Path:
    return Path(__file__).parent / "assets" / "demo.json"
