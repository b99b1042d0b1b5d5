"""Table serialization into the special-token string format.

A table becomes `<CAP> caption <R> <C> cell ... <R> <C> cell ...`; a
reasoning string can be appended after a `<CoT>` marker to form the
fine-tuning input `table <CoT> reasoning`.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .corpus import ScientificTable
from .errors import EmptyReasoning, MalformedInput, SpecialTokenCollision

logger = logging.getLogger(__name__)

ROW_TOKEN = "<R>"
CELL_TOKEN = "<C>"
CAPTION_TOKEN = "<CAP>"
COT_TOKEN = "<CoT>"

SPECIAL_TOKENS = (ROW_TOKEN, CELL_TOKEN, CAPTION_TOKEN, COT_TOKEN)

# Inserted inside a colliding token occurrence to break it without visible
# change; escaping like "<R >" is rejected as lossy.
_ZWSP = "\u200b"

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class LinearizedInput:
    text: str
    kind: str  # "table_only" | "table_with_cot"
    source_table_id: str


def _clean(segment: str, where: str, on_collision: str) -> str:
    """Whitespace-normalize a caption/cell and defuse special-token collisions."""
    segment = _WS_RE.sub(" ", segment).strip()
    for token in SPECIAL_TOKENS:
        if token in segment:
            if on_collision == "error":
                raise SpecialTokenCollision(token, where)
            logger.warning("special token %s inside %s; escaping", token, where)
            segment = segment.replace(token, "<" + _ZWSP + token[1:])
    return segment


def linearize_table(table: ScientificTable, on_collision: str = "escape") -> LinearizedInput:
    """Serialize a table: caption segment first, then each row.

    `on_collision` controls what happens when a cell or the caption contains
    one of the four special tokens verbatim: "escape" (default) inserts a
    zero-width space inside the occurrence and logs it, "error" raises
    SpecialTokenCollision.
    """
    parts = [CAPTION_TOKEN, _clean(table.caption, "caption", on_collision)]
    for r, row in enumerate(table.rows):
        parts.append(ROW_TOKEN)
        for c, cell in enumerate(row):
            parts.append(CELL_TOKEN)
            parts.append(_clean(cell, f"cell ({r},{c})", on_collision))
    text = " ".join(p for p in parts if p != "")
    return LinearizedInput(text=text, kind="table_only", source_table_id=table.table_id)


def attach_reasoning(table_input: LinearizedInput, reasoning: str) -> LinearizedInput:
    """Append `<CoT> reasoning` to a table-only linearization.

    The table prefix is kept byte-identical.
    """
    if table_input.kind != "table_only":
        raise MalformedInput(f"expected a table_only input, got {table_input.kind}")
    if not reasoning or not reasoning.strip():
        raise EmptyReasoning("reasoning must be non-empty")
    reasoning = _WS_RE.sub(" ", reasoning).strip()
    return LinearizedInput(
        text=f"{table_input.text} {COT_TOKEN} {reasoning}",
        kind="table_with_cot",
        source_table_id=table_input.source_table_id,
    )


def delinearize(text: str, table_id: str = "") -> tuple[ScientificTable, str | None]:
    """Recover (table, optional reasoning) from a linearized string.

    Inverse of linearize_table / attach_reasoning up to the documented
    whitespace normalization inside cells.
    """
    table_part, reasoning = text, None
    if COT_TOKEN in text:
        table_part, _, reasoning_part = text.partition(COT_TOKEN)
        reasoning = reasoning_part.strip()
        if not reasoning:
            raise MalformedInput("empty reasoning after <CoT>")
        if COT_TOKEN in reasoning_part:
            raise MalformedInput("multiple <CoT> tokens")

    tokens = table_part.split()
    if not tokens or tokens[0] != CAPTION_TOKEN:
        raise MalformedInput("input must start with <CAP>")

    caption_words: list[str] = []
    rows: list[list[str]] = []
    cell_words: list[str] | None = None

    def flush_cell():
        nonlocal cell_words
        if cell_words is not None:
            rows[-1].append(" ".join(cell_words))
            cell_words = None

    state = "caption"
    for tok in tokens[1:]:
        if tok == CAPTION_TOKEN:
            raise MalformedInput("duplicate <CAP> token")
        if tok == ROW_TOKEN:
            flush_cell()
            rows.append([])
            state = "row"
        elif tok == CELL_TOKEN:
            if state == "caption":
                raise MalformedInput("<C> before any <R>")
            flush_cell()
            cell_words = []
            state = "cell"
        elif state == "caption":
            caption_words.append(tok)
        elif state == "cell":
            cell_words.append(tok)
        else:
            raise MalformedInput(f"unexpected text {tok!r} directly after <R>")
    flush_cell()

    if not rows or any(not row for row in rows):
        raise MalformedInput("no rows, or a row without cells")
    table = ScientificTable(
        table_id=table_id,
        caption=" ".join(caption_words),
        rows=tuple(tuple(row) for row in rows),
    )
    return table, reasoning
