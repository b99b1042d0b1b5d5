import json
import random
from pathlib import Path

import pytest

from tabdistill.corpus import ScientificTable, load_corpus
from tabdistill.prompts import Demonstration, load_demonstration, default_demonstration_path

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens"


def make_record(table_id, split, n_rows=2, n_cols=3, text="A beats B on the benchmark.",
                caption="Results", setting="medium"):
    return {
        "table_id": table_id,
        "caption": caption,
        "rows": [[f"r{r}c{c}" for c in range(n_cols)] for r in range(n_rows)],
        "header_rows": 1,
        "text": text,
        "split": split,
        "setting": setting,
    }


def write_jsonl(path, objs):
    path.write_text("".join(json.dumps(o) + "\n" for o in objs), encoding="utf-8")
    return path


@pytest.fixture
def small_corpus_file(tmp_path):
    records = (
        [make_record(f"t{i}", "train") for i in range(6)]
        + [make_record(f"v{i}", "validation") for i in range(2)]
        + [make_record(f"s{i}", "test") for i in range(2)]
    )
    return write_jsonl(tmp_path / "corpus.jsonl", records)


@pytest.fixture
def small_corpus(small_corpus_file):
    return load_corpus(small_corpus_file)


@pytest.fixture
def demo() -> Demonstration:
    return load_demonstration(default_demonstration_path())


@pytest.fixture
def tiny_table() -> ScientificTable:
    return ScientificTable(table_id="tiny", caption="c", rows=(("v",),))


def random_table(rng: random.Random, table_id: str) -> ScientificTable:
    words = ["alpha", "beta", "7.5", "score", "model", "42", "n/a", "best", "-0.3"]
    n_rows = rng.randint(1, 6)
    n_cols = rng.randint(1, 5)
    rows = tuple(
        tuple(" ".join(rng.choices(words, k=rng.randint(1, 3))) for _ in range(n_cols))
        for _ in range(n_rows)
    )
    caption = " ".join(rng.choices(words, k=rng.randint(1, 6)))
    return ScientificTable(table_id=table_id, caption=caption, rows=rows)
